#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "ig/loewner.hpp"
#include "ig/rng.hpp"

using namespace ig;
using doctest::Approx;

namespace {

LoewnerChain zero_chain(int n, double dt) {
    std::vector<LoewnerStep> steps(n, {0.0, dt});
    return LoewnerChain(steps);
}

LoewnerChain random_chain(int n, double dt, double kappa, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<LoewnerStep> steps;
    steps.reserve(n);
    double sk = std::sqrt(kappa * dt);
    for (int k = 0; k < n; ++k)
        steps.push_back({sk * rng.gaussian(), dt});
    return LoewnerChain(steps);
}

// independent oracle: RK4 integration of the reverse Loewner flow
// dz/ds = -2/(z - W) from the tip of the last slit back to physical
// coordinates, for piecewise-constant driving
Cpx rk4_backward_tip(const LoewnerChain& chain, std::size_t upto_step, int substeps) {
    Cpx z = Cpx(chain.slit_position(upto_step), 2.0 * std::sqrt(chain.steps()[upto_step - 1].dt));
    for (std::size_t j = upto_step - 1; j >= 1; --j) {
        double w = chain.slit_position(j);
        double h = chain.steps()[j - 1].dt / substeps;
        auto f = [&](Cpx p) { return -2.0 / (p - w); };
        for (int s = 0; s < substeps; ++s) {
            Cpx k1 = f(z);
            Cpx k2 = f(z + 0.5 * h * k1);
            Cpx k3 = f(z + 0.5 * h * k2);
            Cpx k4 = f(z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
    }
    return z;
}

} // namespace

TEST_CASE("zero-driving forward map is sqrt(z^2 + 4t)") {
    LoewnerChain chain = zero_chain(10000, 1e-4);
    // z = i lies inside the hull at t = 1 (swallowed at t = 1/4); the
    // boundary-following continuation still reproduces the closed form sqrt(3)
    PointFlow st = chain.evolve_point(Cpx(0.0, 1.0), 1.0, true);
    CHECK(std::abs(st.z - Cpx(std::sqrt(3.0), 0.0)) < 1e-9);
    CHECK_THROWS_AS(chain.forward_map(Cpx(0.0, 1.0), 1.0), swallowed_error);

    // before swallowing the map is sqrt(z^2 + 4t) directly
    Cpx g = chain.forward_map(Cpx(0.0, 1.0), 0.2);
    CHECK(std::abs(g - Cpx(0.0, std::sqrt(0.2))) < 1e-12);

    CHECK(chain.forward_map(Cpx(0.3, 0.7), 0.0) == Cpx(0.3, 0.7));

    // hydrodynamic normalization far away
    Cpx big(1e6, 1.0);
    Cpx expect = big + 2.0 * 1.0 / big;
    CHECK(std::abs(chain.forward_map(big, 1.0) - expect) / std::abs(expect) < 1e-9);
}

TEST_CASE("zero-driving trace is the vertical segment") {
    double T = 1.0, dt = 1e-4;
    LoewnerChain chain = zero_chain(static_cast<int>(T / dt), dt);
    Polyline tr = chain.trace();
    double worst = 0.0;
    for (std::size_t i = 0; i < tr.size(); ++i)
        worst = std::max(worst, std::abs(tr.pts[i] - Cpx(0.0, 2.0 * std::sqrt(tr.t[i]))));
    CHECK(worst < 1e-6);
    CHECK(std::abs(tr.pts.back() - Cpx(0.0, 2.0)) < 1e-9);
}

TEST_CASE("scaling: driving (lambda w, lambda^2 t) scales the trace by lambda") {
    double lam = 2.5;
    LoewnerChain chain = random_chain(400, 1e-3, 2.0, 11);
    std::vector<LoewnerStep> scaled;
    for (const auto& s : chain.steps())
        scaled.push_back({lam * s.dw, lam * lam * s.dt});
    LoewnerChain chain2((std::move(scaled)));
    Polyline t1 = chain.trace();
    Polyline t2 = chain2.trace();
    REQUIRE(t1.size() == t2.size());
    for (std::size_t i = 0; i < t1.size(); ++i)
        CHECK(std::abs(t2.pts[i] - lam * t1.pts[i]) < 1e-11 * lam * (1.0 + std::abs(t1.pts[i])));

    // |g'| is scale invariant: g'_{lam^2 t}(lam z) = g'_t(z)
    Cpx z(0.4, 0.9);
    CHECK(chain2.derivative(lam * z, lam * lam * 0.25) ==
          Approx(chain.derivative(z, 0.25)).epsilon(1e-10));
}

TEST_CASE("hand-built 3-step chain matches the RK4 back-solve oracle") {
    std::vector<LoewnerStep> steps = {{0.3, 0.05}, {-0.2, 0.04}, {0.1, 0.06}};
    LoewnerChain chain(steps);
    Polyline tr = chain.trace();
    for (std::size_t k = 1; k <= 3; ++k) {
        Cpx oracle = rk4_backward_tip(chain, k, 4000);
        CHECK(std::abs(tr.pts[k - 1] - oracle) < 1e-8);
    }
}

namespace {

// distance to the midpoint-refined trace plus the local resolution: the
// length of the polyline segment realizing the minimum.  Probes closer than
// a few segment lengths see discretization, not geometry.
struct HullDistance {
    double d;
    double res;
};

HullDistance hull_distance(const Polyline& tr, Cpx z) {
    HullDistance out{std::imag(z), 0.0};
    for (std::size_t i = 1; i < tr.size(); ++i) {
        Cpx a = tr.pts[i - 1];
        Cpx b = tr.pts[i];
        Cpx ab = b - a;
        double len2 = std::norm(ab);
        double s = len2 > 0.0 ? std::clamp(std::real(std::conj(ab) * (z - a)) / len2, 0.0, 1.0)
                              : 0.0;
        double d = std::abs(a + s * ab - z);
        if (d < out.d) {
            out.d = d;
            out.res = std::sqrt(len2);
        }
    }
    return out;
}

} // namespace

TEST_CASE("derivative: closed form at zero driving and Koebe bounds on random chains") {
    LoewnerChain chain = zero_chain(10000, 1e-4);
    // |g'_1(i)| = |z/sqrt(z^2+4t)| = 1/sqrt(3), following the boundary after
    // the swallowing time
    PointFlow st1 = chain.evolve_point(Cpx(0.0, 1.0), 1.0, true);
    CHECK(std::exp(st1.log_deriv) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-9));
    CHECK(chain.derivative(Cpx(0.0, 1.0), 0.2) ==
          Approx(1.0 / std::sqrt(0.2)).epsilon(1e-12));
    CHECK(chain.derivative(Cpx(0.3, 1.0), 0.0) == Approx(1.0));

    // Koebe distortion: d'/(4d) <= |g'(z)| <= 4 d'/d with d = dist(z, hull u R),
    // d' = Im g(z), over randomized chains and probe points.  d is measured on
    // the refined trace polyline, so probes within a few segment lengths of
    // the hull are skipped.
    Rng rng(2024);
    int tested = 0;
    for (int rep = 0; rep < 60 && tested < 1000; ++rep) {
        LoewnerChain rc = random_chain(300, 1e-3, 3.0, 500 + rep);
        TraceOptions topt;
        topt.midpoints = true;
        Polyline tr = rc.trace(topt);
        for (int probe = 0; probe < 40; ++probe) {
            Cpx z(2.0 * rng.uniform() - 1.0, 0.05 + 1.5 * rng.uniform());
            PointFlow st = rc.evolve_point(z, rc.total_capacity());
            if (st.swallowed())
                continue;
            HullDistance hd = hull_distance(tr, z);
            if (hd.d < 8.0 * hd.res)
                continue;
            double dp = std::imag(st.z);
            double deriv = std::exp(st.log_deriv);
            CHECK(deriv >= dp / (4.0 * hd.d) - 1e-9);
            CHECK(deriv <= 4.0 * dp / hd.d + 1e-9);
            ++tested;
        }
    }
    CHECK(tested >= 1000);
}

TEST_CASE("image containment bound (ball-size lemma) on random probes") {
    // |f(w) - f(z)| <= 4 |w-z| / (1-r^2) * dist(f(z), R) / dist(z, hull u R)
    Rng rng(77);
    int tested = 0;
    for (int rep = 0; rep < 90 && tested < 1000; ++rep) {
        LoewnerChain rc = random_chain(200, 1e-3, 2.5, 900 + rep);
        TraceOptions topt;
        topt.midpoints = true;
        Polyline tr = rc.trace(topt);
        for (int probe = 0; probe < 60 && tested < 1000; ++probe) {
            Cpx z(2.0 * rng.uniform() - 1.0, 0.1 + 1.5 * rng.uniform());
            PointFlow sz = rc.evolve_point(z, rc.total_capacity());
            if (sz.swallowed())
                continue;
            HullDistance hd = hull_distance(tr, z);
            if (hd.d < 8.0 * hd.res)
                continue;
            double rr = 0.5;
            Cpx w = z + rr * 0.9 * hd.d *
                            Cpx(std::cos(6.28 * rng.uniform()), std::sin(6.28 * rng.uniform()));
            if (std::imag(w) <= 0.0)
                continue;
            PointFlow sw = rc.evolve_point(w, rc.total_capacity());
            if (sw.swallowed())
                continue;
            double bound = 4.0 * std::abs(w - z) / (1.0 - rr * rr) * std::imag(sz.z) / hd.d;
            CHECK(std::abs(sw.z - sz.z) <= bound + 1e-9);
            ++tested;
        }
    }
    CHECK(tested >= 900);
}

TEST_CASE("capacity additivity: composing a split chain reproduces the full map") {
    LoewnerChain chain = random_chain(200, 1e-3, 2.0, 4242);
    std::size_t split = 120;
    std::vector<LoewnerStep> head(chain.steps().begin(), chain.steps().begin() + split);
    std::vector<LoewnerStep> tail(chain.steps().begin() + split, chain.steps().end());
    LoewnerChain ch_head((std::move(head)));
    LoewnerChain ch_tail((std::move(tail)));
    double w_split = chain.driving_at(split);

    for (Cpx z : {Cpx(0.2, 0.8), Cpx(-0.7, 1.3), Cpx(1.1, 0.4)}) {
        Cpx g1 = ch_head.forward_map(z, ch_head.total_capacity());
        // the tail chain starts with driving 0; shift coordinates by w(split)
        Cpx g2 = ch_tail.forward_map(g1 - w_split, ch_tail.total_capacity()) + w_split;
        Cpx g = chain.forward_map(z, chain.total_capacity());
        CHECK(std::abs(g2 - g) < 1e-8);
    }
}

TEST_CASE("diagnostics and swallowing") {
    LoewnerChain chain = zero_chain(4000, 1e-4);
    Diagnostics d0 = chain.diagnostics(Cpx(0.0, 1.0), 0.0);
    CHECK(d0.theta == Approx(M_PI / 2.0));
    CHECK(d0.s == Approx(1.0));
    CHECK(d0.delta == Approx(1.0));
    CHECK(d0.upsilon == Approx(1.0));

    // z = i is swallowed by the vertical slit exactly at t = 1/4
    CHECK_THROWS_AS(chain.diagnostics(Cpx(0.0, 1.0), 0.26), swallowed_error);
    CHECK_NOTHROW(chain.diagnostics(Cpx(0.0, 1.0), 0.24));

    // Upsilon is non-increasing in t
    LoewnerChain rc = random_chain(400, 1e-3, 3.0, 31);
    for (Cpx z : {Cpx(0.5, 0.9), Cpx(-0.3, 1.7)}) {
        double prev = 1e300;
        for (int k = 1; k <= 8; ++k) {
            double t = rc.total_capacity() * k / 8.0;
            PointFlow st = rc.evolve_point(z, t);
            if (st.swallowed())
                break;
            double ups = std::imag(st.z) / std::exp(st.log_deriv);
            CHECK(ups <= prev + 1e-12);
            prev = ups;
        }
    }
}

TEST_CASE("tip preimage consistency: forward map of the trace tip lands near W") {
    LoewnerChain chain = random_chain(300, 1e-3, 2.0, 808);
    Polyline tr = chain.trace();
    for (std::size_t k : {std::size_t(50), std::size_t(150), std::size_t(299)}) {
        PointFlow st = chain.evolve_point(tr.pts[k], tr.t[k], true);
        CHECK(std::abs(st.z - Cpx(chain.slit_position(k + 1), 0.0)) < 1e-4);
    }
}

TEST_CASE("hitting time on the zero-driving trace") {
    LoewnerChain chain = zero_chain(10000, 1e-4);
    Polyline tr = chain.trace();
    // eta(t) = 2i sqrt(t) passes through i at t = 1/4
    auto tau = hitting_time(tr, Cpx(0.0, 1.0), 1e-3);
    REQUIRE(tau.has_value());
    CHECK(*tau <= 0.25 + 1e-6);
    CHECK(*tau >= 0.24);

    // eps larger than the distance to the start: immediate hit
    auto tau0 = hitting_time(tr, Cpx(0.05, 0.05), 0.2);
    REQUIRE(tau0.has_value());
    CHECK(*tau0 == Approx(tr.t[0]));

    // monotone in eps
    auto t_small = hitting_time(tr, Cpx(0.0, 1.0), 1e-3);
    auto t_big = hitting_time(tr, Cpx(0.0, 1.0), 1e-1);
    REQUIRE(t_small.has_value());
    REQUIRE(t_big.has_value());
    CHECK(*t_big <= *t_small);

    CHECK_FALSE(hitting_time(tr, Cpx(5.0, 5.0), 1e-2).has_value());
}

TEST_CASE("driving extraction inverts the trace of a known chain") {
    LoewnerChain chain = random_chain(150, 4e-4, 2.0, 99);
    Polyline tr = chain.trace();
    ExtractedDriving drv = extract_driving(tr.pts);
    REQUIRE(drv.t.size() > 100);
    CHECK(drv.capacity() == Approx(chain.total_capacity()).epsilon(0.05));
    // recovered driving follows the true one
    double worst = 0.0;
    for (std::size_t k = 0; k < drv.t.size(); ++k) {
        // true driving at that capacity (held value)
        double w_true = 0.0;
        for (std::size_t j = 1; j <= chain.size(); ++j) {
            if (chain.time_at(j) >= drv.t[k] - 1e-12) {
                w_true = chain.slit_position(j);
                break;
            }
        }
        worst = std::max(worst, std::fabs(drv.w[k] - w_true));
    }
    CHECK(worst < 0.05);

    double qv_true = 0.0;
    for (const auto& s : chain.steps())
        qv_true += s.dw * s.dw;
    CHECK(drv.quadratic_variation() == Approx(qv_true).epsilon(0.15));
}
