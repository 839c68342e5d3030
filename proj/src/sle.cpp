#include "ig/sle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ig/formulas.hpp"
#include "ig/rng.hpp"

namespace ig {

LoewnerChain DrivingFunction::to_chain() const {
    std::vector<LoewnerStep> steps;
    steps.reserve(n_steps());
    for (std::size_t k = 1; k < t.size(); ++k)
        steps.push_back({w[k] - w[k - 1], t[k] - t[k - 1]});
    return LoewnerChain(std::move(steps));
}

DrivingFunction sample_sle(double kappa, int n_steps, double dt, std::uint64_t seed) {
    if (!(kappa >= 0.0))
        throw std::domain_error("kappa must be nonnegative");
    if (n_steps <= 0 || !(dt > 0.0))
        throw std::invalid_argument("need n_steps > 0 and dt > 0");
    Rng rng(seed);
    DrivingFunction d;
    d.kappa = kappa;
    d.dt = dt;
    d.t.reserve(n_steps + 1);
    d.w.reserve(n_steps + 1);
    d.t.push_back(0.0);
    d.w.push_back(0.0);
    double sk = std::sqrt(kappa * dt);
    for (int k = 1; k <= n_steps; ++k) {
        d.t.push_back(k * dt);
        d.w.push_back(d.w.back() + sk * rng.gaussian());
    }
    d.stopped_reason = StopReason::Budget;
    return d;
}

namespace {

struct TrackedPoint {
    double v;
    double rho;
    int side; // -1 left, +1 right
};

DrivingFunction sample_rho_direct(double kappa, const ForcePointConfig& fp, int n_steps, double dt,
                                  std::uint64_t seed, const SleRhoOptions& opts) {
    Rng rng(seed);
    std::vector<TrackedPoint> pts;
    for (const auto& p : fp.left) {
        if (p.x > opts.seed_position)
            throw std::invalid_argument("left force points must sit at or left of the seed");
        pts.push_back({p.x, p.rho, -1});
    }
    for (const auto& p : fp.right) {
        if (p.x < opts.seed_position)
            throw std::invalid_argument("right force points must sit at or right of the seed");
        pts.push_back({p.x, p.rho, +1});
    }

    DrivingFunction d;
    d.kappa = kappa;
    d.dt = dt;
    d.t.push_back(0.0);
    d.w.push_back(opts.seed_position);
    d.force_tracks.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        d.force_tracks[i].push_back(pts[i].v);
        d.force_weights.push_back(pts[i].rho);
        d.force_sides.push_back(pts[i].side);
    }
    d.stopped_reason = StopReason::Budget;

    double w = opts.seed_position;
    double sqdt = std::sqrt(dt);
    double coll_eps = opts.collision_factor * sqdt;
    double drift_floor = sqdt; // denominators are floored one step from collision
    for (int k = 1; k <= n_steps; ++k) {
        // continuation threshold on the collided weight sums
        double sum_left = 0.0, sum_right = 0.0;
        for (const auto& p : pts) {
            if (std::abs(w - p.v) <= coll_eps)
                (p.side < 0 ? sum_left : sum_right) += p.rho;
        }
        if (sum_left <= -2.0 || sum_right <= -2.0) {
            d.stopped_reason = StopReason::ContinuationThreshold;
            break;
        }

        double drift = 0.0;
        for (const auto& p : pts) {
            double gap = w - p.v;
            double g = (p.side < 0) ? std::max(gap, drift_floor) : std::min(gap, -drift_floor);
            drift += p.rho / g;
        }
        double w_new = w + drift * dt + std::sqrt(kappa) * sqdt * rng.gaussian();
        if (!std::isfinite(w_new))
            throw std::runtime_error("sample_sle_rho: driving diverged (NaN guard)");
        for (auto& p : pts) {
            double gap = p.v - w;
            double g = (p.side < 0) ? std::min(gap, -drift_floor) : std::max(gap, drift_floor);
            p.v += 2.0 * dt / g;
            // images of boundary points cannot cross the driving value
            if (p.side < 0)
                p.v = std::min(p.v, w_new);
            else
                p.v = std::max(p.v, w_new);
        }
        w = w_new;
        d.t.push_back(k * dt);
        d.w.push_back(w);
        for (std::size_t i = 0; i < pts.size(); ++i)
            d.force_tracks[i].push_back(pts[i].v);
    }
    return d;
}

DrivingFunction sample_rho_bessel(double kappa, const ForcePoint& p, int side, int n_steps,
                                  double dt, std::uint64_t seed, const SleRhoOptions& opts) {
    Rng rng(seed);
    double delta = bessel_dimension(kappa, p.rho);
    if (!(delta > 0.0))
        throw std::domain_error("bessel dimension <= 0: process undefined (see classify_phase)");

    DrivingFunction d;
    d.kappa = kappa;
    d.dt = dt;
    d.t.push_back(0.0);
    d.w.push_back(opts.seed_position);
    d.force_tracks.resize(1);
    d.force_tracks[0].push_back(p.x);
    d.force_weights.push_back(p.rho);
    d.force_sides.push_back(side);
    d.stopped_reason = StopReason::Budget;

    double sq_kappa = std::sqrt(kappa);
    double sqdt = std::sqrt(dt);
    double coll_eps = opts.collision_factor * sqdt;
    double v = p.x;
    double w = opts.seed_position;
    // rescaled gap X = |V - W|/sqrt(kappa) is a Bessel(delta); squared-Bessel
    // Euler with full truncation keeps it nonnegative
    double z = std::pow((v - w) / sq_kappa, 2);
    for (int k = 1; k <= n_steps; ++k) {
        double zp = std::max(z, 0.0);
        z = z + delta * dt + 2.0 * std::sqrt(zp * dt) * rng.gaussian();
        double x_gap = std::sqrt(std::max(z, 0.0));
        double gap_prev = std::abs(v - w);
        double g = std::max(gap_prev, sqdt);
        v += side * 2.0 * dt / g;
        w = v - side * sq_kappa * x_gap;
        if (!std::isfinite(w))
            throw std::runtime_error("sample_sle_rho: driving diverged (NaN guard)");
        d.t.push_back(k * dt);
        d.w.push_back(w);
        d.force_tracks[0].push_back(v);
        if (sq_kappa * x_gap <= coll_eps && p.rho < -2.0) {
            // collided with weight below the continuation threshold
            d.stopped_reason = StopReason::ContinuationThreshold;
            break;
        }
    }
    return d;
}

} // namespace

DrivingFunction sample_sle_rho(double kappa, const ForcePointConfig& fp, int n_steps, double dt,
                               std::uint64_t seed, const SleRhoOptions& opts) {
    if (!(kappa > 0.0))
        throw std::domain_error("kappa must be positive");
    if (n_steps <= 0 || !(dt > 0.0))
        throw std::invalid_argument("need n_steps > 0 and dt > 0");
    std::size_t total = fp.left.size() + fp.right.size();
    if (total == 0)
        return sample_sle(kappa, n_steps, dt, seed);
    if (total == 1 && !opts.force_direct_euler) {
        bool is_left = !fp.left.empty();
        const ForcePoint& p = is_left ? fp.left.front() : fp.right.front();
        double delta = bessel_dimension(kappa, p.rho);
        if (delta > 0.0)
            return sample_rho_bessel(kappa, p, is_left ? -1 : +1, n_steps, dt, seed, opts);
    }
    return sample_rho_direct(kappa, fp, n_steps, dt, seed, opts);
}

RadialAnglePath radial_angle_process(double kappa_prime, double theta0, int n_steps, double dt,
                                     std::uint64_t seed, double guard) {
    if (!(kappa_prime > 4.0))
        throw std::domain_error("radial angle SDE requires kappa' > 4");
    if (!(theta0 > 0.0 && theta0 < M_PI))
        throw std::domain_error("theta0 must lie in (0, pi)");
    Rng rng(seed);
    RadialAnglePath path;
    path.theta.reserve(n_steps + 1);
    path.theta.push_back(theta0);
    double th = theta0;
    for (int k = 1; k <= n_steps && !path.hit_boundary; ++k) {
        // substep near the strip edges: a fixed-step Euler jumps straight
        // over the cot barrier, which would fake boundary hits for
        // kappa' >= 8.  Noise per substep is kept below a tenth of the
        // distance to the nearest edge.
        double remaining = dt;
        while (remaining > 0.0) {
            double dist = std::min(th, M_PI - th);
            double h = std::min(remaining, dist * dist / (100.0 * kappa_prime));
            h = std::max(h, dt / 65536.0);
            th += (kappa_prime - 4.0) * (std::cos(th) / std::sin(th)) * h +
                  std::sqrt(kappa_prime * h) * rng.gaussian();
            remaining -= h;
            if (th <= guard || th >= M_PI - guard) {
                path.hit_boundary = true;
                break;
            }
        }
        path.theta.push_back(th);
    }
    return path;
}

} // namespace ig
