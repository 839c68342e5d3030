#include "ig/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "ig/flowlines.hpp"
#include "ig/formulas.hpp"
#include "ig/gff.hpp"
#include "ig/loewner.hpp"
#include "ig/rng.hpp"

namespace ig {

namespace {

void run_replicas(int replicas, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < replicas; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < replicas; i += threads)
                body(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

double point_segment_dist(Cpx p, Cpx a, Cpx b) {
    Cpx ab = b - a;
    double len2 = std::norm(ab);
    double s = len2 > 0.0 ? std::clamp(std::real(std::conj(ab) * (p - a)) / len2, 0.0, 1.0) : 0.0;
    return std::abs(a + s * ab - p);
}

double polyline_min_dist(const std::vector<Cpx>& u, const std::vector<Cpx>& v) {
    double best = std::numeric_limits<double>::infinity();
    for (const Cpx& p : u) {
        for (std::size_t i = 1; i < v.size(); ++i)
            best = std::min(best, point_segment_dist(p, v[i - 1], v[i]));
        if (v.size() == 1)
            best = std::min(best, std::abs(p - v[0]));
    }
    return best;
}

} // namespace

std::size_t box_occupancy(const PointCloud& cloud, double scale) {
    if (!(scale > 0.0))
        throw std::invalid_argument("box scale must be positive");
    std::unordered_set<std::uint64_t> boxes;
    boxes.reserve(cloud.pts.size());
    for (const Cpx& p : cloud.pts) {
        std::int64_t ix = static_cast<std::int64_t>(std::floor(std::real(p) / scale));
        std::int64_t iy = static_cast<std::int64_t>(std::floor(std::imag(p) / scale));
        boxes.insert((static_cast<std::uint64_t>(ix + 0x40000000LL) << 32) |
                     static_cast<std::uint64_t>(static_cast<std::uint32_t>(iy + 0x40000000LL)));
    }
    return boxes.size();
}

ExponentFit box_count(const PointCloud& cloud, const std::vector<double>& scales) {
    if (cloud.pts.empty())
        throw std::invalid_argument("box_count: empty cloud");
    if (scales.size() < 2)
        throw std::invalid_argument("box_count: need at least two scales");
    std::vector<double> inv_r, counts;
    for (double r : scales) {
        inv_r.push_back(1.0 / r);
        counts.push_back(static_cast<double>(box_occupancy(cloud, r)));
    }
    if (std::all_of(counts.begin(), counts.end(), [&](double c) { return c == counts[0]; }))
        throw std::domain_error("box_count: degenerate fit, all box counts equal");
    return fit_loglog(inv_r, counts);
}

namespace {

// Per-replica streamed SLE chain: evolves the target point, the escape
// anchors, and (only while the trace is near the target) tip positions.
struct DerivReplica {
    double value_pow = 0.0; // exponent nu + r applied to |g'| at tau_eps
    std::vector<double> contrib; // per eps: |g'|^{nu+r} or 0
    std::vector<bool> hit;
};

DerivReplica run_deriv_replica(double kappa, double pow_exp, Cpx z,
                               const std::vector<double>& eps, double R, double t_max, double dt,
                               Rng rng) {
    DerivReplica out;
    out.contrib.assign(eps.size(), 0.0);
    out.hit.assign(eps.size(), false);

    const double sqk = std::sqrt(kappa * dt);
    const int n_anchor = 17;
    std::vector<Cpx> anchors;
    std::vector<bool> anchor_dead(n_anchor, false);
    std::vector<double> anchor_logd(n_anchor, 0.0);
    for (int a = 0; a < n_anchor; ++a) {
        double phi = M_PI * (a + 1) / (n_anchor + 1);
        anchors.push_back(R * Cpx(std::cos(phi), std::sin(phi)));
    }

    std::vector<double> base;
    std::vector<double> dts;
    std::size_t n_cap = static_cast<std::size_t>(t_max / dt) + 2;
    base.reserve(n_cap);
    dts.reserve(n_cap);

    Cpx gz = z;
    double log_delta = 0.0;
    double w = 0.0;
    std::size_t next_unhit = 0;

    Cpx prev_tip;
    bool have_prev_tip = false;
    std::size_t last_tip_step = 0;

    auto tip_at = [&](std::size_t m) {
        Cpx p = Cpx(base[m - 1], 2.0 * std::sqrt(dts[m - 1]));
        for (std::size_t j = m - 1; j >= 1; --j)
            p = base[j - 1] + detail::slit_inverse(p - base[j - 1], 4.0 * dts[j - 1]);
        return p;
    };

    double t = 0.0;
    std::size_t step = 0;
    while (t < t_max && next_unhit < eps.size()) {
        ++step;
        double c = w;
        base.push_back(c);
        dts.push_back(dt);
        t += dt;

        Cpx wz = gz - c;
        Cpx wz2 = detail::slit_forward(wz, 4.0 * dt);
        log_delta += 0.5 * (std::log(std::norm(wz)) - std::log(std::norm(wz2)));
        gz = c + wz2;
        if (std::imag(wz2) < LoewnerChain::kSwallowGuard)
            break; // z swallowed: the trace never came within the remaining eps

        bool escaped = false;
        for (int a = 0; a < n_anchor; ++a) {
            if (anchor_dead[a])
                continue;
            Cpx aw = anchors[a] - c;
            Cpx aw2 = detail::slit_forward(aw, 4.0 * dt);
            anchor_logd[a] += 0.5 * (std::log(std::norm(aw)) - std::log(std::norm(aw2)));
            anchors[a] = c + aw2;
            if (std::imag(aw2) < LoewnerChain::kSwallowGuard) {
                anchor_dead[a] = true;
                escaped = true;
            } else if (std::imag(aw2) * std::exp(-anchor_logd[a]) < 0.6) {
                escaped = true; // hull within a constant of radius R
            }
        }
        if (escaped)
            break;

        w += sqk * rng.gaussian();

        // trace proximity only matters once the conformal radius of z is
        // comparable to the largest unresolved eps (dist >= upsilon/2)
        double delta = std::exp(log_delta);
        double upsilon = std::imag(gz) / delta;
        double eps_big = eps[next_unhit];
        if (upsilon > 2.2 * eps_big) {
            have_prev_tip = false;
            continue;
        }
        double d_proxy = std::abs(gz - w) / delta;
        std::size_t stride = (d_proxy <= 16.0 * eps_big) ? 1 : 16;
        if (step - last_tip_step < stride)
            continue;
        Cpx tip = tip_at(step);
        double dist = have_prev_tip ? point_segment_dist(z, prev_tip, tip) : std::abs(tip - z);
        prev_tip = tip;
        have_prev_tip = true;
        last_tip_step = step;
        while (next_unhit < eps.size() && dist <= eps[next_unhit]) {
            out.hit[next_unhit] = true;
            out.contrib[next_unhit] = std::exp(pow_exp * log_delta);
            ++next_unhit;
        }
    }
    return out;
}

} // namespace

DerivMomentResult derivative_moment_scaling(double kappa, double r, Cpx z,
                                            const std::vector<double>& eps_list, double R,
                                            int replicas, std::uint64_t seed,
                                            const DerivMomentOptions& opts) {
    if (!(kappa > 0.0))
        throw std::domain_error("kappa must be positive");
    if (eps_list.size() < 2)
        throw std::invalid_argument("need at least two eps values");
    if (!(std::imag(z) > 0.0))
        throw std::domain_error("z must lie in the upper half plane");
    double az = std::arg(z);
    if (!(az > 0.05 && az < M_PI - 0.05))
        throw std::domain_error("arg z must be bounded away from {0, pi}");
    if (R < 2.0 * std::abs(z))
        throw std::invalid_argument("escape radius must satisfy R >= 2|z|");

    std::vector<double> eps = eps_list;
    std::sort(eps.begin(), eps.end(), std::greater<double>());
    NuXi e = nu_xi(kappa, r);
    double pow_exp = e.nu + r;
    double t_max = opts.max_capacity > 0.0 ? opts.max_capacity : R * R / 2.0;

    std::vector<DerivReplica> results(replicas);
    run_replicas(replicas, opts.threads, [&](int i) {
        results[i] = run_deriv_replica(kappa, pow_exp, z, eps, R, t_max, opts.dt,
                                       Rng::for_replica(seed, static_cast<std::uint64_t>(i)));
    });

    DerivMomentResult res;
    res.expected_slope = -e.xi - r;
    std::vector<double> means, scales;
    for (std::size_t k = 0; k < eps.size(); ++k) {
        std::vector<double> vals(replicas);
        std::size_t hits = 0;
        for (int i = 0; i < replicas; ++i) {
            vals[i] = results[i].contrib[k];
            if (results[i].hit[k])
                ++hits;
        }
        MeanStderr ms = mean_stderr(vals);
        res.rows.push_back({eps[k], ms.mean, ms.stderr_, hits, static_cast<std::size_t>(replicas)});
        if (hits < static_cast<std::size_t>(opts.min_hits))
            throw std::runtime_error("insufficient hits at eps = " + std::to_string(eps[k]));
        means.push_back(ms.mean);
        scales.push_back(eps[k]);
    }
    res.fit = fit_loglog(scales, means);
    return res;
}

namespace {

// path points up to (and including) the first exit of the |z| <= 1 disk
std::vector<Cpx> clip_to_unit_circle(const std::vector<Cpx>& pts, bool* reached) {
    std::vector<Cpx> out;
    *reached = false;
    for (const Cpx& p : pts) {
        out.push_back(p);
        if (std::abs(p) >= 1.0) {
            *reached = true;
            break;
        }
    }
    return out;
}

} // namespace

NonIntersectResult nonintersection_experiment(double kappa, double theta1, double theta2,
                                              double a, double b,
                                              const std::vector<double>& eps_list, int grid,
                                              int replicas, std::uint64_t seed,
                                              const NonIntersectOptions& opts) {
    IgConstants c = ig_constants(kappa);
    double gap = theta1 - theta2;
    if (!(gap > -M_PI))
        throw std::domain_error("angle gap <= -pi is outside the experiment's range");
    // at or above the touching threshold the paths cannot meet: no decay
    double alpha = (gap >= 2.0 * c.lambda_prime / c.chi)
                       ? 0.0
                       : nonintersection_alpha(kappa, theta1, theta2, a, b);

    GridGeometry geom{grid, std::max(8, grid / 2), -1.25, 0.0, 2.5 / grid};
    double step = opts.step_factor * geom.spacing;
    double scale = opts.fluctuation_scale > 0.0 ? opts.fluctuation_scale : 2.0 * M_PI;

    NonIntersectResult res;
    res.expected_alpha = alpha;

    std::uint64_t field_stream = 0;
    for (double eps : eps_list) {
        if (!(eps > 0.0 && eps < 1.0))
            throw std::invalid_argument("eps must lie in (0,1)");
        std::vector<double> breaks = {-eps / 2.0, 0.0, eps / 2.0};
        std::vector<double> values = {a, c.lambda - theta1 * c.chi, -c.lambda - theta2 * c.chi, b};
        BoundarySpec boundary = BoundarySpec::real_line_flow(breaks, values, c.chi);

        struct Outcome {
            bool both_reached = false;
            bool non_intersect = false;
            bool e_delta = false;
        };
        std::vector<Outcome> outs(replicas);
        std::uint64_t stream0 = field_stream;
        run_replicas(replicas, opts.threads, [&](int i) {
            GffField field = sample_gff(geom, boundary, scale,
                                        seed ^ (0x5851f42d4c957f2dULL * (stream0 + i + 1)));
            Cpx s1(-eps / 2.0, 0.5 * geom.spacing);
            Cpx s2(eps / 2.0, 0.5 * geom.spacing);
            // boundary-hitting flow lines bounce off the simulated real line
            FlowLineOptions fopts;
            fopts.reflect_bottom = true;
            TracedPath p1 = trace_flow_line(field, s1, c.chi, theta1, step, opts.max_steps, fopts);
            TracedPath p2 = trace_flow_line(field, s2, c.chi, theta2, step, opts.max_steps, fopts);
            bool r1 = false, r2 = false;
            std::vector<Cpx> c1 = clip_to_unit_circle(p1.pts, &r1);
            std::vector<Cpx> c2 = clip_to_unit_circle(p2.pts, &r2);
            Outcome& o = outs[i];
            o.both_reached = r1 && r2;
            if (!o.both_reached)
                return;
            double d = polyline_min_dist(c1, c2);
            o.non_intersect = d > step;
            if (o.non_intersect) {
                // E_delta extras: tail separation and small-disk avoidance
                auto tail = [&](const std::vector<Cpx>& pts) {
                    std::vector<Cpx> t;
                    bool in_tail = false;
                    for (const Cpx& p : pts) {
                        if (!in_tail && std::abs(p) >= 0.5)
                            in_tail = true;
                        if (in_tail)
                            t.push_back(p);
                    }
                    return t;
                };
                std::vector<Cpx> t1 = tail(c1), t2 = tail(c2);
                bool tails_ok = !t1.empty() && !t2.empty() &&
                                polyline_min_dist(t1, t2) >= opts.delta;
                double min_abs = std::numeric_limits<double>::infinity();
                for (const Cpx& p : c1)
                    min_abs = std::min(min_abs, std::abs(p));
                for (const Cpx& p : c2)
                    min_abs = std::min(min_abs, std::abs(p));
                o.e_delta = tails_ok && min_abs >= opts.delta * eps;
            }
        });
        field_stream += replicas;

        NonIntersectRow row;
        row.eps = eps;
        for (const Outcome& o : outs) {
            if (!o.both_reached)
                continue;
            ++row.n;
            if (o.non_intersect)
                ++row.non_intersecting;
            if (o.e_delta)
                ++row.e_delta;
        }
        if (row.n == 0)
            throw std::runtime_error("no replica produced two complete flow lines");
        row.frequency = static_cast<double>(row.non_intersecting) / row.n;
        row.stderr_ = std::sqrt(std::max(row.frequency * (1.0 - row.frequency), 1e-12) / row.n);
        res.rows.push_back(row);
    }

    std::size_t largest_idx = 0;
    for (std::size_t i = 1; i < res.rows.size(); ++i)
        if (res.rows[i].eps > res.rows[largest_idx].eps)
            largest_idx = i;
    if (res.rows[largest_idx].non_intersecting < static_cast<std::size_t>(opts.min_survivors))
        throw std::runtime_error("insufficient survivors at the largest eps");

    std::vector<double> xs, ys;
    for (const auto& row : res.rows) {
        if (row.frequency > 0.0) {
            xs.push_back(row.eps);
            ys.push_back(row.frequency);
        }
    }
    res.fit = fit_loglog(xs, ys);
    return res;
}

} // namespace ig
