#include "ig/flowlines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "ig/rng.hpp"

namespace ig {

namespace {

// revisit counter keyed by grid cell; consecutive steps inside one cell count
// once
class TrapDetector {
public:
    TrapDetector(const GridGeometry& geom, int max_revisits)
        : geom_(geom), max_revisits_(max_revisits) {}

    bool visit(Cpx p) {
        long ci = static_cast<long>(std::floor((std::real(p) - geom_.x0) / geom_.spacing));
        long cj = static_cast<long>(std::floor((std::imag(p) - geom_.y0) / geom_.spacing));
        long key = cj * (geom_.nx + 2) + ci;
        if (key == last_) return false;
        last_ = key;
        int& n = counts_[key];
        ++n;
        return n > max_revisits_;
    }

private:
    GridGeometry geom_;
    int max_revisits_;
    long last_ = std::numeric_limits<long>::min();
    std::unordered_map<long, int> counts_;
};

struct Stepper {
    const GffField& field;
    double chi;
    double step;
    FlowLineOptions opts;
    TracedPath path;
    TrapDetector trap;

    Stepper(const GffField& f, Cpx start, double chi_, double step_, const FlowLineOptions& o)
        : field(f), chi(chi_), step(step_), opts(o), trap(f.geometry(), 4) {
        if (chi == 0.0)
            throw std::domain_error("flow lines need chi != 0 (kappa != 4)");
        if (!(step > 0.0))
            throw std::invalid_argument("step must be positive");
        if (!f.contains(std::real(start), std::imag(start), 0.0))
            throw std::domain_error("start outside the field");
        path.pts.push_back(start);
    }

    // returns false when the path should stop
    bool advance(double theta) {
        Cpx p = path.pts.back();
        double a = field.evaluate(p) / chi + theta;
        Cpx q = p + step * Cpx(std::cos(a), std::sin(a));
        double y0 = field.geometry().y0;
        if (opts.reflect_bottom && std::imag(q) < y0)
            q = Cpx(std::real(q), 2.0 * y0 - std::imag(q));
        if (!field.contains(std::real(q), std::imag(q), 0.0)) {
            // boundary contact: keep the exit point and stop
            path.pts.push_back(q);
            path.end = PathEnd::Boundary;
            return false;
        }
        path.pts.push_back(q);
        if (trap.visit(q)) {
            path.end = PathEnd::SelfTrap;
            return false;
        }
        return true;
    }
};

} // namespace

TracedPath trace_flow_line(const GffField& field, Cpx start, double chi, double theta0,
                           double step, int max_steps, const FlowLineOptions& opts) {
    AngleSchedule one = {{theta0, step * static_cast<double>(max_steps)}};
    return angle_varying_flow_line(field, start, chi, one, step, opts);
}

TracedPath angle_varying_flow_line(const GffField& field, Cpx start, double chi,
                                   const AngleSchedule& schedule, double step,
                                   const FlowLineOptions& opts) {
    if (schedule.empty())
        throw std::invalid_argument("schedule must have at least one piece");
    Stepper s(field, start, chi, step, opts);
    for (const auto& piece : schedule) {
        if (!(piece.duration > 0.0))
            throw std::invalid_argument("schedule durations must be positive");
        long n = std::lround(std::ceil(piece.duration / step));
        for (long k = 0; k < n; ++k) {
            if (!s.advance(piece.angle))
                return std::move(s.path);
        }
    }
    s.path.end = PathEnd::Budget;
    return std::move(s.path);
}

PointCloud light_cone(const GffField& field, Cpx start, double chi, double theta, int n_paths,
                      int max_changes, std::uint64_t seed, const LightConeOptions& opts) {
    if (!(theta >= 0.0 && theta <= M_PI))
        throw std::domain_error("theta must lie in [0, pi]");
    if (n_paths < 1 || max_changes < 1)
        throw std::invalid_argument("need n_paths >= 1 and max_changes >= 1");
    const GridGeometry& g = field.geometry();
    double step = opts.step > 0.0 ? opts.step : 0.3 * g.spacing;
    double diag = std::hypot(g.x_max() - g.x0, g.y_max() - g.y0);
    double mean_dur = opts.mean_duration > 0.0 ? opts.mean_duration : 0.25 * diag;
    double budget = step * static_cast<double>(opts.max_steps);

    PointCloud cloud;
    cloud.source = CloudSource::LightCone;
    for (int p = 0; p < n_paths; ++p) {
        Rng rng = Rng::for_replica(seed, static_cast<std::uint64_t>(p));
        AngleSchedule sched;
        double used = 0.0;
        if (theta == 0.0 || p == 0) {
            // the constant zero-angle schedule is admissible for every theta
            sched.push_back({0.0, budget});
        } else if (p % 2 == 0) {
            for (int c = 0; c < max_changes && used < budget; ++c) {
                double angle = (rng.uniform() - 0.5) * theta;
                double dur = std::min(mean_dur * rng.exponential() + step, budget - used);
                sched.push_back({angle, dur});
                used += dur;
            }
        } else {
            // extreme alternation between the cone edges; random phase and
            // leg lengths so different paths sweep different corridors
            double sign = (p % 4 < 2) ? 1.0 : -1.0;
            for (int c = 0; c < max_changes && used < budget; ++c) {
                double dur = std::min(0.5 * mean_dur * rng.exponential() + step, budget - used);
                sched.push_back({sign * theta / 2.0, dur});
                sign = -sign;
                used += dur;
            }
        }
        FlowLineOptions fopts;
        fopts.reflect_bottom = opts.reflect_bottom;
        TracedPath path = angle_varying_flow_line(field, start, chi, sched, step, fopts);
        cloud.append(path.pts);
    }
    return cloud;
}

PointCloud fan(const GffField& field, Cpx start, double chi, double theta, int n_angles,
               double step, int max_steps) {
    if (!(theta >= 0.0 && theta <= M_PI))
        throw std::domain_error("theta must lie in [0, pi]");
    if (n_angles < 1)
        throw std::invalid_argument("need n_angles >= 1");
    PointCloud cloud;
    cloud.source = CloudSource::Fan;
    for (int k = 0; k < n_angles; ++k) {
        double a = (n_angles == 1) ? 0.0
                                   : -theta / 2.0 + theta * static_cast<double>(k) / (n_angles - 1);
        TracedPath path = trace_flow_line(field, start, chi, a, step, max_steps);
        cloud.append(path.pts);
    }
    return cloud;
}

} // namespace ig
