#include "ig/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

namespace ig {

using detail::slit_forward;
using detail::slit_inverse;

LoewnerChain::LoewnerChain(std::vector<LoewnerStep> steps) : steps_(std::move(steps)) {
    if (steps_.empty())
        throw std::invalid_argument("LoewnerChain needs at least one step");
    time_.reserve(steps_.size() + 1);
    driving_.reserve(steps_.size() + 1);
    time_.push_back(0.0);
    driving_.push_back(0.0);
    for (const auto& s : steps_) {
        if (!(s.dt > 0.0))
            throw std::invalid_argument("step durations must be positive");
        time_.push_back(time_.back() + s.dt);
        driving_.push_back(driving_.back() + s.dw);
    }
}

double LoewnerChain::driving_at_time(double t) const {
    if (t <= 0.0)
        return 0.0;
    auto it = std::lower_bound(time_.begin(), time_.end(), t);
    std::size_t k = static_cast<std::size_t>(it - time_.begin());
    if (k >= time_.size())
        return driving_.back();
    // t in (time_[k-1], time_[k]]: held value during step k, jump at the end
    return (t == time_[k]) ? driving_[k] : driving_[k - 1];
}

PointFlow LoewnerChain::evolve_point(Cpx z, double t, bool allow_boundary) const {
    if (std::imag(z) < 0.0)
        throw std::invalid_argument("evolve_point requires Im z >= 0");
    if (t > total_capacity() + 1e-12)
        throw std::invalid_argument("t exceeds total capacity");
    PointFlow st;
    st.z = z;
    double elapsed = 0.0;
    for (std::size_t k = 1; k <= steps_.size() && elapsed < t; ++k) {
        double dt = std::min(steps_[k - 1].dt, t - elapsed);
        double c = driving_[k - 1];
        Cpx w = st.z - c;
        Cpx w2 = slit_forward(w, 4.0 * dt);
        st.log_deriv += 0.5 * (std::log(std::norm(w)) - std::log(std::norm(w2)));
        st.z = c + w2;
        elapsed += dt;
        if (std::imag(w2) < kSwallowGuard && !allow_boundary) {
            st.swallowed_step = static_cast<long>(k);
            return st;
        }
    }
    return st;
}

Cpx LoewnerChain::forward_map(Cpx z, double t) const {
    PointFlow st = evolve_point(z, t);
    if (st.swallowed())
        throw swallowed_error(static_cast<std::size_t>(st.swallowed_step));
    return st.z;
}

double LoewnerChain::derivative(Cpx z, double t) const {
    PointFlow st = evolve_point(z, t);
    if (st.swallowed())
        throw swallowed_error(static_cast<std::size_t>(st.swallowed_step));
    return std::exp(st.log_deriv);
}

Diagnostics LoewnerChain::diagnostics(Cpx z, double t) const {
    PointFlow st = evolve_point(z, t);
    if (st.swallowed())
        throw swallowed_error(static_cast<std::size_t>(st.swallowed_step));
    Diagnostics d;
    d.z = st.z - driving_at_time(t);
    d.delta = std::exp(st.log_deriv);
    d.upsilon = std::imag(d.z) / d.delta;
    d.theta = std::arg(d.z);
    d.s = std::sin(d.theta);
    return d;
}

Cpx LoewnerChain::tip_at_step(std::size_t k, double partial_dt) const {
    // Tip of the step-k slit pulled back through steps k-1, ..., 1.
    Cpx p = Cpx(slit_position(k), 2.0 * std::sqrt(partial_dt));
    for (std::size_t j = k - 1; j >= 1; --j) {
        double c = driving_[j - 1];
        p = c + slit_inverse(p - c, 4.0 * steps_[j - 1].dt);
    }
    if (std::imag(p) < 0.0)
        p = std::conj(p);
    return p;
}

Polyline LoewnerChain::trace(const TraceOptions& opts) const {
    std::size_t n = steps_.size();
    struct Item {
        double t;
        std::size_t step;
        double partial;
    };
    std::vector<Item> items;
    items.reserve(opts.midpoints ? 2 * n : n);
    for (std::size_t k = 1; k <= n; ++k) {
        if (opts.midpoints)
            items.push_back({time_[k - 1] + 0.5 * steps_[k - 1].dt, k, 0.5 * steps_[k - 1].dt});
        items.push_back({time_[k], k, steps_[k - 1].dt});
    }

    Polyline out;
    out.t.resize(items.size());
    out.pts.resize(items.size());

    auto work = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            out.t[i] = items[i].t;
            out.pts[i] = tip_at_step(items[i].step, items[i].partial);
        }
    };
    int nthreads = std::max(1, opts.threads);
    if (nthreads == 1 || items.size() < 64) {
        work(0, items.size());
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (items.size() + nthreads - 1) / nthreads;
        for (int p = 0; p < nthreads; ++p) {
            std::size_t lo = p * chunk;
            std::size_t hi = std::min(items.size(), lo + chunk);
            if (lo < hi)
                pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool)
            th.join();
    }

    for (const Cpx& p : out.pts) {
        if (!std::isfinite(std::real(p)) || !std::isfinite(std::imag(p)))
            throw std::runtime_error("trace left the numerical domain");
    }
    return out;
}

std::optional<double> hitting_time(const Polyline& trace, Cpx z, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("eps must be positive");
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i == 0) {
            if (std::abs(trace.pts[0] - z) <= eps)
                return trace.t[0];
            continue;
        }
        Cpx a = trace.pts[i - 1];
        Cpx b = trace.pts[i];
        Cpx ab = b - a;
        double len2 = std::norm(ab);
        double s = len2 > 0.0 ? std::clamp((std::real(std::conj(ab) * (z - a))) / len2, 0.0, 1.0) : 0.0;
        if (std::abs(a + s * ab - z) <= eps) {
            // refine: earliest parameter along the segment within eps
            double lo = 0.0, hi = s;
            for (int it = 0; it < 40; ++it) {
                double mid = 0.5 * (lo + hi);
                if (std::abs(a + mid * ab - z) <= eps)
                    hi = mid;
                else
                    lo = mid;
            }
            return trace.t[i - 1] + hi * (trace.t[i] - trace.t[i - 1]);
        }
    }
    return std::nullopt;
}

double ExtractedDriving::quadratic_variation() const {
    double qv = 0.0;
    for (std::size_t k = 1; k < w.size(); ++k)
        qv += (w[k] - w[k - 1]) * (w[k] - w[k - 1]);
    return qv;
}

ExtractedDriving extract_driving(const std::vector<Cpx>& curve) {
    ExtractedDriving out;
    std::vector<double> base;    // slit positions of committed steps
    std::vector<double> four_dt; // slit capacities
    double t = 0.0;
    for (Cpx p : curve) {
        if (std::imag(p) <= 0.0)
            continue; // boundary points carry no capacity
        Cpx zeta = p;
        for (std::size_t j = 0; j < base.size(); ++j)
            zeta = base[j] + slit_forward(zeta - base[j], four_dt[j]);
        double y = std::imag(zeta);
        if (y <= 0.0)
            continue; // already absorbed by an earlier slit
        double c = std::real(zeta);
        base.push_back(c);
        four_dt.push_back(y * y);
        t += y * y / 4.0;
        out.t.push_back(t);
        out.w.push_back(c);
    }
    return out;
}

double distance_to_trace(const Polyline& trace, Cpx z) {
    double best = std::imag(z); // distance to the real axis
    for (std::size_t i = 1; i < trace.size(); ++i) {
        Cpx a = trace.pts[i - 1];
        Cpx b = trace.pts[i];
        Cpx ab = b - a;
        double len2 = std::norm(ab);
        double s = len2 > 0.0 ? std::clamp((std::real(std::conj(ab) * (z - a))) / len2, 0.0, 1.0) : 0.0;
        best = std::min(best, std::abs(a + s * ab - z));
    }
    if (!trace.empty())
        best = std::min(best, std::abs(trace.pts[0] - z));
    return best;
}

} // namespace ig
