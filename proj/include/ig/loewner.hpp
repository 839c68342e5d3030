#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ig/geometry.hpp"

namespace ig {

struct LoewnerStep {
    double dw; // driving increment applied at the end of the step
    double dt; // half-plane-capacity duration, > 0
};

struct swallowed_error : std::runtime_error {
    std::size_t step;
    explicit swallowed_error(std::size_t s)
        : std::runtime_error("point swallowed during step " + std::to_string(s)), step(s) {}
};

namespace detail {

// Elementary vertical-slit maps in coordinates centered at the slit base.
// The branch follows the sign of Re w so the upper half plane maps to itself.
inline Cpx slit_forward(Cpx w, double four_dt) {
    Cpx r = std::sqrt(w * w + four_dt);
    if (std::real(w) < 0.0)
        r = -r;
    if (std::imag(r) < 0.0)
        r = std::conj(r); // rounding guard near the axis
    return r;
}

inline Cpx slit_inverse(Cpx w, double four_dt) {
    Cpx r = std::sqrt(w * w - four_dt);
    if (std::real(w) < 0.0)
        r = -r;
    if (std::imag(r) < 0.0)
        r = std::conj(r);
    return r;
}

} // namespace detail

// State of a point carried by the forward Loewner flow.
struct PointFlow {
    Cpx z;                  // g_t(z), or last value before swallowing
    double log_deriv = 0.0; // log |g_t'(z)|
    long swallowed_step = -1;
    bool swallowed() const { return swallowed_step >= 0; }
};

// Diagnostics of Eq-style processes for the centered map f_t = g_t - W_t:
// Z = X+iY, Delta = |g_t'(z)|, Upsilon = Y/Delta, Theta = arg Z, S = sin Theta.
struct Diagnostics {
    Cpx z;
    double delta;
    double upsilon;
    double theta;
    double s;
};

struct TraceOptions {
    bool midpoints = false; // add tip positions at half steps
    int threads = 1;        // tips are independent; output order is fixed
};

// Discretized chordal Loewner chain: the driving function is held constant on
// each step, so every step is an exact vertical-slit map
//   g(z) = c + sqrt((z-c)^2 + 4 dt),  c = driving value during the step,
// and the composed chain satisfies the hydrodynamic normalization exactly.
class LoewnerChain {
public:
    explicit LoewnerChain(std::vector<LoewnerStep> steps);

    static constexpr double kSwallowGuard = 1e-9;

    std::size_t size() const { return steps_.size(); }
    double total_capacity() const { return time_.back(); }
    const std::vector<LoewnerStep>& steps() const { return steps_; }

    // cumulative capacity at the end of step k (time_at(0) = 0)
    double time_at(std::size_t k) const { return time_[k]; }
    // driving value after the step-k increment (driving_at(0) = 0)
    double driving_at(std::size_t k) const { return driving_[k]; }
    // driving value held during step k (1-based): the value at the step start
    double slit_position(std::size_t k) const { return driving_[k - 1]; }

    // Forward flow of z up to capacity time t (with |g'| accumulated).
    // allow_boundary keeps integrating a point that reaches the real axis
    // instead of flagging it; used for tip-consistency checks.
    PointFlow evolve_point(Cpx z, double t, bool allow_boundary = false) const;

    // g_t(z); throws swallowed_error if z enters the hull before t.
    Cpx forward_map(Cpx z, double t) const;

    // |g_t'(z)|
    double derivative(Cpx z, double t) const;

    Diagnostics diagnostics(Cpx z, double t) const;

    // Tip positions eta(t_k) by backward composition of inverse slit maps.
    Polyline trace(const TraceOptions& opts = {}) const;

    // Driving value at query time t (value held during the step containing t,
    // jumping to the post-step value at step ends).
    double driving_at_time(double t) const;

private:
    std::vector<LoewnerStep> steps_;
    std::vector<double> time_;    // size N+1
    std::vector<double> driving_; // size N+1

    Cpx tip_at_step(std::size_t k, double partial_dt) const;
};

// First capacity time at which the traced polyline passes within eps of z,
// with linear interpolation inside segments.  nullopt when the chain ends
// before approaching.
std::optional<double> hitting_time(const Polyline& trace, Cpx z, double eps);

// Driving function recovered from a curve in the upper half plane by the
// inverse zipper: each curve point is mapped down by the composed slit maps
// and zipped with one exact vertical-slit step.  w[k] is the slit base
// position of step k, t[k] the cumulative capacity.
struct ExtractedDriving {
    std::vector<double> t;
    std::vector<double> w;

    double quadratic_variation() const;
    double capacity() const { return t.empty() ? 0.0 : t.back(); }
};

ExtractedDriving extract_driving(const std::vector<Cpx>& curve);

// Distance from z to the union of the trace and the real axis.
double distance_to_trace(const Polyline& trace, Cpx z);

} // namespace ig
