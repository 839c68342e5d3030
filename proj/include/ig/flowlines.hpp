#pragma once

#include <cstdint>
#include <vector>

#include "ig/geometry.hpp"
#include "ig/gff.hpp"

namespace ig {

enum class PathEnd { Boundary, Budget, SelfTrap };

struct TracedPath {
    std::vector<Cpx> pts;
    PathEnd end = PathEnd::Budget;
};

struct FlowLineOptions {
    // bounce off the bottom edge (the simulated real line) instead of
    // stopping there; boundary-hitting flow lines touch R and continue
    bool reflect_bottom = false;
};

/// Euler integration of eta' = e^{i(h(eta)/chi + theta0)} on the interpolated
/// field.  Stops on boundary contact, step budget, or when a grid cell is
/// revisited too many times (self-trap: discrete fields create vortices the
/// continuum flow lacks; the path is kept and flagged).
TracedPath trace_flow_line(const GffField& field, Cpx start, double chi, double theta0,
                           double step, int max_steps, const FlowLineOptions& opts = {});

struct AnglePiece {
    double angle;
    double duration; // arclength budget of the piece, > 0
};
using AngleSchedule = std::vector<AnglePiece>;

TracedPath angle_varying_flow_line(const GffField& field, Cpx start, double chi,
                                   const AngleSchedule& schedule, double step,
                                   const FlowLineOptions& opts = {});

struct LightConeOptions {
    double step = 0.0; // 0: use 0.3 * grid spacing
    int max_steps = 20000;
    double mean_duration = 0.0; // 0: quarter of the domain diagonal
    bool reflect_bottom = false;
};

/// Inner approximation of the light cone L(theta): union of angle-varying
/// flow lines from `start`, half with uniform random angles in
/// [-theta/2, theta/2] and exponential durations, half alternating between
/// the extreme angles.
PointCloud light_cone(const GffField& field, Cpx start, double chi, double theta, int n_paths,
                      int max_changes, std::uint64_t seed, const LightConeOptions& opts = {});

/// Fan F(theta): union of fixed-angle flow lines at n_angles equally spaced
/// angles in [-theta/2, theta/2] (a single angle sits at the center).
PointCloud fan(const GffField& field, Cpx start, double chi, double theta, int n_angles,
               double step, int max_steps);

} // namespace ig
