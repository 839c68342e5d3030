#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "ig/fit.hpp"
#include "ig/geometry.hpp"

namespace ig {

/// Box-counting dimension estimate: N(r) = number of occupied boxes at mesh
/// r, slope of log N against log(1/r).  Throws when the cloud is empty,
/// fewer than two scales are given, or all counts coincide.
ExponentFit box_count(const PointCloud& cloud, const std::vector<double>& scales);

/// Box occupancy at a single mesh size.
std::size_t box_occupancy(const PointCloud& cloud, double scale);

struct ScaleRow {
    double scale = 0.0;   // eps
    double value = 0.0;   // statistic
    double stderr_ = 0.0;
    std::size_t hits = 0; // contributing replicas
    std::size_t n = 0;
};

struct DerivMomentOptions {
    double dt = 2e-4;
    double max_capacity = 0.0; // 0: R^2/2 (capacity bound for hulls inside B_R)
    int min_hits = 30;
    int threads = 1;
};

struct DerivMomentResult {
    ExponentFit fit;             // slope of log E[...] vs log eps
    double expected_slope = 0.0; // -xi(r) - r
    std::vector<ScaleRow> rows;
};

/// Monte Carlo check of the derivative-moment scaling
///   E[ |g'_{tau_eps}(z)|^{nu+r} 1{tau_eps <= sigma_R} ] ~ eps^{-xi-r}
/// for chordal SLE_kappa, with tau_eps the first time the trace enters
/// B(z,eps) and sigma_R the escape time to radius R (detected via boundary
/// anchor points, so R is honored up to a constant-level tolerance).
DerivMomentResult derivative_moment_scaling(double kappa, double r, Cpx z,
                                            const std::vector<double>& eps_list, double R,
                                            int replicas, std::uint64_t seed,
                                            const DerivMomentOptions& opts = {});

struct NonIntersectOptions {
    double delta = 0.25; // E_delta auxiliary event parameters
    double step_factor = 0.3;
    int max_steps = 12000;
    int min_survivors = 30;
    int threads = 1;
    // 0: the coupling normalization 2*pi (graph-Laplacian DGFF with
    // covariance -ln|x-y| at unit scale)
    double fluctuation_scale = 0.0;
};

struct NonIntersectRow {
    double eps = 0.0;
    std::size_t n = 0;
    std::size_t non_intersecting = 0; // min pairwise distance > step
    std::size_t e_delta = 0;          // also tail separation and small-disk avoidance
    double frequency = 0.0;
    double stderr_ = 0.0;
};

struct NonIntersectResult {
    ExponentFit fit;             // slope of log frequency vs log eps
    double expected_alpha = 0.0; // nonintersection_alpha(kappa, theta1, theta2, a, b)
    std::vector<NonIntersectRow> rows;
};

/// Flow-line non-intersection experiment: for each eps, sample GFFs with the
/// two-seed boundary data (a | lambda - theta1*chi | -lambda - theta2*chi | b,
/// breaks at -eps/2, 0, eps/2), trace the two flow lines to the unit circle,
/// and record the fraction of replicas whose paths stay farther apart than the
/// integration step.
NonIntersectResult nonintersection_experiment(double kappa, double theta1, double theta2,
                                              double a, double b,
                                              const std::vector<double>& eps_list, int grid,
                                              int replicas, std::uint64_t seed,
                                              const NonIntersectOptions& opts = {});

} // namespace ig
