#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ig/fit.hpp"
#include "ig/loewner.hpp"

namespace ig {

/// One-point local martingale of the derivative estimate for an SLE_kappa
/// chain,
///   M_t = S_t^{-r} Upsilon_t^{xi+r} Delta_t^{nu+r},
/// evaluated at capacity time t for the point z.
double one_point_martingale(const LoewnerChain& chain, double kappa, Cpx z, double r, double t);

/// Both algebraic routes to M_t: the S/Upsilon/Delta product above and the
/// expanded form |Z|^r Y^xi Delta^{nu-xi}.  They agree identically; computing
/// them separately guards the diagnostics plumbing.
std::array<double, 2> one_point_martingale_forms(const LoewnerChain& chain, double kappa, Cpx z,
                                                 double r, double t);

// Five marked points of the two-path martingale in the single-growth setting
// (eta_2 frozen at time 0).
struct MarkedPointState {
    std::array<double, 5> v{};   // V^1 <= ... <= V^5
    std::array<double, 5> rho{}; // boundary height jumps / lambda
    double rho3_tilde = 0.0;     // kappa - 4 - rho3
};

/// Fig-8 jump weights for angles theta1, theta2 and outer boundary values a, b:
/// rho1 = (-theta1 chi - a)/lambda - 1, rho2 = rho4 = 2,
/// rho3 = (theta1-theta2) chi/lambda - 2, rho5 = (b + theta2 chi)/lambda - 1.
MarkedPointState marked_point_weights(double kappa, double theta1, double theta2, double a,
                                      double b);

/// Sum of the exponents of M_{s,t}: ((rho3_tilde - rho3)/(2 kappa)) *
/// sum_{j != 3} rho_j; equals nonintersection_alpha(kappa, theta1, theta2, a, b).
double exponent_sum(double kappa, double theta1, double theta2, double a, double b);

/// Product M = prod_{j != 3} |v_j - v_3|^{(rho3_tilde - rho3) rho_j / (2 kappa)}.
double two_path_product(double kappa, const MarkedPointState& st);

struct TwoPathRunOptions {
    double dt = 1e-4;
    double guard = 1e-4; // stop when x2's image is this close to the driving
};

struct TwoPathRun {
    std::vector<double> s;      // checkpoint capacities actually reached
    std::vector<double> m;      // M_{s,0} at those capacities
    bool x2_swallowed = false;
};

/// Single-growth two-path martingale: eta_1 is sampled as the
/// SLE_kappa(rho1; rho3, rho4+rho5) process encoded by the two-seed boundary
/// data, grown to the requested capacities; eta_2 stays at time 0, so
/// V^4 = V^5 = image of x2.  Throws if eta_1 swallows x2 before the last
/// checkpoint (configuration error).
TwoPathRun two_path_martingale_run(double kappa, double theta1, double theta2, double a, double b,
                                   double x1, double x2, const std::vector<double>& checkpoints,
                                   std::uint64_t seed, const TwoPathRunOptions& opts = {});

/// Convenience wrapper: M_{s,0} for a single capacity s.
double two_path_martingale_single_growth(double kappa, double theta1, double theta2, double a,
                                         double b, double x1, double x2, double s,
                                         std::uint64_t seed, const TwoPathRunOptions& opts = {});

struct MartingaleCheck {
    std::vector<double> t;        // checkpoints
    std::vector<MeanStderr> mean; // E[M at checkpoint] with stderr
    double max_drift_sigmas = 0.0;
};

/// Monte Carlo constancy check of E[M_{t ^ tau}] for the one-point
/// martingale over SLE_kappa replicas; tau localizes at a conformal-radius
/// guard around z.
MartingaleCheck one_point_constancy_check(double kappa, double r, Cpx z,
                                          const std::vector<double>& checkpoints, int replicas,
                                          double dt, std::uint64_t seed, int threads = 1);

/// Same for the two-path single-growth martingale in s.
MartingaleCheck two_path_constancy_check(double kappa, double theta1, double theta2, double a,
                                         double b, double x1, double x2,
                                         const std::vector<double>& checkpoints, int replicas,
                                         double dt, std::uint64_t seed, int threads = 1);

} // namespace ig
