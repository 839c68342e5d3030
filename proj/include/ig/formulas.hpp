#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

namespace ig {

// Closed-form layer: dimension/exponent formulas for SLE_kappa(rho) processes
// and GFF flow-line geometry, all pure functions of double precision inputs.
// kappa is restricted to (0,4) throughout; kappa' = 16/kappa is the dual
// parameter of the counterflow line.

struct IgConstants {
    double kappa;
    double kappa_prime; // 16/kappa
    double chi;         // 2/sqrt(kappa) - sqrt(kappa)/2
    double lambda;      // pi/sqrt(kappa)
    double lambda_prime; // pi/sqrt(kappa'), equals lambda - (pi/2)*chi
};

/// Coupling constants chi, lambda, lambda' for kappa in (0,4).
IgConstants ig_constants(double kappa);

/// Light cone dimension d(kappa, theta) for theta in [0, pi].  Returned
/// uncapped; callers that want the almost-sure Hausdorff value apply
/// capped_dimension.
double lightcone_dimension(double kappa, double theta);

/// min(d, 2): the dimension of a space-filling set saturates at 2.
inline double capped_dimension(double d) { return d < 2.0 ? d : 2.0; }

/// Opening angle at which the light cone becomes space filling,
/// theta_c = pi*kappa/(4-kappa).  Exceeds pi for kappa in (2,4).
double critical_angle(double kappa);

/// Range dimension of SLE_kappa(rho) in the light-cone phase
/// rho in ((kappa/2-4) v (-2-kappa/2), -2).
double sle_rho_dimension(double kappa, double rho);

/// Angle theta_rho = pi*(rho+2)/(kappa/2-2) identifying the light cone whose
/// range agrees in law with SLE_kappa(rho).
double theta_of_rho(double kappa, double rho);

/// Dimension delta(kappa, rho) = 1 + 2(rho+2)/kappa of the Bessel process
/// driving the gap V - W.
double bessel_dimension(double kappa, double rho);

enum class Phase {
    NotDefined,
    TrunkPlusLoops,
    LightCone,
    BoundaryTracing,
    BoundaryHitting,
    BoundaryAvoiding,
};

const char* phase_name(Phase p);

struct PhaseRecord {
    double kappa = 0.0;
    double rho = 0.0;
    double bessel_dim = 0.0;
    Phase phase = Phase::NotDefined;
    std::optional<double> range_dim; // capped at 2
    std::optional<bool> simple;
};

/// Phase classification of SLE_kappa(rho) with a single boundary force point.
/// Boundary rho values belong to the row whose half-open interval contains
/// them.  For kappa <= 2 the trunk-plus-loops and light-cone rows merge into a
/// single light-cone phase on (-2-kappa/2, -2).
PhaseRecord classify_phase(double kappa, double rho);

struct NuXi {
    double nu; // (r^2/4)*kappa + r*(1 - kappa/4)
    double xi; // (r^2/8)*kappa
};

/// Derivative-moment exponents nu(r), xi(r) for a chordal SLE_kappa chain.
NuXi nu_xi(double kappa, double r);

/// Non-intersection exponent alpha for two flow lines with angles theta1,
/// theta2 started at -eps/2, +eps/2 in a field with boundary value a left of
/// the seeds and b right of them:
///   alpha = (1/2kappa)(kappa-4-2 rho)((b-a)/lambda - rho),
///   rho   = (theta1-theta2) chi / lambda - 2.
/// Requires the hitting condition theta1 in (theta2 - pi, theta2 + 2 lambda'/chi).
double nonintersection_alpha(double kappa, double theta1, double theta2, double a, double b);

struct ExponentParams {
    double r;         // canonical moment parameter, r = -(4+4*theta_bar)/kappa' + theta_bar
    double nu;        // nu(r) of the kappa' chain
    double xi;        // xi(r) of the kappa' chain
    double alpha;     // nu + r; equals nonintersection_alpha at the canonical parameters
    double beta;      // nu - xi; satisfies 2 - beta = d(kappa, theta)
    double theta_bar; // theta/pi
};

/// Canonical exponent bookkeeping for the one-point estimate of the light
/// cone: the counterflow line is an SLE_{kappa'} chain, so nu and xi are
/// evaluated at kappa'.  The identities nu+r = alpha and 2-(nu-xi) = d hold
/// exactly.
ExponentParams canonical_r_and_beta(double kappa, double theta);

/// One-point hitting exponent of the light cone: probability that L(theta)
/// reaches an eps-ball decays like eps^alpha with alpha = 2 - d(kappa,theta).
double lightcone_hitting_exponent(double kappa, double theta);

// Piecewise-constant boundary values for the flow-line/counterflow-line
// coupling.  values_left[j] applies on (x_{j+1,L}, x_{j,L}] going away from
// the seed (j = 0 is the interval adjacent to the seed), values_right[j]
// on (x_{j,R}, x_{j+1,R}].
struct FlowBoundaryValues {
    std::vector<double> left;
    std::vector<double> right;
};

/// Boundary data of the field coupled with an angle-theta flow line:
/// -lambda(1 + sum_{i<=j} rho_{i,L}) - theta*chi on the j-th left interval,
/// +lambda(1 + sum_{i<=j} rho_{i,R}) - theta*chi on the right.
FlowBoundaryValues flowline_boundary_data(const std::vector<double>& weights_left,
                                          const std::vector<double>& weights_right,
                                          double angle, double chi, double lambda);

/// Counterflow-line variant: +lambda'(1 + sum rho'_L) on the left intervals,
/// -lambda'(1 + sum rho'_R) on the right.
FlowBoundaryValues counterflow_boundary_data(const std::vector<double>& weights_left,
                                             const std::vector<double>& weights_right,
                                             double lambda_prime);

enum class InteractionRule {
    StaysLeftNoTouch,
    StaysLeftBounces,
    Merges,
    Crosses,
};

/// How the angle-theta1 flow line started weakly left of the angle-theta2 one
/// interacts with it.  Classified for theta1 > theta2 - pi; the threshold
/// angle gap for touching is 2 lambda'/chi = pi*kappa/(4-kappa).
InteractionRule interaction_rule(double theta1, double theta2, double kappa);

} // namespace ig
