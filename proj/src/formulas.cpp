#include "ig/formulas.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ig {

namespace {

void require_kappa(double kappa) {
    if (!(kappa > 0.0 && kappa < 4.0))
        throw std::domain_error("kappa must lie in (0,4), got " + std::to_string(kappa));
}

} // namespace

IgConstants ig_constants(double kappa) {
    require_kappa(kappa);
    IgConstants c;
    c.kappa = kappa;
    c.kappa_prime = 16.0 / kappa;
    double s = std::sqrt(kappa);
    c.chi = 2.0 / s - s / 2.0;
    c.lambda = M_PI / s;
    c.lambda_prime = M_PI / std::sqrt(c.kappa_prime);
    return c;
}

double lightcone_dimension(double kappa, double theta) {
    require_kappa(kappa);
    if (!(theta >= 0.0 && theta <= M_PI))
        throw std::domain_error("theta must lie in [0,pi]");
    double tb = theta / M_PI;
    return (kappa * (1.0 - tb) + 4.0 * tb) * (kappa + 8.0 + (kappa - 4.0) * tb) / (8.0 * kappa);
}

double critical_angle(double kappa) {
    require_kappa(kappa);
    return M_PI * kappa / (4.0 - kappa);
}

double sle_rho_dimension(double kappa, double rho) {
    require_kappa(kappa);
    // closed at the lower edge: the formula extends continuously to the
    // trunk-plus-loops value there
    double lo = std::max(kappa / 2.0 - 4.0, -2.0 - kappa / 2.0);
    if (!(rho >= lo && rho < -2.0))
        throw std::domain_error("rho outside the light-cone phase; see classify_phase");
    return (kappa - 2.0 * (2.0 + rho)) * (kappa + 2.0 * (6.0 + rho)) / (8.0 * kappa);
}

double theta_of_rho(double kappa, double rho) {
    require_kappa(kappa);
    return M_PI * (rho + 2.0) / (kappa / 2.0 - 2.0);
}

double bessel_dimension(double kappa, double rho) {
    if (!(kappa > 0.0))
        throw std::domain_error("kappa must be positive");
    return 1.0 + 2.0 * (rho + 2.0) / kappa;
}

const char* phase_name(Phase p) {
    switch (p) {
    case Phase::NotDefined: return "not-defined";
    case Phase::TrunkPlusLoops: return "trunk-plus-loops";
    case Phase::LightCone: return "light-cone";
    case Phase::BoundaryTracing: return "boundary-tracing";
    case Phase::BoundaryHitting: return "boundary-hitting";
    case Phase::BoundaryAvoiding: return "boundary-avoiding";
    }
    return "?";
}

PhaseRecord classify_phase(double kappa, double rho) {
    require_kappa(kappa);
    PhaseRecord rec;
    rec.kappa = kappa;
    rec.rho = rho;
    rec.bessel_dim = bessel_dimension(kappa, rho);

    double lower = -2.0 - kappa / 2.0;   // delta = 0
    double trunk_hi = kappa / 2.0 - 4.0; // delta = 2 - 4/kappa
    double avoid_lo = kappa / 2.0 - 2.0; // delta = 2

    if (rho <= lower) {
        rec.phase = Phase::NotDefined;
    } else if (kappa > 2.0 && rho <= trunk_hi) {
        rec.phase = Phase::TrunkPlusLoops;
        rec.range_dim = capped_dimension(1.0 + 2.0 / kappa);
        rec.simple = false;
    } else if (rho < -2.0) {
        // For kappa <= 2 this single light-cone row spans all of (lower, -2).
        rec.phase = Phase::LightCone;
        rec.range_dim = capped_dimension(sle_rho_dimension(kappa, rho));
        rec.simple = false;
    } else if (rho == -2.0) {
        rec.phase = Phase::BoundaryTracing;
        rec.range_dim = 1.0;
        rec.simple = true;
    } else if (rho < avoid_lo) {
        rec.phase = Phase::BoundaryHitting;
        rec.range_dim = capped_dimension(1.0 + kappa / 8.0);
        rec.simple = true;
    } else {
        rec.phase = Phase::BoundaryAvoiding;
        rec.range_dim = capped_dimension(1.0 + kappa / 8.0);
        rec.simple = true;
    }
    return rec;
}

NuXi nu_xi(double kappa, double r) {
    if (!(kappa > 0.0))
        throw std::domain_error("kappa must be positive");
    return {r * r / 4.0 * kappa + r * (1.0 - kappa / 4.0), r * r / 8.0 * kappa};
}

double nonintersection_alpha(double kappa, double theta1, double theta2, double a, double b) {
    IgConstants c = ig_constants(kappa);
    double gap = theta1 - theta2;
    if (!(gap > -M_PI && gap < 2.0 * c.lambda_prime / c.chi))
        throw std::domain_error("angle gap outside the hitting range (theta2-pi, theta2+2lambda'/chi)");
    double rho = gap * c.chi / c.lambda - 2.0;
    return (kappa - 4.0 - 2.0 * rho) * ((b - a) / c.lambda - rho) / (2.0 * kappa);
}

ExponentParams canonical_r_and_beta(double kappa, double theta) {
    require_kappa(kappa);
    if (!(theta >= 0.0 && theta <= M_PI))
        throw std::domain_error("theta must lie in [0,pi]");
    double kp = 16.0 / kappa;
    ExponentParams p;
    p.theta_bar = theta / M_PI;
    p.r = -(4.0 + 4.0 * p.theta_bar) / kp + p.theta_bar;
    NuXi e = nu_xi(kp, p.r);
    p.nu = e.nu;
    p.xi = e.xi;
    p.alpha = p.nu + p.r;
    p.beta = p.nu - p.xi;
    return p;
}

double lightcone_hitting_exponent(double kappa, double theta) {
    return 2.0 - lightcone_dimension(kappa, theta);
}

FlowBoundaryValues flowline_boundary_data(const std::vector<double>& weights_left,
                                          const std::vector<double>& weights_right,
                                          double angle, double chi, double lambda) {
    FlowBoundaryValues out;
    double shift = angle * chi;
    double sum = 0.0;
    out.left.push_back(-lambda - shift);
    for (double w : weights_left) {
        sum += w;
        out.left.push_back(-lambda * (1.0 + sum) - shift);
    }
    sum = 0.0;
    out.right.push_back(lambda - shift);
    for (double w : weights_right) {
        sum += w;
        out.right.push_back(lambda * (1.0 + sum) - shift);
    }
    return out;
}

FlowBoundaryValues counterflow_boundary_data(const std::vector<double>& weights_left,
                                             const std::vector<double>& weights_right,
                                             double lambda_prime) {
    FlowBoundaryValues out;
    double sum = 0.0;
    out.left.push_back(lambda_prime);
    for (double w : weights_left) {
        sum += w;
        out.left.push_back(lambda_prime * (1.0 + sum));
    }
    sum = 0.0;
    out.right.push_back(-lambda_prime);
    for (double w : weights_right) {
        sum += w;
        out.right.push_back(-lambda_prime * (1.0 + sum));
    }
    return out;
}

InteractionRule interaction_rule(double theta1, double theta2, double kappa) {
    IgConstants c = ig_constants(kappa);
    double gap = theta1 - theta2;
    double touch = 2.0 * c.lambda_prime / c.chi; // = pi*kappa/(4-kappa)
    if (gap == 0.0)
        return InteractionRule::Merges;
    if (gap >= touch)
        return InteractionRule::StaysLeftNoTouch;
    if (gap > 0.0)
        return InteractionRule::StaysLeftBounces;
    if (gap > -M_PI)
        return InteractionRule::Crosses;
    throw std::domain_error("angle gap <= -pi is outside the classified range");
}

} // namespace ig
