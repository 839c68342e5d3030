#include <doctest.h>

#include <cmath>

#include "ig/formulas.hpp"

using namespace ig;
using doctest::Approx;

TEST_CASE("coupling constants") {
    IgConstants c = ig_constants(1.0);
    CHECK(c.chi == Approx(1.5).epsilon(1e-15));
    CHECK(c.lambda == Approx(M_PI).epsilon(1e-15));
    CHECK(c.kappa_prime == Approx(16.0).epsilon(1e-15));

    IgConstants c2 = ig_constants(2.0);
    CHECK(c2.lambda_prime == Approx(M_PI / std::sqrt(8.0)).epsilon(1e-15));

    for (double kappa : {0.3, 0.9, 1.7, 2.5, 3.3, 3.9}) {
        IgConstants k = ig_constants(kappa);
        CHECK(k.lambda_prime == Approx(k.lambda - M_PI / 2.0 * k.chi).epsilon(1e-13));
        CHECK(k.kappa * k.kappa_prime == Approx(16.0).epsilon(1e-15));
    }

    CHECK_THROWS_AS(ig_constants(0.0), std::domain_error);
    CHECK_THROWS_AS(ig_constants(4.0), std::domain_error);
    CHECK_THROWS_AS(ig_constants(-1.0), std::domain_error);
    CHECK_THROWS_AS(ig_constants(5.0), std::domain_error);
}

TEST_CASE("light cone dimension endpoints and interior value") {
    for (double kappa : {0.5, 1.0, 2.0, 3.0}) {
        CHECK(lightcone_dimension(kappa, 0.0) == Approx(1.0 + kappa / 8.0).epsilon(1e-12));
        CHECK(lightcone_dimension(kappa, M_PI) == Approx(1.0 + 2.0 / kappa).epsilon(1e-12));
    }
    CHECK(lightcone_dimension(2.0, M_PI / 2.0) == Approx(27.0 / 16.0).epsilon(1e-13));
    CHECK_THROWS_AS(lightcone_dimension(2.0, -0.1), std::domain_error);
    CHECK_THROWS_AS(lightcone_dimension(2.0, M_PI + 0.1), std::domain_error);
}

TEST_CASE("dimension endpoints on a kappa grid, strict theta monotonicity") {
    for (int i = 1; i < 50; ++i) {
        double kappa = 4.0 * i / 50.0;
        CHECK(std::fabs(lightcone_dimension(kappa, 0.0) - (1.0 + kappa / 8.0)) < 1e-12);
        CHECK(std::fabs(lightcone_dimension(kappa, M_PI) - (1.0 + 2.0 / kappa)) < 1e-12);
        double prev = lightcone_dimension(kappa, 0.0);
        for (int j = 1; j <= 200; ++j) {
            double d = lightcone_dimension(kappa, M_PI * j / 200.0);
            CHECK(d > prev);
            prev = d;
        }
    }
}

TEST_CASE("critical angle") {
    CHECK(critical_angle(2.0) == Approx(M_PI).epsilon(1e-15));
    CHECK(critical_angle(1.0) == Approx(M_PI / 3.0).epsilon(1e-15));
    CHECK(critical_angle(3.0) == Approx(3.0 * M_PI).epsilon(1e-15));
    for (double kappa : {0.25, 0.75, 1.25, 1.75, 2.0}) {
        double tc = critical_angle(kappa);
        REQUIRE(tc <= M_PI + 1e-12);
        CHECK(std::fabs(lightcone_dimension(kappa, std::min(tc, M_PI)) - 2.0) < 1e-10);
    }
}

TEST_CASE("SLE_kappa(rho) dimension in the light-cone phase") {
    CHECK(sle_rho_dimension(3.0, -2.5) == Approx(5.0 / 3.0).epsilon(1e-13));
    for (double kappa : {2.5, 3.0, 3.5}) {
        CHECK(sle_rho_dimension(kappa, -2.0 - 1e-9) == Approx(1.0 + kappa / 8.0).epsilon(1e-6));
        CHECK(sle_rho_dimension(kappa, kappa / 2.0 - 4.0 + 1e-9) ==
              Approx(1.0 + 2.0 / kappa).epsilon(1e-6));
    }
    // closed lower edge agrees with the trunk-plus-loops dimension
    CHECK(sle_rho_dimension(3.0, -2.5) == Approx(1.0 + 2.0 / 3.0).epsilon(1e-13));
    CHECK_THROWS_AS(sle_rho_dimension(3.0, -1.0), std::domain_error);
    CHECK_THROWS_AS(sle_rho_dimension(3.0, -3.0), std::domain_error);
    CHECK_THROWS_AS(sle_rho_dimension(1.0, -2.6), std::domain_error);
}

TEST_CASE("theta_of_rho and the dimension identity") {
    CHECK(theta_of_rho(3.0, -2.0) == Approx(0.0));
    CHECK(theta_of_rho(3.0, -2.5) == Approx(M_PI).epsilon(1e-14));
    CHECK(theta_of_rho(1.0, -2.75) == Approx(M_PI / 2.0).epsilon(1e-14));

    for (int i = 1; i < 50; ++i) {
        double kappa = 4.0 * i / 50.0;
        double lo = std::max(kappa / 2.0 - 4.0, -2.0 - kappa / 2.0);
        for (int j = 1; j < 50; ++j) {
            double rho = lo + (-2.0 - lo) * j / 50.0;
            double theta = theta_of_rho(kappa, rho);
            REQUIRE(theta > 0.0);
            REQUIRE(theta <= M_PI + 1e-12);
            CHECK(std::fabs(sle_rho_dimension(kappa, rho) -
                            lightcone_dimension(kappa, std::min(theta, M_PI))) < 1e-10);
        }
    }
}

TEST_CASE("bessel dimension") {
    for (double kappa : {0.5, 2.0, 3.7}) {
        CHECK(bessel_dimension(kappa, -2.0) == Approx(1.0));
        CHECK(bessel_dimension(kappa, kappa / 2.0 - 2.0) == Approx(2.0).epsilon(1e-15));
        CHECK(bessel_dimension(kappa, -2.0 - kappa / 2.0) == Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(bessel_dimension(0.0, 1.0), std::domain_error);
}

TEST_CASE("phase classification rows") {
    // boundary rho sits in the closed end of the printed interval
    CHECK(classify_phase(3.0, -3.5).phase == Phase::NotDefined);
    CHECK_FALSE(classify_phase(3.0, -3.5).range_dim.has_value());
    CHECK_FALSE(classify_phase(3.0, -3.5).simple.has_value());

    PhaseRecord trunk = classify_phase(3.0, -3.4);
    CHECK(trunk.phase == Phase::TrunkPlusLoops);
    CHECK(*trunk.range_dim == Approx(1.0 + 2.0 / 3.0).epsilon(1e-14));
    CHECK_FALSE(*trunk.simple);

    // rho = kappa/2 - 4 belongs to the trunk row (closed right end)
    CHECK(classify_phase(3.0, -2.5).phase == Phase::TrunkPlusLoops);
    PhaseRecord lc = classify_phase(3.0, -2.4);
    CHECK(lc.phase == Phase::LightCone);
    CHECK(*lc.range_dim == Approx(1.615).epsilon(1e-13)); // (3.8)(10.2)/24
    CHECK_FALSE(*lc.simple);

    PhaseRecord tracing = classify_phase(3.0, -2.0);
    CHECK(tracing.phase == Phase::BoundaryTracing);
    CHECK(*tracing.range_dim == Approx(1.0));
    CHECK(*tracing.simple);

    PhaseRecord hitting = classify_phase(3.0, -1.0);
    CHECK(hitting.phase == Phase::BoundaryHitting);
    CHECK(*hitting.range_dim == Approx(1.0 + 3.0 / 8.0).epsilon(1e-15));
    CHECK(*hitting.simple);

    // rho = 0 with kappa = 3 sits at or above kappa/2 - 2
    PhaseRecord avoiding = classify_phase(3.0, 0.0);
    CHECK(avoiding.phase == Phase::BoundaryAvoiding);
    CHECK(*avoiding.range_dim == Approx(1.0 + 3.0 / 8.0).epsilon(1e-15));
    CHECK(*avoiding.simple);

    // kappa <= 2: single light-cone phase on (-2-kappa/2, -2)
    CHECK(classify_phase(1.0, -2.4).phase == Phase::LightCone);
    CHECK(classify_phase(1.0, -2.5 - 1e-12).phase == Phase::NotDefined);
    CHECK(classify_phase(2.0, -2.9).phase == Phase::LightCone);

    // delta at the row boundaries is exactly the printed endpoint
    for (double kappa : {0.5, 1.5, 2.5, 3.5}) {
        CHECK(classify_phase(kappa, -2.0 - kappa / 2.0).bessel_dim == 0.0);
        CHECK(classify_phase(kappa, -2.0).bessel_dim == 1.0);
        CHECK(classify_phase(kappa, kappa / 2.0 - 2.0).bessel_dim == 2.0);
        if (kappa > 2.0)
            CHECK(classify_phase(kappa, kappa / 2.0 - 4.0).bessel_dim ==
                  Approx(2.0 - 4.0 / kappa).epsilon(1e-15));
    }

    // light-cone range dimension is capped at 2 near the space-filling edge
    PhaseRecord nearly_filling = classify_phase(1.0, -2.5 + 1e-9);
    CHECK(*nearly_filling.range_dim == Approx(2.0).epsilon(1e-6));
}

TEST_CASE("nu and xi") {
    NuXi a = nu_xi(2.0, 1.0);
    CHECK(a.nu == Approx(1.0).epsilon(1e-15));
    CHECK(a.xi == Approx(0.25).epsilon(1e-15));
    for (double kappa : {0.5, 2.0, 6.0}) {
        NuXi z = nu_xi(kappa, 0.0);
        CHECK(z.nu == 0.0);
        CHECK(z.xi == 0.0);
    }
    for (double r : {-1.0, 0.3, 2.0}) {
        NuXi f = nu_xi(4.0, r);
        CHECK(f.nu == Approx(r * r).epsilon(1e-14));
        CHECK(f.xi == Approx(r * r / 2.0).epsilon(1e-14));
    }
}

TEST_CASE("non-intersection exponent: direct Eq evaluations") {
    IgConstants c = ig_constants(2.0);
    // rho = -3/2, (b-a)/lambda = -1 => alpha = (1/4)(1)(1/2)
    CHECK(nonintersection_alpha(2.0, M_PI / 4.0, -M_PI / 4.0, c.lambda_prime, -c.lambda_prime) ==
          Approx(0.125).epsilon(1e-13));

    // theta1 = theta2: rho = -2 and alpha = 1 - kappa/4, vanishing at kappa -> 4
    for (double kappa : {1.0, 2.0, 3.0, 3.9, 3.999}) {
        IgConstants k = ig_constants(kappa);
        CHECK(nonintersection_alpha(kappa, 0.7, 0.7, k.lambda_prime, -k.lambda_prime) ==
              Approx(1.0 - kappa / 4.0).epsilon(1e-11));
    }

    // angle gap at/above the touching threshold has zero or undefined cost
    IgConstants k3 = ig_constants(3.0);
    double touch = 2.0 * k3.lambda_prime / k3.chi;
    CHECK_THROWS_AS(nonintersection_alpha(3.0, touch + 0.01, 0.0, 0.0, 0.0), std::domain_error);
    CHECK_THROWS_AS(nonintersection_alpha(3.0, -M_PI, 0.0, 0.0, 0.0), std::domain_error);
    CHECK(nonintersection_alpha(3.0, touch - 1e-9, 0.0, 1.0, -1.0) ==
          Approx(0.0).epsilon(1e-7));
}

TEST_CASE("canonical r, nu(r)+r = alpha, 2-beta = d") {
    ExponentParams p = canonical_r_and_beta(2.0, 0.0);
    CHECK(p.r == Approx(-0.5).epsilon(1e-15)); // -4/kappa' at kappa = 2

    for (int i = 1; i < 50; ++i) {
        double kappa = 4.0 * i / 50.0;
        IgConstants c = ig_constants(kappa);
        double theta_c = critical_angle(kappa);
        for (int j = 0; j <= 50; ++j) {
            double theta = M_PI * j / 50.0;
            ExponentParams q = canonical_r_and_beta(kappa, theta);
            CHECK(std::fabs((2.0 - q.beta) - lightcone_dimension(kappa, theta)) < 1e-12);
            CHECK(std::fabs(lightcone_hitting_exponent(kappa, theta) -
                            (2.0 - lightcone_dimension(kappa, theta))) < 1e-14);
            // Eq-(3.2) alpha needs the hitting condition theta < theta_c
            if (theta < theta_c - 1e-9) {
                double alpha_eq = nonintersection_alpha(kappa, theta / 2.0, -theta / 2.0,
                                                        c.lambda_prime, -c.lambda_prime);
                CHECK(std::fabs((q.nu + q.r) - alpha_eq) < 1e-10);
                CHECK(std::fabs(q.alpha - alpha_eq) < 1e-10);
            }
        }
    }
}

TEST_CASE("flow line boundary data") {
    double lambda = M_PI; // kappa = 1
    double chi = 1.5;

    FlowBoundaryValues flat = flowline_boundary_data({}, {}, 0.0, chi, lambda);
    REQUIRE(flat.left.size() == 1);
    REQUIRE(flat.right.size() == 1);
    CHECK(flat.left[0] == Approx(-lambda));
    CHECK(flat.right[0] == Approx(lambda));

    FlowBoundaryValues one = flowline_boundary_data({}, {0.5}, 0.0, chi, lambda);
    REQUIRE(one.right.size() == 2);
    CHECK(one.right[0] == Approx(lambda));
    CHECK(one.right[1] == Approx(lambda * 1.5));

    FlowBoundaryValues ang = flowline_boundary_data({1.0, -0.5}, {}, 0.25, chi, lambda);
    REQUIRE(ang.left.size() == 3);
    CHECK(ang.left[0] == Approx(-lambda - 0.25 * chi));
    CHECK(ang.left[1] == Approx(-lambda * 2.0 - 0.25 * chi));
    CHECK(ang.left[2] == Approx(-lambda * 1.5 - 0.25 * chi));

    FlowBoundaryValues cf = counterflow_boundary_data({0.5}, {1.0}, 2.0);
    CHECK(cf.left[0] == Approx(2.0));
    CHECK(cf.left[1] == Approx(3.0));
    CHECK(cf.right[0] == Approx(-2.0));
    CHECK(cf.right[1] == Approx(-4.0));
}

TEST_CASE("interaction rules") {
    CHECK(interaction_rule(0.3, 0.3, 2.0) == InteractionRule::Merges);
    IgConstants c = ig_constants(2.0);
    double touch = 2.0 * c.lambda_prime / c.chi;
    CHECK(touch == Approx(M_PI * 2.0 / (4.0 - 2.0)).epsilon(1e-13));
    CHECK(interaction_rule(touch, 0.0, 2.0) == InteractionRule::StaysLeftNoTouch);
    CHECK(interaction_rule(touch + 1.0, 0.0, 2.0) == InteractionRule::StaysLeftNoTouch);
    CHECK(interaction_rule(touch / 2.0, 0.0, 2.0) == InteractionRule::StaysLeftBounces);
    CHECK(interaction_rule(-0.5, 0.0, 2.0) == InteractionRule::Crosses);
    CHECK(interaction_rule(-M_PI + 0.01, 0.0, 2.0) == InteractionRule::Crosses);
    CHECK_THROWS_AS(interaction_rule(-M_PI, 0.0, 2.0), std::domain_error);
}
