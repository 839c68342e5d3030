#pragma once

#include <cstdint>
#include <vector>

#include "ig/loewner.hpp"

namespace ig {

enum class StopReason { Budget, ContinuationThreshold, Swallow };

struct ForcePoint {
    double x;   // boundary position (<= 0 left, >= 0 right)
    double rho; // weight
};

struct ForcePointConfig {
    std::vector<ForcePoint> left;  // x decreasing: x_{1,L} >= x_{2,L} >= ...
    std::vector<ForcePoint> right; // x increasing

    static ForcePointConfig single(double x, double rho) {
        ForcePointConfig fp;
        if (x < 0.0)
            fp.left.push_back({x, rho});
        else
            fp.right.push_back({x, rho});
        return fp;
    }
};

// Sampled driving function of an SLE_kappa(rho_L; rho_R) chain plus the force
// point tracks V^{i,q}.  Tracks follow dV = 2/(V-W) dt between samples and
// ride the driving value while collided.
struct DrivingFunction {
    double kappa = 0.0;
    double dt = 0.0;
    std::vector<double> t; // sample times, t[0] = 0
    std::vector<double> w; // driving samples, w[0] = seed position
    std::vector<std::vector<double>> force_tracks;
    std::vector<double> force_weights;
    std::vector<int> force_sides; // -1 left, +1 right
    StopReason stopped_reason = StopReason::Budget;

    std::size_t n_steps() const { return t.empty() ? 0 : t.size() - 1; }
    // chain of (driving increment, duration) steps, translated so the seed
    // sits at the origin
    LoewnerChain to_chain() const;
};

/// Plain SLE_kappa: W = sqrt(kappa) B sampled on an n_steps*dt grid.
DrivingFunction sample_sle(double kappa, int n_steps, double dt, std::uint64_t seed);

struct SleRhoOptions {
    // use the coupled Euler system even when a single force point would
    // otherwise be routed through the squared-Bessel scheme
    bool force_direct_euler = false;
    // V-W below collision_factor*sqrt(dt) counts as a collision
    double collision_factor = 1e-7;
    double seed_position = 0.0;
};

/// SLE_kappa(rho) driving via Euler-Maruyama on the coupled (W, V) system.
/// Stops early with ContinuationThreshold when the collided weight sum on one
/// side drops to -2 or below.  A single force point with bessel dimension
/// delta >= 1 is driven through a full-truncation squared-Bessel scheme for
/// the rescaled gap, which continues through collisions (the rho = -2
/// boundary-tracing case runs to budget).
DrivingFunction sample_sle_rho(double kappa, const ForcePointConfig& fp, int n_steps, double dt,
                               std::uint64_t seed, const SleRhoOptions& opts = {});

struct RadialAnglePath {
    std::vector<double> theta;
    bool hit_boundary = false;
};

/// Radial angle SDE dTheta = (kappa'-4) cot(Theta) dt + sqrt(kappa') dB,
/// stopped when Theta exits (guard, pi - guard).
RadialAnglePath radial_angle_process(double kappa_prime, double theta0, int n_steps, double dt,
                                     std::uint64_t seed, double guard = 1e-3);

} // namespace ig
