#pragma once

#include <vector>

namespace ig {

// Ordinary least squares log-log fit with residual-based slope error.
struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double r_squared = 0.0;
    std::vector<double> scales;     // abscissae actually used (original units)
    double window_min = 0.0;
    double window_max = 0.0;
};

/// Fit log(y) = slope * log(x) + intercept over the given points.
ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Deterministic window selection: drop the smallest scale while r^2 < r2_min
/// and at least min_points remain.
ExponentFit fit_loglog_windowed(std::vector<double> x, std::vector<double> y, double r2_min,
                                std::size_t min_points = 3);

struct MeanStderr {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
};

MeanStderr mean_stderr(const std::vector<double>& xs);

} // namespace ig
