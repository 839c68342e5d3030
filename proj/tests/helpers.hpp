#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace test_helpers {

// two-sample Kolmogorov-Smirnov p-value (asymptotic tail sum)
inline double ks_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        double x = (a[i] <= b[j]) ? a[i] : b[j];
        while (i < a.size() && a[i] <= x)
            ++i;
        while (j < b.size() && b[j] <= x)
            ++j;
        double fa = static_cast<double>(i) / a.size();
        double fb = static_cast<double>(j) / b.size();
        d = std::max(d, std::fabs(fa - fb));
    }
    double ne = static_cast<double>(a.size()) * b.size() / (a.size() + b.size());
    double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        double term = 2.0 * sign * std::exp(-2.0 * k * k * lambda * lambda);
        p += term;
        sign = -sign;
        if (std::fabs(term) < 1e-12)
            break;
    }
    return std::clamp(p, 0.0, 1.0);
}

} // namespace test_helpers
