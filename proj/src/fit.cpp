#include "ig/fit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ig {

ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_loglog needs >= 2 matching points");
    std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw std::domain_error("fit_loglog needs positive data");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0)
        throw std::domain_error("degenerate fit: all scales equal");
    ExponentFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = ly[i] - (f.intercept + f.slope * lx[i]);
        ss_res += e * e;
    }
    f.r_squared = (syy == 0.0) ? 1.0 : 1.0 - ss_res / syy;
    f.stderr_slope = (n > 2) ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    f.scales = x;
    f.window_min = *std::min_element(x.begin(), x.end());
    f.window_max = *std::max_element(x.begin(), x.end());
    return f;
}

ExponentFit fit_loglog_windowed(std::vector<double> x, std::vector<double> y, double r2_min,
                                std::size_t min_points) {
    // sort by scale so "smallest" is well defined
    std::vector<std::size_t> idx(x.size());
    for (std::size_t i = 0; i < idx.size(); ++i)
        idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs, ys;
    for (std::size_t i : idx) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
    }
    ExponentFit f = fit_loglog(xs, ys);
    while (f.r_squared < r2_min && xs.size() > std::max<std::size_t>(min_points, 2)) {
        xs.erase(xs.begin());
        ys.erase(ys.begin());
        f = fit_loglog(xs, ys);
    }
    return f;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr m;
    m.n = xs.size();
    if (m.n == 0)
        return m;
    double s = 0.0;
    for (double v : xs)
        s += v;
    m.mean = s / m.n;
    if (m.n > 1) {
        double ss = 0.0;
        for (double v : xs)
            ss += (v - m.mean) * (v - m.mean);
        m.stderr_ = std::sqrt(ss / (m.n - 1) / m.n);
    }
    return m;
}

} // namespace ig
