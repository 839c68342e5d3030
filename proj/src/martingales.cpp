#include "ig/martingales.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "ig/formulas.hpp"
#include "ig/rng.hpp"
#include "ig/sle.hpp"

namespace ig {

namespace {

void run_replicas(int replicas, int threads, const std::function<void(int)>& body) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < replicas; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&, t]() {
            for (int i = t; i < replicas; i += threads)
                body(i);
        });
    }
    for (auto& th : pool)
        th.join();
}

} // namespace

std::array<double, 2> one_point_martingale_forms(const LoewnerChain& chain, double kappa, Cpx z,
                                                 double r, double t) {
    NuXi e = nu_xi(kappa, r);
    Diagnostics d = chain.diagnostics(z, t);
    double form_a = std::pow(d.s, -r) * std::pow(d.upsilon, e.xi + r) * std::pow(d.delta, e.nu + r);
    double form_b = std::pow(std::abs(d.z), r) * std::pow(std::imag(d.z), e.xi) *
                    std::pow(d.delta, e.nu - e.xi);
    return {form_a, form_b};
}

double one_point_martingale(const LoewnerChain& chain, double kappa, Cpx z, double r, double t) {
    return one_point_martingale_forms(chain, kappa, z, r, t)[0];
}

MarkedPointState marked_point_weights(double kappa, double theta1, double theta2, double a,
                                      double b) {
    IgConstants c = ig_constants(kappa);
    MarkedPointState st;
    st.rho[0] = (-theta1 * c.chi - a) / c.lambda - 1.0;
    st.rho[1] = 2.0;
    st.rho[2] = (theta1 - theta2) * c.chi / c.lambda - 2.0;
    st.rho[3] = 2.0;
    st.rho[4] = (b + theta2 * c.chi) / c.lambda - 1.0;
    st.rho3_tilde = kappa - 4.0 - st.rho[2];
    return st;
}

double exponent_sum(double kappa, double theta1, double theta2, double a, double b) {
    MarkedPointState st = marked_point_weights(kappa, theta1, theta2, a, b);
    double s = st.rho[0] + st.rho[1] + st.rho[3] + st.rho[4];
    return (st.rho3_tilde - st.rho[2]) * s / (2.0 * kappa);
}

double two_path_product(double kappa, const MarkedPointState& st) {
    double scale = (st.rho3_tilde - st.rho[2]) / (2.0 * kappa);
    double m = 1.0;
    for (int j = 0; j < 5; ++j) {
        if (j == 2)
            continue;
        m *= std::pow(std::abs(st.v[j] - st.v[2]), scale * st.rho[j]);
    }
    return m;
}

TwoPathRun two_path_martingale_run(double kappa, double theta1, double theta2, double a, double b,
                                   double x1, double x2, const std::vector<double>& checkpoints,
                                   std::uint64_t seed, const TwoPathRunOptions& opts) {
    if (!(x1 < 0.0 && 0.0 < x2))
        throw std::invalid_argument("need x1 < 0 < x2");
    MarkedPointState st = marked_point_weights(kappa, theta1, theta2, a, b);

    // eta_1 through the coupling dictionary: left force point at the seed with
    // weight rho1, right force points at 0 (rho3) and x2 (rho4 + rho5)
    ForcePointConfig fp;
    fp.left.push_back({x1, st.rho[0]});
    fp.right.push_back({0.0, st.rho[2]});
    fp.right.push_back({x2, st.rho[3] + st.rho[4]});

    double s_max = *std::max_element(checkpoints.begin(), checkpoints.end());
    int n_steps = static_cast<int>(std::ceil(s_max / opts.dt)) + 1;
    SleRhoOptions sopts;
    sopts.seed_position = x1;
    DrivingFunction drv = sample_sle_rho(kappa, fp, n_steps, opts.dt, seed, sopts);

    TwoPathRun run;
    const std::vector<double>& v1 = drv.force_tracks[0]; // image of inf eta_1 cap R
    const std::vector<double>& v3 = drv.force_tracks[1]; // most recent intersection with [0,x2]
    const std::vector<double>& v45 = drv.force_tracks[2]; // images of x2

    std::size_t threat = drv.w.size();
    for (std::size_t k = 0; k < drv.w.size(); ++k) {
        if (v45[k] - drv.w[k] <= opts.guard) {
            threat = k;
            run.x2_swallowed = true;
            break;
        }
    }

    auto value_at = [&](std::size_t k) {
        MarkedPointState cur = st;
        cur.v = {v1[k], drv.w[k], v3[k], v45[k], v45[k]};
        return two_path_product(kappa, cur);
    };

    for (double s : checkpoints) {
        std::size_t k = static_cast<std::size_t>(std::llround(s / opts.dt));
        k = std::min(k, drv.w.size() - 1);
        // optional stopping: freeze at the swallowing-threat time
        if (k >= threat)
            k = (threat == 0) ? 0 : threat - 1;
        run.s.push_back(drv.t[k]);
        run.m.push_back(value_at(k));
    }
    return run;
}

double two_path_martingale_single_growth(double kappa, double theta1, double theta2, double a,
                                         double b, double x1, double x2, double s,
                                         std::uint64_t seed, const TwoPathRunOptions& opts) {
    TwoPathRun run = two_path_martingale_run(kappa, theta1, theta2, a, b, x1, x2, {s}, seed, opts);
    if (run.x2_swallowed && run.s.back() < s)
        throw std::runtime_error("configuration error: eta_1 swallowed x2 before capacity s");
    return run.m.back();
}

namespace {

MartingaleCheck summarize(const std::vector<double>& checkpoints,
                          const std::vector<std::vector<double>>& samples, double m0) {
    MartingaleCheck chk;
    chk.t = checkpoints;
    for (const auto& vals : samples) {
        MeanStderr ms = mean_stderr(vals);
        chk.mean.push_back(ms);
        if (ms.stderr_ > 0.0)
            chk.max_drift_sigmas = std::max(chk.max_drift_sigmas, std::abs(ms.mean - m0) / ms.stderr_);
    }
    return chk;
}

} // namespace

MartingaleCheck one_point_constancy_check(double kappa, double r, Cpx z,
                                          const std::vector<double>& checkpoints, int replicas,
                                          double dt, std::uint64_t seed, int threads) {
    NuXi e = nu_xi(kappa, r);
    double t_max = *std::max_element(checkpoints.begin(), checkpoints.end());
    std::vector<std::size_t> kpt;
    for (double t : checkpoints)
        kpt.push_back(static_cast<std::size_t>(std::llround(t / dt)));
    std::size_t n_steps = static_cast<std::size_t>(std::ceil(t_max / dt)) + 1;

    std::vector<std::vector<double>> samples(checkpoints.size(),
                                             std::vector<double>(replicas, 0.0));
    double sqk = std::sqrt(kappa * dt);
    // localization: freeze once the conformal radius around z drops below the
    // guard (the paper leaves the stopping rule open; this keeps M bounded)
    const double upsilon_guard = 0.5;

    run_replicas(replicas, threads, [&](int i) {
        Rng rng = Rng::for_replica(seed, static_cast<std::uint64_t>(i));
        Cpx gz = z;
        double log_delta = 0.0;
        double w = 0.0;
        bool frozen = false;
        double frozen_m = 0.0;
        std::size_t next_cp = 0;

        auto m_now = [&]() {
            Cpx zc = gz - w;
            double delta = std::exp(log_delta);
            double ups = std::imag(zc) / delta;
            double s = std::sin(std::arg(zc));
            return std::pow(s, -r) * std::pow(ups, e.xi + r) * std::pow(delta, e.nu + r);
        };

        for (std::size_t k = 1; k <= n_steps && next_cp < kpt.size(); ++k) {
            double c = w;
            Cpx wz = gz - c;
            Cpx wz2 = detail::slit_forward(wz, 4.0 * dt);
            log_delta += 0.5 * (std::log(std::norm(wz)) - std::log(std::norm(wz2)));
            gz = c + wz2;
            w += sqk * rng.gaussian();
            if (std::imag(wz2) < LoewnerChain::kSwallowGuard ||
                std::imag(gz - w) / std::exp(log_delta) < upsilon_guard) {
                frozen = true;
                frozen_m = m_now();
            }
            while (next_cp < kpt.size() && k >= kpt[next_cp]) {
                samples[next_cp][i] = frozen ? frozen_m : m_now();
                ++next_cp;
            }
            if (frozen) {
                while (next_cp < kpt.size()) {
                    samples[next_cp][i] = frozen_m;
                    ++next_cp;
                }
                break;
            }
        }
    });

    Diagnostics d0{z, 1.0, std::imag(z), std::arg(z), std::sin(std::arg(z))};
    double m0 = std::pow(d0.s, -r) * std::pow(d0.upsilon, e.xi + r) * std::pow(d0.delta, e.nu + r);
    return summarize(checkpoints, samples, m0);
}

MartingaleCheck two_path_constancy_check(double kappa, double theta1, double theta2, double a,
                                         double b, double x1, double x2,
                                         const std::vector<double>& checkpoints, int replicas,
                                         double dt, std::uint64_t seed, int threads) {
    std::vector<std::vector<double>> samples(checkpoints.size(),
                                             std::vector<double>(replicas, 0.0));
    TwoPathRunOptions opts;
    opts.dt = dt;
    run_replicas(replicas, threads, [&](int i) {
        TwoPathRun run = two_path_martingale_run(kappa, theta1, theta2, a, b, x1, x2, checkpoints,
                                                 seed + 0x9e3779b97f4a7c15ULL * (i + 1), opts);
        for (std::size_t c = 0; c < checkpoints.size(); ++c)
            samples[c][i] = run.m[c];
    });

    MarkedPointState st = marked_point_weights(kappa, theta1, theta2, a, b);
    st.v = {x1, x1, 0.0, x2, x2};
    double m0 = two_path_product(kappa, st);
    return summarize(checkpoints, samples, m0);
}

} // namespace ig
