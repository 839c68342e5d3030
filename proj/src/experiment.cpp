#include "ig/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ig/estimation.hpp"
#include "ig/flowlines.hpp"
#include "ig/formulas.hpp"
#include "ig/gff.hpp"
#include "ig/loewner.hpp"
#include "ig/martingales.hpp"
#include "ig/sle.hpp"
#include "ig/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ig {

namespace {

std::string num17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i)
            line += ',';
        line += fields[i];
    }
    line += "\r\n"; // RFC 4180
    return line;
}

// Writes artifacts through temp files; removes everything written when a run
// fails part way.
class ArtifactWriter {
public:
    explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
        fs::create_directories(dir_);
    }

    void write_text(const std::string& name, const std::string& content) {
        fs::path target = dir_ / name;
        fs::path tmp = dir_ / (name + ".tmp");
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out)
                throw std::runtime_error("cannot write " + tmp.string());
            out << content;
        }
        fs::rename(tmp, target);
        written_.push_back(target);
    }

    void write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

    void write_csv(const std::string& name, const std::vector<std::string>& header,
                   const std::vector<std::vector<std::string>>& rows) {
        std::string content = csv_line(header);
        for (const auto& r : rows)
            content += csv_line(r);
        write_text(name, content);
    }

    void rollback() {
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
        written_.clear();
    }

    const fs::path& dir() const { return dir_; }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const auto& p : written_)
            out.push_back(p.filename().string());
        return out;
    }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
};

int config_threads(const ExperimentConfig& cfg) {
    long p = cfg.integer_or("parallelism", 0);
    if (p <= 0)
        p = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    return static_cast<int>(p);
}

void loglog_plot(ArtifactWriter& w, const std::string& name, const std::vector<double>& x,
                 const std::vector<double>& y, const ExponentFit& fit, double expected_slope,
                 const std::string& xlabel) {
    double lx0 = std::log10(*std::min_element(x.begin(), x.end()));
    double lx1 = std::log10(*std::max_element(x.begin(), x.end()));
    double ly0 = std::log10(*std::min_element(y.begin(), y.end()));
    double ly1 = std::log10(*std::max_element(y.begin(), y.end()));
    double padx = 0.1 * std::max(lx1 - lx0, 0.2), pady = 0.1 * std::max(ly1 - ly0, 0.2);
    SvgCanvas svg(lx0 - padx, ly0 - pady, lx1 + padx, ly1 + 3 * pady, 640);
    auto line_from_slope = [&](double slope, double anchor_lx, double anchor_ly,
                               const std::string& color, double width) {
        double l0 = anchor_ly + slope * (lx0 - anchor_lx) / std::log10(M_E) * std::log10(M_E);
        double l1 = anchor_ly + slope * (lx1 - anchor_lx);
        svg.line(lx0, l0, lx1, l1, color, width);
    };
    double alx = std::log10(x[0]);
    double aly = std::log10(y[0]);
    line_from_slope(fit.slope, alx, aly, "#1f77b4", 1.5);
    line_from_slope(expected_slope, alx, aly, "#d62728", 1.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        svg.circle(std::log10(x[i]), std::log10(y[i]), 3.5, "#000000");
    char label[160];
    std::snprintf(label, sizeof(label), "slope %.4f +/- %.4f (expected %.4f), R2 %.4f",
                  fit.slope, fit.stderr_slope, expected_slope, fit.r_squared);
    svg.text(lx0 - padx / 2, ly1 + 2.2 * pady, label);
    svg.text(lx0 - padx / 2, ly1 + 1.2 * pady, "log10 " + xlabel + " vs log10 value");
    w.write_text(name, svg.str());
}

json fit_to_json(const ExponentFit& f) {
    return {{"slope", f.slope},
            {"intercept", f.intercept},
            {"stderr", f.stderr_slope},
            {"r_squared", f.r_squared},
            {"window_min", f.window_min},
            {"window_max", f.window_max}};
}

// ---- subcommand runners ----------------------------------------------------

void run_formulas(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    double kappa = cfg.number("kappa");
    IgConstants c = ig_constants(kappa);
    std::vector<std::string> header = {"kappa",        "theta",   "rho",     "chi",
                                       "lambda",       "lambda_prime", "kappa_prime",
                                       "theta_c",      "d",       "d_capped", "delta",
                                       "phase",        "range_dim"};
    std::vector<std::string> row(header.size(), "");
    row[0] = num17(kappa);
    row[3] = num17(c.chi);
    row[4] = num17(c.lambda);
    row[5] = num17(c.lambda_prime);
    row[6] = num17(c.kappa_prime);
    row[7] = num17(critical_angle(kappa));
    if (cfg.has("theta")) {
        double theta = cfg.number("theta");
        double d = lightcone_dimension(kappa, theta);
        row[1] = num17(theta);
        row[8] = num17(d);
        row[9] = num17(capped_dimension(d));
    }
    if (cfg.has("rho")) {
        double rho = cfg.number("rho");
        PhaseRecord rec = classify_phase(kappa, rho);
        row[2] = num17(rho);
        row[10] = num17(rec.bessel_dim);
        row[11] = phase_name(rec.phase);
        if (rec.range_dim)
            row[12] = num17(*rec.range_dim);
    }
    w.write_csv("formulas.csv", header, {row});
    res.notes.push_back("formulas.csv written");
}

const char* phase_color(Phase p) {
    switch (p) {
    case Phase::NotDefined: return "#bbbbbb";
    case Phase::TrunkPlusLoops: return "#4477cc";
    case Phase::LightCone: return "#f2c94c";
    case Phase::BoundaryTracing: return "#222222";
    case Phase::BoundaryHitting: return "#6fbf73";
    case Phase::BoundaryAvoiding: return "#2e7d32";
    }
    return "#ffffff";
}

void run_phase_diagram(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    int ks = static_cast<int>(cfg.integer_or("kappa_steps", 200));
    int rs = static_cast<int>(cfg.integer_or("rho_steps", 200));
    double rho_min = cfg.number_or("rho_min", -4.5);
    double rho_max = cfg.number_or("rho_max", 1.0);
    if (ks < 2 || rs < 2)
        throw std::invalid_argument("phase-diagram: need kappa_steps, rho_steps >= 2");

    std::vector<std::vector<std::string>> rows;
    SvgCanvas svg(0.0, rho_min, 4.0, rho_max, 720);
    double dk = 4.0 / ks, dr = (rho_max - rho_min) / rs;
    for (int i = 0; i < ks; ++i) {
        double kappa = dk * (i + 0.5);
        for (int j = 0; j < rs; ++j) {
            double rho = rho_min + dr * (j + 0.5);
            PhaseRecord rec = classify_phase(kappa, rho);
            rows.push_back({num17(kappa), num17(rho), num17(rec.bessel_dim),
                            phase_name(rec.phase),
                            rec.range_dim ? num17(*rec.range_dim) : ""});
            svg.rect(kappa - dk / 2, rho - dr / 2, dk, dr, phase_color(rec.phase));
        }
    }
    // phase boundaries: rho = -2 (light-cone ceiling), rho = kappa/2 - 4,
    // rho = -2 - kappa/2, rho = kappa/2 - 2
    for (double kappa = 0.0; kappa < 4.0 - 1e-9; kappa += 0.01) {
        svg.line(kappa, -2.0, kappa + 0.01, -2.0, "#000000", 0.8);
        svg.line(kappa, kappa / 2 - 4, kappa + 0.01, (kappa + 0.01) / 2 - 4, "#000000", 0.8);
        svg.line(kappa, -2 - kappa / 2, kappa + 0.01, -2 - (kappa + 0.01) / 2, "#000000", 0.8);
        svg.line(kappa, kappa / 2 - 2, kappa + 0.01, (kappa + 0.01) / 2 - 2, "#000000", 0.8);
    }
    svg.text(2.0, -1.2, "boundary hitting / avoiding");
    svg.text(2.3, -2.8, "light cone");
    svg.text(0.4, -4.2, "not defined");
    w.write_csv("phase_diagram.csv", {"kappa", "rho", "delta", "phase", "dim"}, rows);
    w.write_text("phase_diagram.svg", svg.str());
    res.notes.push_back("phase diagram over " + std::to_string(ks) + "x" + std::to_string(rs));
}

json driving_to_json(const DrivingFunction& d) {
    json steps = json::array();
    for (std::size_t k = 1; k < d.t.size(); ++k)
        steps.push_back({d.t[k] - d.t[k - 1], d.w[k] - d.w[k - 1]});
    const char* reason = d.stopped_reason == StopReason::Budget ? "budget"
                         : d.stopped_reason == StopReason::ContinuationThreshold
                             ? "continuation-threshold"
                             : "swallow";
    json j = {{"kappa", d.kappa}, {"dt", d.dt},      {"w0", d.w.empty() ? 0.0 : d.w[0]},
              {"steps", steps},   {"stopped_reason", reason}};
    if (!d.force_tracks.empty()) {
        j["force_weights"] = d.force_weights;
        j["force_sides"] = d.force_sides;
    }
    return j;
}

std::vector<std::vector<std::string>> driving_to_rows(const DrivingFunction& d) {
    std::vector<std::vector<std::string>> rows;
    for (std::size_t k = 0; k < d.t.size(); ++k) {
        std::vector<std::string> row = {num17(d.t[k]), num17(d.w[k])};
        for (const auto& track : d.force_tracks)
            row.push_back(num17(track[k]));
        rows.push_back(row);
    }
    return rows;
}

DrivingFunction sample_driving_from_config(const ExperimentConfig& cfg) {
    double kappa = cfg.number("kappa");
    int steps = static_cast<int>(cfg.integer_or("steps", 10000));
    double dt = cfg.number_or("dt", 1e-4);
    std::uint64_t seed = cfg.seed();
    std::vector<double> rhos = cfg.numbers_or("rho", {});
    std::vector<double> xs = cfg.numbers_or("force_point", {});
    if (rhos.empty())
        return sample_sle(kappa, steps, dt, seed);
    if (xs.size() != rhos.size())
        throw std::invalid_argument("need one force_point position per rho");
    ForcePointConfig fp;
    for (std::size_t i = 0; i < rhos.size(); ++i) {
        if (xs[i] <= 0.0)
            fp.left.push_back({xs[i], rhos[i]});
        else
            fp.right.push_back({xs[i], rhos[i]});
    }
    std::sort(fp.left.begin(), fp.left.end(), [](auto& a, auto& b) { return a.x > b.x; });
    std::sort(fp.right.begin(), fp.right.end(), [](auto& a, auto& b) { return a.x < b.x; });
    SleRhoOptions opts;
    opts.force_direct_euler = cfg.flag_or("direct_euler", false);
    return sample_sle_rho(kappa, fp, steps, dt, seed, opts);
}

void run_sample_sle(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    DrivingFunction d = sample_driving_from_config(cfg);
    w.write_json("driving.json", driving_to_json(d));
    std::vector<std::string> header = {"t", "w"};
    for (std::size_t i = 0; i < d.force_tracks.size(); ++i)
        header.push_back("v" + std::to_string(i + 1));
    w.write_csv("driving.csv", header, driving_to_rows(d));
    res.notes.push_back("samples: " + std::to_string(d.t.size()));
}

DrivingFunction driving_from_json_file(const fs::path& p) {
    std::ifstream in(p);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    json j = json::parse(in);
    DrivingFunction d;
    d.kappa = j.value("kappa", 0.0);
    d.dt = j.value("dt", 0.0);
    double w0 = j.value("w0", 0.0);
    d.t.push_back(0.0);
    d.w.push_back(w0);
    for (const auto& s : j.at("steps")) {
        d.t.push_back(d.t.back() + s.at(0).get<double>());
        d.w.push_back(d.w.back() + s.at(1).get<double>());
    }
    return d;
}

void run_trace(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    DrivingFunction d = cfg.has("input") ? driving_from_json_file(cfg.text("input"))
                                         : sample_driving_from_config(cfg);
    LoewnerChain chain = d.to_chain();
    TraceOptions topts;
    topts.midpoints = cfg.flag_or("midpoints", false);
    topts.threads = config_threads(cfg);
    Polyline trace = chain.trace(topts);
    double w0 = d.w.empty() ? 0.0 : d.w[0];
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < trace.size(); ++i)
        rows.push_back({num17(trace.t[i]), num17(std::real(trace.pts[i]) + w0),
                        num17(std::imag(trace.pts[i]))});
    w.write_csv("trace.csv", {"t", "x", "y"}, rows);

    double xmin = 0, xmax = 0, ymax = 1e-9;
    for (const Cpx& p : trace.pts) {
        xmin = std::min(xmin, std::real(p));
        xmax = std::max(xmax, std::real(p));
        ymax = std::max(ymax, std::imag(p));
    }
    double pad = 0.05 * std::max(xmax - xmin, ymax);
    SvgCanvas svg(xmin - pad, 0.0, xmax + pad, ymax + pad, 720);
    svg.polyline(trace.pts, "#1f77b4", 1.0);
    w.write_text("trace.svg", svg.str());
    res.notes.push_back("trace points: " + std::to_string(trace.size()));
}

GridGeometry geometry_from_config(const ExperimentConfig& cfg) {
    int grid = static_cast<int>(cfg.integer_or("grid", 256));
    double x0 = cfg.number_or("x0", -1.0);
    double x1 = cfg.number_or("x1", 1.0);
    double y0 = cfg.number_or("y0", 0.0);
    double y1 = cfg.number_or("y1", 2.0);
    int ny = std::max(8, static_cast<int>(std::lround(grid * (y1 - y0) / (x1 - x0))));
    return {grid, ny, x0, y0, (x1 - x0) / grid};
}

BoundarySpec boundary_from_config(const ExperimentConfig& cfg, const IgConstants& c) {
    std::vector<double> breaks = cfg.numbers_or("boundary_breaks", {0.0});
    std::vector<double> values = cfg.numbers_or("boundary_values", {-c.lambda, c.lambda});
    return BoundarySpec::real_line_flow(breaks, values, c.chi);
}

void run_gff(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    std::string mode = cfg.text_or("mode", "sample");
    double kappa = cfg.number("kappa");
    if (mode == "calibrate") {
        int grid = static_cast<int>(cfg.integer_or("grid", 64));
        int replicas = static_cast<int>(cfg.integer_or("replicas", 32));
        CalibrationResult cal = calibrate_fluctuation_scale(kappa, grid, replicas, cfg.seed());
        w.write_json("calibration.json", {{"kappa", kappa},
                                          {"grid", grid},
                                          {"replicas", replicas},
                                          {"fluctuation_scale", cal.fluctuation_scale},
                                          {"achieved_qv_rate", cal.achieved_qv_rate},
                                          {"bisection_steps", cal.bisection_steps}});
        res.notes.push_back("calibrated scale " + num17(cal.fluctuation_scale));
        return;
    }
    IgConstants c = ig_constants(kappa);
    GridGeometry geom = geometry_from_config(cfg);
    GffField field = sample_gff(geom, boundary_from_config(cfg, c),
                                cfg.number_or("scale", 2.0 * M_PI), cfg.seed());
    std::vector<std::vector<std::string>> rows;
    for (int j = 0; j <= geom.ny; ++j)
        for (int i = 0; i <= geom.nx; ++i)
            rows.push_back({std::to_string(i), std::to_string(j),
                            num17(geom.x0 + i * geom.spacing), num17(geom.y0 + j * geom.spacing),
                            num17(field.node(i, j))});
    w.write_csv("field.csv", {"i", "j", "x", "y", "value"}, rows);
    res.notes.push_back("field nodes: " + std::to_string(rows.size()));
}

PointCloud cloud_from_csv(const fs::path& p) {
    std::ifstream in(p);
    if (!in)
        throw std::runtime_error("cannot read " + p.string());
    PointCloud cloud;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        if (first) {
            first = false; // header
            continue;
        }
        std::stringstream ss(line);
        std::string fx, fy;
        std::getline(ss, fx, ',');
        std::getline(ss, fy, ',');
        cloud.add(Cpx(std::stod(fx), std::stod(fy)));
    }
    return cloud;
}

std::vector<double> auto_scales(const PointCloud& cloud, double min_scale) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const Cpx& p : cloud.pts) {
        xmin = std::min(xmin, std::real(p));
        xmax = std::max(xmax, std::real(p));
        ymin = std::min(ymin, std::imag(p));
        ymax = std::max(ymax, std::imag(p));
    }
    double diam = std::max(xmax - xmin, ymax - ymin);
    std::vector<double> scales;
    for (double r = diam / 8.0; r > min_scale; r /= 2.0)
        scales.push_back(r);
    if (scales.size() < 2)
        throw std::runtime_error("cloud too small for box counting");
    return scales;
}

void write_cloud(ArtifactWriter& w, const std::string& name, const PointCloud& cloud) {
    std::vector<std::vector<std::string>> rows;
    rows.reserve(cloud.pts.size());
    for (const Cpx& p : cloud.pts)
        rows.push_back({num17(std::real(p)), num17(std::imag(p))});
    w.write_csv(name, {"x", "y"}, rows);
}

void run_flowline(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    double kappa = cfg.number("kappa");
    IgConstants c = ig_constants(kappa);
    GridGeometry geom = geometry_from_config(cfg);
    GffField field = sample_gff(geom, boundary_from_config(cfg, c),
                                cfg.number_or("scale", 2.0 * M_PI), cfg.seed());
    Cpx start(cfg.number_or("start_x", 0.0), cfg.number_or("start_y", 0.5 * geom.spacing));
    double step = cfg.number_or("step_factor", 0.3) * geom.spacing;
    TracedPath path = trace_flow_line(field, start, c.chi, cfg.number_or("angle", 0.0), step,
                                      static_cast<int>(cfg.integer_or("max_steps", 20000)));
    PointCloud cloud;
    cloud.pts = path.pts;
    write_cloud(w, "path.csv", cloud);
    SvgCanvas svg(geom.x0, geom.y0, geom.x_max(), geom.y_max(), 720);
    svg.polyline(path.pts, "#1f77b4", 1.0);
    w.write_text("path.svg", svg.str());
    res.notes.push_back(std::string("path end: ") +
                        (path.end == PathEnd::Boundary  ? "boundary"
                         : path.end == PathEnd::Budget ? "budget"
                                                       : "self-trap"));
}

void check_gate(RunResult& res, const ExperimentConfig& cfg, bool pass, const std::string& what) {
    if (!cfg.flag_or("check", false))
        return;
    if (!pass) {
        res.status = 1;
        res.notes.push_back("CHECK FAILED: " + what);
    } else {
        res.notes.push_back("check passed: " + what);
    }
}

void run_lightcone(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    double kappa = cfg.number("kappa");
    IgConstants c = ig_constants(kappa);
    double theta = cfg.has("rho") ? theta_of_rho(kappa, cfg.number("rho")) : cfg.number("theta");
    GridGeometry geom = geometry_from_config(cfg);
    GffField field = sample_gff(geom, boundary_from_config(cfg, c),
                                cfg.number_or("scale", 2.0 * M_PI), cfg.seed());
    LightConeOptions opts;
    opts.max_steps = static_cast<int>(cfg.integer_or("max_steps", 20000));
    PointCloud cloud = light_cone(field, Cpx(0.0, 0.5 * geom.spacing), c.chi, theta,
                                  static_cast<int>(cfg.integer_or("n_paths", 64)),
                                  static_cast<int>(cfg.integer_or("max_changes", 64)),
                                  cfg.seed() + 1, opts);
    write_cloud(w, "cloud.csv", cloud);

    std::vector<double> scales =
        cfg.has("scales") ? cfg.numbers_or("scales", {}) : auto_scales(cloud, 2.0 * geom.spacing);
    ExponentFit fit = box_count(cloud, scales);
    double predicted = capped_dimension(lightcone_dimension(kappa, theta));
    json jf = fit_to_json(fit);
    jf["predicted_dim"] = predicted;
    w.write_json("boxdim.json", jf);

    SvgCanvas svg(geom.x0, geom.y0, geom.x_max(), geom.y_max(), 720);
    for (const Cpx& p : cloud.pts)
        svg.circle(std::real(p), std::imag(p), 0.7, "#b45f06");
    w.write_text("cloud.svg", svg.str());
    res.notes.push_back("box slope " + num17(fit.slope) + " predicted " + num17(predicted));
    double tol = cfg.number_or("tolerance", 0.15);
    check_gate(res, cfg, std::abs(fit.slope - predicted) <= tol, "light-cone dimension");
}

void run_fan(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    double kappa = cfg.number("kappa");
    IgConstants c = ig_constants(kappa);
    double theta = cfg.number("theta");
    GridGeometry geom = geometry_from_config(cfg);
    GffField field = sample_gff(geom, boundary_from_config(cfg, c),
                                cfg.number_or("scale", 2.0 * M_PI), cfg.seed());
    double step = cfg.number_or("step_factor", 0.3) * geom.spacing;
    int max_steps = static_cast<int>(cfg.integer_or("max_steps", 20000));
    int n_angles = static_cast<int>(cfg.integer_or("n_angles", 33));
    Cpx start(0.0, 0.5 * geom.spacing);

    PointCloud cloud = fan(field, start, c.chi, theta, n_angles, step, max_steps);
    write_cloud(w, "cloud.csv", cloud);
    PointCloud single;
    single.pts = trace_flow_line(field, start, c.chi, 0.0, step, max_steps).pts;

    std::vector<double> scales =
        cfg.has("scales") ? cfg.numbers_or("scales", {}) : auto_scales(single, 2.0 * geom.spacing);
    ExponentFit fan_fit = box_count(cloud, scales);
    ExponentFit single_fit = box_count(single, scales);
    json j = {{"fan", fit_to_json(fan_fit)},
              {"single", fit_to_json(single_fit)},
              {"predicted_dim", 1.0 + kappa / 8.0}};
    w.write_json("boxdim.json", j);

    SvgCanvas svg(geom.x0, geom.y0, geom.x_max(), geom.y_max(), 720);
    std::size_t offset = 0;
    std::size_t per_path = cloud.pts.size() / std::max(1, n_angles);
    for (int k = 0; k < n_angles; ++k) {
        std::vector<Cpx> seg(cloud.pts.begin() + offset,
                             cloud.pts.begin() + std::min(cloud.pts.size(), offset + per_path));
        svg.polyline(seg, SvgCanvas::hsv(240.0 * k / std::max(1, n_angles - 1), 0.8, 0.85), 0.8);
        offset += per_path;
    }
    w.write_text("fan.svg", svg.str());
    res.notes.push_back("fan slope " + num17(fan_fit.slope) + " single " +
                        num17(single_fit.slope));
    double tol = cfg.number_or("tolerance", 0.10);
    check_gate(res, cfg, std::abs(fan_fit.slope - single_fit.slope) <= tol,
               "fan vs single flow line dimension");
}

void run_dim_estimate(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    PointCloud cloud = cloud_from_csv(cfg.text("input"));
    std::vector<double> scales =
        cfg.has("scales") ? cfg.numbers_or("scales", {}) : auto_scales(cloud, 1e-4);
    ExponentFit fit = box_count(cloud, scales);
    json jf = fit_to_json(fit);
    std::vector<double> inv, counts;
    std::vector<std::vector<std::string>> rows;
    for (double r : scales) {
        std::size_t n = box_occupancy(cloud, r);
        inv.push_back(1.0 / r);
        counts.push_back(static_cast<double>(n));
        rows.push_back({num17(r), std::to_string(n)});
    }
    w.write_csv("boxes.csv", {"scale", "count"}, rows);
    if (cfg.has("expected")) {
        jf["expected"] = cfg.number("expected");
        double tol = cfg.number_or("tolerance", 0.1);
        check_gate(res, cfg, std::abs(fit.slope - cfg.number("expected")) <= tol, "box dimension");
    }
    w.write_json("fit.json", jf);
    loglog_plot(w, "loglog.svg", inv, counts, fit, cfg.number_or("expected", fit.slope), "1/r");
    res.notes.push_back("box slope " + num17(fit.slope));
}

void run_exponent(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    std::string which = cfg.text_or("which", "derivative-moment");
    if (which == "derivative-moment") {
        double kappa = cfg.number("kappa");
        double r;
        if (cfg.has("r")) {
            r = cfg.number("r");
        } else {
            // canonical Eq-(3.11) parameter of a kappa' chain at theta = 0,
            // with this chain playing the kappa' role
            r = -4.0 / kappa;
        }
        Cpx z(cfg.number_or("zx", 0.0), cfg.number_or("zy", 1.0));
        std::vector<double> eps = cfg.numbers_or("eps", {0.25, 0.125, 0.0625, 0.03125});
        double R = cfg.number_or("escape_radius", 2.0 * std::abs(z) + 2.0);
        int replicas = static_cast<int>(cfg.integer_or("replicas", 10000));
        DerivMomentOptions opts;
        opts.dt = cfg.number_or("dt", 2e-4);
        opts.threads = config_threads(cfg);
        DerivMomentResult out =
            derivative_moment_scaling(kappa, r, z, eps, R, replicas, cfg.seed(), opts);
        std::vector<std::vector<std::string>> rows;
        std::vector<double> xs, ys;
        for (const auto& row : out.rows) {
            rows.push_back({num17(row.scale), num17(row.value), num17(row.stderr_),
                            std::to_string(row.hits), std::to_string(row.n)});
            xs.push_back(row.scale);
            ys.push_back(row.value);
        }
        w.write_csv("rows.csv", {"eps", "mean", "stderr", "hits", "n"}, rows);
        json jf = fit_to_json(out.fit);
        jf["expected_slope"] = out.expected_slope;
        jf["r"] = r;
        w.write_json("fit.json", jf);
        loglog_plot(w, "loglog.svg", xs, ys, out.fit, out.expected_slope, "eps");
        res.notes.push_back("slope " + num17(out.fit.slope) + " expected " +
                            num17(out.expected_slope));
        double rel = std::abs(out.fit.slope - out.expected_slope) /
                     std::max(1e-12, std::abs(out.expected_slope));
        check_gate(res, cfg, rel <= cfg.number_or("rel_tolerance", 0.2),
                   "derivative moment slope");
        return;
    }
    if (which != "non-intersection")
        throw std::invalid_argument("exponent: which must be derivative-moment or non-intersection");

    double kappa = cfg.number("kappa");
    IgConstants c = ig_constants(kappa);
    double theta1 = cfg.number_or("theta1", M_PI / 4.0);
    double theta2 = cfg.number_or("theta2", -M_PI / 4.0);
    double a = cfg.number_or("a", c.lambda_prime);
    double b = cfg.number_or("b", -c.lambda_prime);
    std::vector<double> eps = cfg.numbers_or("eps", {0.2, 0.1, 0.05});
    int grid = static_cast<int>(cfg.integer_or("grid", 256));
    int replicas = static_cast<int>(cfg.integer_or("replicas", 2000));
    NonIntersectOptions opts;
    opts.threads = config_threads(cfg);
    if (cfg.has("max_steps"))
        opts.max_steps = static_cast<int>(cfg.integer("max_steps"));
    NonIntersectResult out = nonintersection_experiment(kappa, theta1, theta2, a, b, eps, grid,
                                                        replicas, cfg.seed(), opts);
    std::vector<std::vector<std::string>> rows;
    std::vector<double> xs, ys;
    for (const auto& row : out.rows) {
        rows.push_back({num17(row.eps), std::to_string(row.n),
                        std::to_string(row.non_intersecting), std::to_string(row.e_delta),
                        num17(row.frequency), num17(row.stderr_)});
        xs.push_back(row.eps);
        ys.push_back(row.frequency);
    }
    w.write_csv("rows.csv", {"eps", "n", "non_intersecting", "e_delta", "frequency", "stderr"},
                rows);
    json jf = fit_to_json(out.fit);
    jf["alpha_formula"] = out.expected_alpha;
    w.write_json("fit.json", jf);
    loglog_plot(w, "loglog.svg", xs, ys, out.fit, out.expected_alpha, "eps");
    res.notes.push_back("slope " + num17(out.fit.slope) + " alpha(Eq 3.2) " +
                        num17(out.expected_alpha));
}

void run_martingale_check(const ExperimentConfig& cfg, ArtifactWriter& w, RunResult& res) {
    std::string which = cfg.text_or("which", "one-point");
    int replicas = static_cast<int>(cfg.integer_or("replicas", 10000));
    double dt = cfg.number_or("dt", 1e-4);
    int threads = config_threads(cfg);
    MartingaleCheck chk;
    if (which == "one-point") {
        double kappa = cfg.number("kappa");
        double r = cfg.has("r") ? cfg.number("r") : -4.0 / kappa;
        Cpx z(cfg.number_or("zx", 0.0), cfg.number_or("zy", 1.0));
        std::vector<double> cps = cfg.numbers_or("checkpoints", {0.05, 0.1, 0.2, 0.4});
        chk = one_point_constancy_check(kappa, r, z, cps, replicas, dt, cfg.seed(), threads);
    } else if (which == "two-path") {
        double kappa = cfg.number("kappa");
        IgConstants c = ig_constants(kappa);
        double theta1 = cfg.number_or("theta1", M_PI / 4.0);
        double theta2 = cfg.number_or("theta2", -M_PI / 4.0);
        double a = cfg.number_or("a", c.lambda_prime);
        double b = cfg.number_or("b", -c.lambda_prime);
        double x1 = cfg.number_or("x1", -0.05);
        double x2 = cfg.number_or("x2", 0.05);
        std::vector<double> cps = cfg.numbers_or("checkpoints", {0.0005, 0.001, 0.002, 0.004});
        chk = two_path_constancy_check(kappa, theta1, theta2, a, b, x1, x2, cps, replicas, dt,
                                       cfg.seed(), threads);
    } else {
        throw std::invalid_argument("martingale-check: which must be one-point or two-path");
    }
    std::vector<std::vector<std::string>> rows;
    for (std::size_t i = 0; i < chk.t.size(); ++i)
        rows.push_back({num17(chk.t[i]), num17(chk.mean[i].mean), num17(chk.mean[i].stderr_),
                        std::to_string(chk.mean[i].n)});
    w.write_csv("checkpoints.csv", {"t", "mean", "stderr", "n"}, rows);
    w.write_json("drift.json", {{"max_drift_sigmas", chk.max_drift_sigmas}});
    res.notes.push_back("max drift " + num17(chk.max_drift_sigmas) + " sigma");
    check_gate(res, cfg, chk.max_drift_sigmas <= cfg.number_or("drift_tolerance", 3.0),
               "martingale constancy");
}

} // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read config " + path);
    return ExperimentConfig(json::parse(in));
}

double ExperimentConfig::number(const std::string& key) const {
    if (!data_.contains(key))
        throw std::invalid_argument("missing config key: " + key);
    return data_.at(key).get<double>();
}

double ExperimentConfig::number_or(const std::string& key, double fallback) const {
    return data_.contains(key) ? data_.at(key).get<double>() : fallback;
}

long ExperimentConfig::integer(const std::string& key) const {
    if (!data_.contains(key))
        throw std::invalid_argument("missing config key: " + key);
    return data_.at(key).get<long>();
}

long ExperimentConfig::integer_or(const std::string& key, long fallback) const {
    return data_.contains(key) ? data_.at(key).get<long>() : fallback;
}

std::string ExperimentConfig::text(const std::string& key) const {
    if (!data_.contains(key))
        throw std::invalid_argument("missing config key: " + key);
    return data_.at(key).get<std::string>();
}

std::string ExperimentConfig::text_or(const std::string& key, const std::string& fallback) const {
    return data_.contains(key) ? data_.at(key).get<std::string>() : fallback;
}

bool ExperimentConfig::flag_or(const std::string& key, bool fallback) const {
    return data_.contains(key) ? data_.at(key).get<bool>() : fallback;
}

std::vector<double> ExperimentConfig::numbers_or(const std::string& key,
                                                 std::vector<double> fallback) const {
    if (!data_.contains(key))
        return fallback;
    return data_.at(key).get<std::vector<double>>();
}

std::uint64_t ExperimentConfig::seed() const {
    if (!data_.contains("seed"))
        throw std::invalid_argument("missing config key: seed (mandatory for stochastic runs)");
    return data_.at("seed").get<std::uint64_t>();
}

std::vector<std::string> ExperimentConfig::validate(const std::string& subcommand) const {
    static const std::map<std::string, std::vector<std::string>> required = {
        {"formulas", {"kappa"}},
        {"phase-diagram", {}},
        {"sample-sle", {"kappa", "seed"}},
        {"sample-sle-rho", {"kappa", "seed", "rho", "force_point"}},
        {"trace", {}},
        {"gff", {"kappa", "seed"}},
        {"flowline", {"kappa", "seed"}},
        {"lightcone", {"kappa", "seed"}},
        {"fan", {"kappa", "theta", "seed"}},
        {"dim-estimate", {"input"}},
        {"exponent", {"kappa", "seed"}},
        {"martingale-check", {"kappa", "seed"}},
    };
    auto it = required.find(subcommand);
    std::vector<std::string> missing;
    if (it == required.end()) {
        missing.push_back("unknown subcommand: " + subcommand);
        return missing;
    }
    for (const auto& key : it->second)
        if (!data_.contains(key))
            missing.push_back("missing: " + key);
    if (subcommand == "trace" && !data_.contains("input"))
        for (const char* key : {"kappa", "seed"})
            if (!data_.contains(key))
                missing.push_back(std::string("missing: ") + key);
    if (subcommand == "lightcone" && !data_.contains("theta") && !data_.contains("rho"))
        missing.push_back("missing: theta or rho");
    return missing;
}

std::filesystem::path default_output_dir() {
    if (const char* env = std::getenv(kOutputDirEnv))
        return fs::path(env);
    return fs::path("runs");
}

RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& config) {
    std::vector<std::string> problems = config.validate(subcommand);
    if (!problems.empty()) {
        std::string msg = "config schema errors:";
        for (const auto& p : problems)
            msg += " [" + p + "]";
        throw std::invalid_argument(msg);
    }

    fs::path out_dir = config.has("out") ? fs::path(config.text("out")) : default_output_dir();
    fs::path run_dir = out_dir / config.text_or("name", subcommand);
    ArtifactWriter writer(run_dir);
    RunResult res;
    try {
        if (subcommand == "formulas")
            run_formulas(config, writer, res);
        else if (subcommand == "phase-diagram")
            run_phase_diagram(config, writer, res);
        else if (subcommand == "sample-sle" || subcommand == "sample-sle-rho")
            run_sample_sle(config, writer, res);
        else if (subcommand == "trace")
            run_trace(config, writer, res);
        else if (subcommand == "gff")
            run_gff(config, writer, res);
        else if (subcommand == "flowline")
            run_flowline(config, writer, res);
        else if (subcommand == "lightcone")
            run_lightcone(config, writer, res);
        else if (subcommand == "fan")
            run_fan(config, writer, res);
        else if (subcommand == "dim-estimate")
            run_dim_estimate(config, writer, res);
        else if (subcommand == "exponent")
            run_exponent(config, writer, res);
        else if (subcommand == "martingale-check")
            run_martingale_check(config, writer, res);
        else
            throw std::invalid_argument("unknown subcommand " + subcommand);

        json manifest = {{"subcommand", subcommand},
                         {"version", kVersion},
                         {"config", config.json()},
                         {"seed_derivation",
                          "philox4x32-10 counter-based; replica i uses stream index i "
                          "(key = seed), so outputs are independent of scheduling"},
                         {"artifacts", writer.names()},
                         {"notes", res.notes},
                         {"status", res.status}};
        writer.write_json("manifest.json", manifest);
    } catch (...) {
        writer.rollback();
        throw;
    }
    res.artifacts = writer.names();
    return res;
}

std::string report_run(const std::filesystem::path& run_dir) {
    fs::path manifest_path = run_dir / "manifest.json";
    std::vector<fs::path> manifests;
    if (fs::exists(manifest_path)) {
        manifests.push_back(manifest_path);
    } else if (fs::is_directory(run_dir)) {
        for (const auto& entry : fs::directory_iterator(run_dir))
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
                manifests.push_back(entry.path() / "manifest.json");
        std::sort(manifests.begin(), manifests.end());
    }
    if (manifests.empty())
        throw std::runtime_error("no manifest.json under " + run_dir.string());

    std::string text = "# run report\n";
    for (const auto& mp : manifests) {
        std::ifstream in(mp);
        json manifest = json::parse(in);
        fs::path dir = mp.parent_path();
        text += "\n## " + dir.filename().string() + " (" +
                manifest.value("subcommand", "?") + ")\n\n";
        for (const auto& note : manifest.value("notes", std::vector<std::string>{}))
            text += "- " + note + "\n";
        for (const auto& art : manifest.value("artifacts", std::vector<std::string>{})) {
            fs::path ap = dir / art;
            if (ap.extension() == ".json" && art != "manifest.json") {
                std::ifstream jin(ap);
                json j = json::parse(jin);
                text += "- " + art + ": ";
                if (j.contains("slope"))
                    text += "slope " + j.at("slope").dump();
                if (j.contains("expected_slope"))
                    text += " (predicted " + j.at("expected_slope").dump() + ")";
                if (j.contains("predicted_dim"))
                    text += " (predicted " + j.at("predicted_dim").dump() + ")";
                if (j.contains("max_drift_sigmas"))
                    text += "max drift " + j.at("max_drift_sigmas").dump() + " sigma";
                if (j.contains("fluctuation_scale"))
                    text += "fluctuation scale " + j.at("fluctuation_scale").dump();
                text += "\n";
            } else {
                text += "- " + art + "\n";
            }
        }
    }
    std::ofstream out(run_dir / "report.md", std::ios::binary);
    out << text;
    return text;
}

} // namespace ig
