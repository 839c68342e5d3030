#include <cstdio>
#include <exception>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ig/experiment.hpp"

using nlohmann::json;

namespace {

struct SubState {
    CLI::App* app = nullptr;
    std::shared_ptr<json> flags = std::make_shared<json>(json::object());
    std::shared_ptr<std::string> config_file = std::make_shared<std::string>();
};

void add_common(SubState& s) {
    auto f = s.flags;
    s.app->add_option_function<std::string>(
        "--config", [f, s](const std::string& v) { *s.config_file = v; },
        "JSON config file; explicit flags override its keys");
    s.app->add_option_function<std::string>(
        "--out", [f](const std::string& v) { (*f)["out"] = v; }, "output directory");
    s.app->add_option_function<std::string>(
        "--name", [f](const std::string& v) { (*f)["name"] = v; }, "run name (subdirectory)");
    s.app->add_option_function<long long>(
        "--parallelism", [f](const long long& v) { (*f)["parallelism"] = v; },
        "worker threads (results are independent of this)");
    s.app->add_flag_function(
        "--check", [f](std::int64_t) { (*f)["check"] = true; },
        "exit nonzero when the run's acceptance gate fails");
}

void add_number(SubState& s, const std::string& flag, const std::string& key,
                const std::string& help) {
    auto f = s.flags;
    s.app->add_option_function<double>(
        "--" + flag, [f, key](const double& v) { (*f)[key] = v; }, help);
}

void add_integer(SubState& s, const std::string& flag, const std::string& key,
                 const std::string& help) {
    auto f = s.flags;
    s.app->add_option_function<long long>(
        "--" + flag, [f, key](const long long& v) { (*f)[key] = v; }, help);
}

void add_numbers(SubState& s, const std::string& flag, const std::string& key,
                 const std::string& help) {
    auto f = s.flags;
    s.app->add_option_function<std::vector<double>>(
        "--" + flag, [f, key](const std::vector<double>& v) { (*f)[key] = v; }, help);
}

void add_text(SubState& s, const std::string& flag, const std::string& key,
              const std::string& help) {
    auto f = s.flags;
    s.app->add_option_function<std::string>(
        "--" + flag, [f, key](const std::string& v) { (*f)[key] = v; }, help);
}

void add_switch(SubState& s, const std::string& flag, const std::string& key,
                const std::string& help) {
    auto f = s.flags;
    s.app->add_flag_function(
        "--" + flag, [f, key](std::int64_t) { (*f)[key] = true; }, help);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"SLE/GFF imaginary-geometry simulation toolkit"};
    app.require_subcommand(1);

    std::vector<std::pair<std::string, std::string>> subs = {
        {"formulas", "evaluate the closed-form dimension/exponent layer"},
        {"phase-diagram", "classify the (kappa, rho) plane and render it"},
        {"sample-sle", "sample a plain SLE_kappa driving function"},
        {"sample-sle-rho", "sample an SLE_kappa(rho) driving function"},
        {"trace", "trace a Loewner chain to a curve"},
        {"gff", "sample or calibrate the discrete Gaussian free field"},
        {"flowline", "trace a single flow line of a sampled field"},
        {"lightcone", "accumulate an angle-varying light cone cloud"},
        {"fan", "accumulate a fixed-angle fan cloud"},
        {"dim-estimate", "box-counting dimension of a point cloud CSV"},
        {"exponent", "derivative-moment or non-intersection exponent experiment"},
        {"martingale-check", "empirical martingale constancy checks"},
    };

    std::vector<SubState> states(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        SubState& s = states[i];
        s.app = app.add_subcommand(subs[i].first, subs[i].second);
        add_common(s);
        add_number(s, "kappa", "kappa", "SLE parameter in (0,4)");
        add_number(s, "theta", "theta", "angle in [0,pi]");
        add_number(s, "rho", "rho", "single force point weight");
        add_integer(s, "seed", "seed", "master seed (required for stochastic runs)");
        add_number(s, "dt", "dt", "capacity step");
        add_integer(s, "steps", "steps", "number of driving steps");
        add_integer(s, "grid", "grid", "grid cells across the rectangle");
        add_number(s, "scale", "scale", "GFF fluctuation scale");
        add_integer(s, "replicas", "replicas", "Monte Carlo replicas");
        add_integer(s, "max-steps", "max_steps", "tracer step budget");
    }

    auto at = [&](const std::string& name) -> SubState& {
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i].first == name)
                return states[i];
        throw std::logic_error("no subcommand " + name);
    };

    {
        SubState& s = at("phase-diagram");
        add_integer(s, "kappa-steps", "kappa_steps", "cells along kappa");
        add_integer(s, "rho-steps", "rho_steps", "cells along rho");
        add_number(s, "rho-min", "rho_min", "lower rho bound");
        add_number(s, "rho-max", "rho_max", "upper rho bound");
    }
    {
        SubState& s = at("sample-sle-rho");
        add_numbers(s, "rhos", "rho", "force point weights");
        add_numbers(s, "force-point", "force_point", "force point positions");
        add_switch(s, "direct-euler", "direct_euler", "bypass the Bessel route");
        s.app->get_option("--rho")->excludes(s.app->get_option("--rhos"));
    }
    {
        SubState& s = at("trace");
        add_text(s, "input", "input", "driving.json to trace");
        add_switch(s, "midpoints", "midpoints", "emit half-step tips too");
        add_numbers(s, "rhos", "rho", "force point weights");
        add_numbers(s, "force-point", "force_point", "force point positions");
    }
    {
        SubState& s = at("gff");
        add_text(s, "mode", "mode", "sample | calibrate");
        add_numbers(s, "boundary-breaks", "boundary_breaks", "bottom-edge break positions");
        add_numbers(s, "boundary-values", "boundary_values", "coupling values between breaks");
    }
    for (const char* name : {"flowline", "lightcone", "fan"}) {
        SubState& s = at(name);
        add_numbers(s, "boundary-breaks", "boundary_breaks", "bottom-edge break positions");
        add_numbers(s, "boundary-values", "boundary_values", "coupling values between breaks");
        add_number(s, "step-factor", "step_factor", "step as a fraction of grid spacing");
    }
    {
        SubState& s = at("flowline");
        add_number(s, "angle", "angle", "flow line angle");
        add_number(s, "start-x", "start_x", "start x");
        add_number(s, "start-y", "start_y", "start y");
    }
    {
        SubState& s = at("lightcone");
        add_integer(s, "n-paths", "n_paths", "angle-varying paths");
        add_integer(s, "max-changes", "max_changes", "angle changes per path");
        add_numbers(s, "scales", "scales", "box-count scales");
        add_number(s, "tolerance", "tolerance", "check band around the predicted dimension");
    }
    {
        SubState& s = at("fan");
        add_integer(s, "n-angles", "n_angles", "fan angles");
        add_numbers(s, "scales", "scales", "box-count scales");
        add_number(s, "tolerance", "tolerance", "check band for |fan - single|");
    }
    {
        SubState& s = at("dim-estimate");
        add_text(s, "input", "input", "cloud CSV (x,y header)");
        add_numbers(s, "scales", "scales", "box-count scales");
        add_number(s, "expected", "expected", "expected slope");
        add_number(s, "tolerance", "tolerance", "check band");
    }
    {
        SubState& s = at("exponent");
        add_text(s, "which", "which", "derivative-moment | non-intersection");
        add_number(s, "r", "r", "moment parameter");
        add_number(s, "zx", "zx", "target point x");
        add_number(s, "zy", "zy", "target point y");
        add_numbers(s, "eps", "eps", "scales");
        add_number(s, "escape-radius", "escape_radius", "sigma_R radius");
        add_number(s, "theta1", "theta1", "left flow line angle");
        add_number(s, "theta2", "theta2", "right flow line angle");
        add_number(s, "a", "a", "left boundary value");
        add_number(s, "b", "b", "right boundary value");
        add_number(s, "rel-tolerance", "rel_tolerance", "relative slope tolerance");
    }
    {
        SubState& s = at("martingale-check");
        add_text(s, "which", "which", "one-point | two-path");
        add_number(s, "r", "r", "moment parameter");
        add_number(s, "zx", "zx", "target point x");
        add_number(s, "zy", "zy", "target point y");
        add_numbers(s, "checkpoints", "checkpoints", "capacity checkpoints");
        add_number(s, "x1", "x1", "left seed");
        add_number(s, "x2", "x2", "right seed");
        add_number(s, "theta1", "theta1", "left angle");
        add_number(s, "theta2", "theta2", "right angle");
        add_number(s, "drift-tolerance", "drift_tolerance", "max drift in stderr units");
    }

    CLI::App* report = app.add_subcommand("report", "summarize a run directory");
    std::string report_dir;
    report->add_option("dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (report->parsed()) {
            std::cout << ig::report_run(report_dir);
            return 0;
        }
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (!states[i].app->parsed())
                continue;
            json base = json::object();
            if (!states[i].config_file->empty())
                base = ig::ExperimentConfig::from_file(*states[i].config_file).json();
            for (auto& [k, v] : states[i].flags->items())
                base[k] = v; // flags win
            ig::RunResult res = ig::run_experiment(subs[i].first, ig::ExperimentConfig(base));
            for (const auto& note : res.notes)
                std::cout << note << "\n";
            return res.status;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
