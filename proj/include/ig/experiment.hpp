#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace ig {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kOutputDirEnv = "IGSIM_OUTPUT_DIR";

// Key-value experiment configuration: a JSON config file merged with CLI flag
// overrides (flags win).  Every run writes `manifest.json` with the resolved
// config, code version, and the seed-derivation rule, enough to reproduce the
// artifacts byte for byte.
class ExperimentConfig {
public:
    ExperimentConfig() : data_(nlohmann::json::object()) {}
    explicit ExperimentConfig(nlohmann::json data) : data_(std::move(data)) {}

    static ExperimentConfig from_file(const std::string& path);

    void set(const std::string& key, nlohmann::json v) { data_[key] = std::move(v); }
    bool has(const std::string& key) const { return data_.contains(key); }

    double number(const std::string& key) const;
    double number_or(const std::string& key, double fallback) const;
    long integer(const std::string& key) const;
    long integer_or(const std::string& key, long fallback) const;
    std::string text(const std::string& key) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    bool flag_or(const std::string& key, bool fallback) const;
    std::vector<double> numbers_or(const std::string& key, std::vector<double> fallback) const;

    std::uint64_t seed() const; // mandatory for stochastic subcommands

    const nlohmann::json& json() const { return data_; }

    // schema check: returns every violating/missing key
    std::vector<std::string> validate(const std::string& subcommand) const;

private:
    nlohmann::json data_;
};

struct RunResult {
    int status = 0; // nonzero when --check found a violated gate
    std::vector<std::string> artifacts;
    std::vector<std::string> notes;
};

/// Execute a subcommand: writes artifacts atomically into
/// <output_dir>/<name or subcommand>/, removing partial outputs on failure.
RunResult run_experiment(const std::string& subcommand, const ExperimentConfig& config);

/// Summarize a run directory (requires manifest.json): writes report.md and
/// returns its text.  Numbers are quoted from the CSV/JSON artifacts, never
/// recomputed.
std::string report_run(const std::filesystem::path& run_dir);

std::filesystem::path default_output_dir();

} // namespace ig
