#pragma once

#include "xsim/types.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace xsim::cli {

/// Bad flag combination detected after parsing; maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PreprocessFlags {
    std::optional<double> span_factor;
    std::optional<double> acf_z;
    std::optional<double> lambda_lower;
    std::optional<double> lambda_upper;
    bool no_seasonal = false;
    bool no_smoothing = false;

    [[nodiscard]] bool any() const;
    [[nodiscard]] PreprocessConfig resolve(Frequency frequency) const;
};

struct BuildRefOptions {
    std::string corpus;
    std::size_t n = 0;
    std::optional<int> h;
    std::string frequency;
    std::string out;
    PreprocessFlags preprocess;
};

struct ForecastOptions {
    std::string targets;
    std::string ref;
    std::string corpus;
    std::string distance = "dtw";
    std::size_t k = 500;
    std::string aggregator = "median";
    double alpha = 0.05;
    double delta_step = 0.01;
    std::optional<int> cut;
    std::string out;
    std::string plot_csv;
    std::string actuals;
    PreprocessFlags preprocess;
};

struct EvaluateOptions {
    std::vector<std::string> forecasts;
    std::string history;
    std::string actuals;
    double alpha = 0.05;
    std::string out_csv;
    std::string out_json;
    std::string plot_csv;
    // k-sweep mode
    std::vector<std::size_t> sweep_k;
    ForecastOptions sweep;
};

struct SynthOptions {
    std::size_t count = 100;
    std::size_t min_length = 40;
    std::size_t max_length = 80;
    std::string frequency = "monthly";
    std::uint64_t seed = 1;
    std::string out;
};

/// Per-run bookkeeping: timings and the reproducibility manifest.
class RunContext {
public:
    RunContext(std::string command, std::vector<std::string> argv, unsigned threads);

    [[nodiscard]] unsigned threads() const noexcept { return threads_; }
    void set_config(nlohmann::json config) { manifest_["config"] = std::move(config); }
    void add_input(const std::string& role, const std::string& path);
    void add_output(const std::string& role, const std::string& path);
    void set_seed(std::uint64_t seed) { manifest_["seed"] = seed; }
    void add_timing(const std::string& phase, double seconds);

    /// Writes the manifest to `path`, or to stderr when `path` is empty.
    void write_manifest(const std::string& path) const;

private:
    nlohmann::json manifest_;
    unsigned threads_;
};

void run_build_ref(const BuildRefOptions& options, RunContext& ctx);
void run_forecast(const ForecastOptions& options, RunContext& ctx);
void run_calibrate(const ForecastOptions& options, RunContext& ctx);
void run_evaluate(const EvaluateOptions& options, RunContext& ctx);
void run_synth(const SynthOptions& options, RunContext& ctx);

}  // namespace xsim::cli
