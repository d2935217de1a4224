#pragma once

#include "resmin/adaptivity.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace resmin {

struct ExperimentConfig {
    std::string experiment = "smooth"; // smooth | lshape | advdiff | linear
    std::vector<int> degrees{1, 2, 3};
    std::string mode = "uniform"; // uniform | adaptive
    double theta = 0.5;
    int iterations = 0; // 0: per-experiment default
    std::string out = "out";
    std::uint64_t seed = 12345;
    std::string mark = "eta"; // eta | eta_tilde
    std::vector<int> dump_iterations{0, 5, 10};

    /// Throws std::invalid_argument on any out-of-range field.
    void validate() const;
};

/// Reads the keys experiment, p (int or list), mode, theta, iters, out,
/// seed, mark, dump; unknown keys are rejected.
ExperimentConfig config_from_json(const std::string& text);
std::string config_to_json(const ExperimentConfig& config);
/// Applies one "key=value"-style override using the same key names.
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Iteration count used when the config leaves it at 0.
int default_iterations(const std::string& experiment, const std::string& mode, int p);

/// Least-squares slope of log(y) against log(x) over the points with
/// positive y; NaN with fewer than two points.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Runs of one degree, with fitted slopes and localisation metrics.
struct DegreeSummary {
    int p = 0;
    AdaptiveRun run;
    int fit_first = 2;  // first record in the main fit
    int tail_first = 0; // first record in the tail fit
    std::vector<std::pair<std::string, double>> slopes;
    std::vector<std::pair<std::string, double>> tail_slopes;
    double corner_fraction = -1.0;      // lshape: marked within 0.25 of the origin, iterations 5..9
    double corner_fraction_all = -1.0;  // same, pooled over every iteration >= 5
    double layer_density_ratio = -1.0;  // advdiff: marked density in the outflow strip / outside
    double effectivity_variation = 0.0; // (max - min) / min over the last three records
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<DegreeSummary> degrees;
    std::vector<std::string> io_errors;
    std::string summary_json;
};

/// Executes the configured runs and writes, for each p, <out>/p<p>/
/// convergence.csv, errors.csv, log.jsonl and mesh dumps, plus
/// <out>/summary.json and <out>/config.json. I/O failures are collected
/// in io_errors; computation continues.
ExperimentResult run_experiment(const ExperimentConfig& config, bool write_files = true);

/// The series names used in slope tables.
const std::vector<std::string>& slope_series();
/// Series value of a record by name.
double series_value(const IterationRecord& r, const std::string& name);

} // namespace resmin
