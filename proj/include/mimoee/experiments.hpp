#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mimoee/efficiency.hpp"

namespace mimoee {

inline constexpr const char* kVersion = "0.1.0";

enum class ExperimentName {
    sweep_power_csitr,
    sweep_rate,
    sweep_power_nocsit,
    optimal_training_curve,
    optimal_antennas_curve,
    siso_analysis,
    compare_pa_upa,
};

const char* to_string(ExperimentName name);
ExperimentName experiment_from_string(const std::string& name);
std::vector<std::string> experiment_names();

struct GridAxis {
    double lo = 1e-5;
    double hi = 10.0;
    int points = 41;
    bool log_scale = true;

    std::vector<double> values() const;
};

/// "min:max:points:lin|log"
GridAxis parse_grid(const std::string& text);

struct ExperimentSpec {
    ExperimentName name = ExperimentName::sweep_power_nocsit;
    SystemConfig config;
    GridAxis grid;
    bool grid_given = false; // false -> per-experiment default axis
    std::uint64_t seed = 1;
    int samples = 10000;
    int threads = 1;
    std::string output_path = "out.csv";
};

struct ExperimentSummary {
    std::string csv;          // full file contents, also written to output_path
    std::string summary_text; // peak/argmax one-liners for stdout
};

/// Runs one experiment: deterministic CSV for a given (spec, seed) regardless
/// of spec.threads, header comment with the resolved config, summary returned.
ExperimentSummary run_experiment(const ExperimentSpec& spec);

/// Deterministic scheduling helper: f(i) for i in [0, n), results landing in
/// index order no matter how many workers run.
void parallel_for(int n, int threads, const std::function<void(int)>& f);

} // namespace mimoee
