#include <CLI11.hpp>
#include <iostream>

#include "mimoee/config_io.hpp"
#include "mimoee/experiments.hpp"

int main(int argc, char** argv) {
    using namespace mimoee;

    CLI::App app{"Energy-efficiency analysis of MIMO slow-fading links: "
                 "named experiments producing deterministic CSV sweeps"};
    app.set_help_all_flag("--help-all");

    std::string experiment;
    std::string config_path;
    std::string grid_text;
    std::string out_path;
    std::uint64_t seed = 1;
    int samples = -1;
    int threads = 1;

    std::string names;
    for (const auto& n : experiment_names()) names += "\n  " + n;
    app.add_option("experiment", experiment, "experiment name:" + names)
        ->required();
    app.add_option("--config", config_path,
                   "key = value config file (SI units; _mW/_dBm accepted)");
    app.add_option("--seed", seed, "RNG seed (default 1)");
    app.add_option("--samples", samples,
                   "Monte-Carlo samples / channel draws (default per "
                   "experiment)");
    app.add_option("--out", out_path, "output CSV path (default <name>.csv)");
    app.add_option("--grid", grid_text, "sweep axis min:max:points:lin|log");
    app.add_option("--threads", threads,
                   "worker threads; output is identical for any value");

    CLI11_PARSE(app, argc, argv);

    try {
        ExperimentSpec spec;
        spec.name = experiment_from_string(experiment);
        if (!config_path.empty()) spec.config = load_config(config_path);
        else spec.config.validate();
        if (!grid_text.empty()) {
            spec.grid = parse_grid(grid_text);
            spec.grid_given = true;
        }
        spec.seed = seed;
        spec.samples = samples > 0 ? samples
                       : spec.name == ExperimentName::compare_pa_upa ? 48
                                                                     : 10000;
        spec.threads = threads;
        spec.output_path =
            out_path.empty() ? experiment + ".csv" : out_path;

        const ExperimentSummary result = run_experiment(spec);
        std::cout << result.summary_text;
        std::cout << "wrote " << spec.output_path << "\n";
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
