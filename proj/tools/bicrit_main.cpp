// bicrit: batch experiment runner for two-loss online learning. `run`
// executes an algorithm/adversary grid and writes a CSV summary; `slope`
// fits a log-log growth exponent to a summary file.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bicrit/harness.hpp"

int main(int argc, char** argv) {
    CLI::App app{"two-loss online learning experiment harness"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "run an experiment batch");
    std::string config_path, algorithm, adversary, horizons, seeds, out, eta, alpha, delta, c, k;
    run->add_option("--config", config_path, "flat key = value config file");
    run->add_option("--algorithm", algorithm);
    run->add_option("--adversary", adversary);
    run->add_option("--T", horizons, "comma-separated horizon list");
    run->add_option("--alpha", alpha);
    run->add_option("--delta", delta);
    run->add_option("--c", c);
    run->add_option("--K", k);
    run->add_option("--eta", eta);
    run->add_option("--seeds", seeds, "comma list and/or lo-hi ranges");
    run->add_option("--out", out, "CSV output path (default stdout)");

    auto* slope = app.add_subcommand("slope", "fit a growth exponent to a CSV");
    std::string slope_in;
    slope->add_option("--in", slope_in, "CSV produced by `run`")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            bicrit::ExperimentConfig cfg;
            if (!config_path.empty()) cfg = bicrit::ExperimentConfig::from_file(config_path);
            if (!algorithm.empty()) cfg.apply_override("algorithm", algorithm);
            if (!adversary.empty()) cfg.apply_override("adversary", adversary);
            if (!horizons.empty()) cfg.apply_override("T", horizons);
            if (!alpha.empty()) cfg.apply_override("alpha", alpha);
            if (!delta.empty()) cfg.apply_override("delta", delta);
            if (!c.empty()) cfg.apply_override("c", c);
            if (!k.empty()) cfg.apply_override("K", k);
            if (!eta.empty()) cfg.apply_override("eta", eta);
            if (!seeds.empty()) cfg.apply_override("seeds", seeds);
            if (!out.empty()) cfg.apply_override("out", out);

            const auto rows = bicrit::run_experiment(cfg);
            const std::string csv = bicrit::to_csv(rows);
            if (cfg.out.empty()) {
                std::cout << csv;
            } else {
                std::ofstream of(cfg.out);
                if (!of) throw std::runtime_error("cannot write " + cfg.out);
                of << csv;
            }
            return bicrit::all_ok(rows) ? 0 : 1;
        }

        std::ifstream in(slope_in);
        if (!in) throw std::runtime_error("cannot open " + slope_in);
        std::stringstream buffer;
        buffer << in.rdbuf();
        const auto rows = bicrit::rows_from_csv(buffer.str());
        const auto fit = bicrit::slope_fit(rows);
        std::printf("%.6f,%.6f\n", fit.exponent, fit.residual);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
