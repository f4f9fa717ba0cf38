#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bicrit/types.hpp"

namespace bicrit {

/// One experiment batch: algorithm x adversary x parameter grid x seeds.
struct ExperimentConfig {
    std::string algorithm = "sd";
    std::string adversary = "random-good";
    std::vector<long long> horizons = {4096};
    double alpha = 0.5;
    double delta = 0.25;
    double c = 0.5;
    int k = 4;
    std::optional<double> eta;
    std::string reactivation;  // "", "every:G", or "t1,t2,..."
    std::vector<std::uint64_t> seeds = {0, 1, 2};
    std::string out;  // CSV path; empty writes to stdout
    double amplitude = 0.2;
    std::string fll_variant = "coupled";
    std::string a2_update = "expected";
    int threads = 0;  // 0 = library default, 1 = serial
    std::string trace_out;  // optional per-row trace file prefix

    static ExperimentConfig from_file(const std::string& path);
    void apply_override(const std::string& key, const std::string& value);
    void validate() const;
};

/// One CSV row per (seed, T).
struct SummaryRow {
    std::uint64_t seed = 0;
    long long horizon = 0;
    int k = 0;
    double alpha = 0, delta = 0, c = 0;
    std::string algorithm, adversary;
    int world = -1;
    std::string status = "ok";
    double reg1_expected = 0, reg1_realized = 0;
    double reg2c_expected = 0, reg2c_realized = 0;
    long long switches = 0;
    int assumption2_pass = -1;        // 1/0, -1 = not applicable
    int assumption2prime_pass = -1;
    double sreg_max = 0;
    long long active_rounds_min = 0;
};

inline constexpr const char* kCsvHeader =
    "seed,T,K,alpha,delta,c,algorithm,adversary,world,status,reg1_expected,reg1_realized,"
    "reg2c_expected,reg2c_realized,switches,assumption2_pass,assumption2prime_pass,sreg_max,"
    "active_rounds_min";

/// Runs every (T, seed) job. Jobs execute in parallel when OpenMP is
/// available and threads != 1; rows always come back in (T, seed) order so
/// the CSV is byte-identical regardless of scheduling.
std::vector<SummaryRow> run_experiment(const ExperimentConfig& config);

/// Plain-loop reference used by tests and the benchmark.
std::vector<SummaryRow> run_experiment_serial(const ExperimentConfig& config);

std::string to_csv(const std::vector<SummaryRow>& rows);
bool all_ok(const std::vector<SummaryRow>& rows);

struct SlopeFit {
    double exponent = 0.0;
    double residual = 0.0;
};

/// Least-squares slope of log(mean of max(reg1_realized, reg2c_realized))
/// against log T over the ok rows. Needs >= 4 distinct T values.
SlopeFit slope_fit(const std::vector<SummaryRow>& rows);

/// Parses a CSV produced by to_csv (used by the slope subcommand).
std::vector<SummaryRow> rows_from_csv(const std::string& text);

// Shared config-string helpers.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);
std::vector<long long> parse_horizon_list(const std::string& text);
std::vector<long long> expand_reactivations(const std::string& spec, long long horizon);

}  // namespace bicrit
