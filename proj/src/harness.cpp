#include "bicrit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bicrit/adversaries.hpp"
#include "bicrit/meta_asl.hpp"
#include "bicrit/metrics.hpp"
#include "bicrit/rng.hpp"
#include "bicrit/sleeping.hpp"

namespace bicrit {

namespace {

constexpr std::uint64_t kStreamSalt = 0x73747265616d31ULL;
constexpr std::uint64_t kAlgoSalt = 0x616c676f313233ULL;

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

LearnerKind parse_learner(const std::string& name) {
    if (name == "ew") return LearnerKind::Ew;
    if (name == "sd") return LearnerKind::Sd;
    if (name == "fll") return LearnerKind::Fll;
    throw std::invalid_argument("unknown base learner: " + name);
}

FllVariant parse_fll_variant(const std::string& name) {
    if (name == "coupled") return FllVariant::Coupled;
    if (name == "grid") return FllVariant::Grid;
    throw std::invalid_argument("unknown fll_variant: " + name);
}

struct BuiltRow {
    LossStream stream;
    AssumptionParams params;
    int world;
};

BuiltRow build_stream(const ExperimentConfig& cfg, long long horizon, std::uint64_t seed) {
    const std::uint64_t stream_seed = Rng::mix(seed, kStreamSalt);
    if (cfg.adversary == "theorem1") {
        BuiltStream b = build_theorem1(horizon, stream_seed);
        return {std::move(b.stream), b.params, b.world};
    }
    if (cfg.adversary == "theorem2") {
        BuiltStream b = build_theorem2(horizon, cfg.alpha);
        return {std::move(b.stream), b.params, b.world};
    }
    if (cfg.adversary == "adaptive-lb") {
        LossStream s = adaptive_lb(horizon, cfg.alpha, cfg.c, cfg.delta, cfg.k, stream_seed);
        return {std::move(s), AssumptionParams{cfg.c, cfg.delta, cfg.alpha}, -1};
    }
    if (cfg.adversary == "appendixB") {
        BuiltStream b = build_appendixB(horizon, cfg.alpha, stream_seed);
        return {std::move(b.stream), b.params, b.world};
    }
    if (cfg.adversary == "linK") {
        BuiltStream b = build_linK(horizon, cfg.k, cfg.alpha, cfg.c, cfg.delta);
        return {std::move(b.stream), b.params, b.world};
    }
    if (cfg.adversary == "random-good") {
        AssumptionParams params{cfg.c, cfg.delta, cfg.alpha};
        LossStream s = random_bounded_variance(horizon, cfg.k, params, cfg.amplitude,
                                               stream_seed);
        return {std::move(s), params, -1};
    }
    if (cfg.adversary.rfind("file:", 0) == 0) {
        std::ifstream in(cfg.adversary.substr(5));
        if (!in) throw std::invalid_argument("cannot open stream file " + cfg.adversary.substr(5));
        LossStream s = LossStream::read(in);
        AssumptionParams params{cfg.c, cfg.delta, cfg.alpha};
        const StreamInfo& info = s.info();
        if (info.c >= 0) params.c = info.c;
        if (info.delta >= 0) params.delta = info.delta;
        if (info.alpha >= 0) params.alpha = info.alpha;
        const int world = info.world;
        return {std::move(s), params, world};
    }
    throw std::invalid_argument("unknown adversary: " + cfg.adversary);
}

RunTrace run_algorithm(const ExperimentConfig& cfg, const LossStream& stream,
                       const AssumptionParams& params, std::uint64_t seed) {
    const std::uint64_t algo_seed = Rng::mix(seed, kAlgoSalt);
    const FllVariant variant = parse_fll_variant(cfg.fll_variant);
    const std::string& name = cfg.algorithm;

    if (name == "ew" || name == "sd" || name == "fll") {
        return run_learner(parse_learner(name), stream, algo_seed, variant);
    }
    if (name.rfind("asl:", 0) == 0) {
        return asl_run(parse_learner(name.substr(4)), stream, params.alpha, algo_seed, variant);
    }
    if (name.rfind("a1:", 0) == 0) {
        return a1_run(stream, params, parse_learner(name.substr(3)), algo_seed, variant);
    }
    if (name == "a2") {
        A2Options options;
        options.eta = cfg.eta;
        options.reactivation_times = expand_reactivations(cfg.reactivation, stream.horizon());
        options.realized_update = cfg.a2_update == "realized";
        return a2_run_detailed(stream, params, options, algo_seed).trace;
    }
    if (name == "restart-a1" || name.rfind("restart-a1:", 0) == 0) {
        const LearnerKind base =
            name == "restart-a1" ? LearnerKind::Sd : parse_learner(name.substr(11));
        const auto times = expand_reactivations(cfg.reactivation, stream.horizon());
        return restart_a1_run(stream, params, base, times, algo_seed, variant);
    }
    if (name.rfind("a1-deact-restart:", 0) == 0) {
        return a1_deact_restart_run(stream, params, parse_learner(name.substr(17)), algo_seed,
                                    variant);
    }
    throw std::invalid_argument("unknown algorithm: " + cfg.algorithm);
}

SummaryRow run_single(const ExperimentConfig& cfg, long long horizon, std::uint64_t seed) {
    SummaryRow row;
    row.seed = seed;
    row.horizon = horizon;
    row.algorithm = cfg.algorithm;
    row.adversary = cfg.adversary;
    row.alpha = cfg.alpha;
    row.delta = cfg.delta;
    row.c = cfg.c;
    row.k = cfg.k;

    try {
        BuiltRow built = build_stream(cfg, horizon, seed);
        row.world = built.world;
        row.k = built.stream.num_experts();
        row.alpha = built.params.alpha;
        row.delta = built.params.delta;
        row.c = built.params.c;

        RunTrace trace = run_algorithm(cfg, built.stream, built.params, seed);
        const RegretReport report = make_report(trace, built.params.c);
        row.reg1_expected = report.reg1_expected;
        row.reg1_realized = report.reg1_realized;
        row.reg2c_expected = report.reg2c_expected;
        row.reg2c_realized = report.reg2c_realized;
        row.switches = report.switches;
        row.sreg_max = *std::max_element(report.sleeping.begin(), report.sleeping.end());
        row.active_rounds_min =
            *std::min_element(report.active_rounds.begin(), report.active_rounds.end());
        if (!built.stream.adaptive()) {
            row.assumption2_pass = check_assumption2(built.stream, built.params).all_pass ? 1 : 0;
        }
        row.assumption2prime_pass = check_assumption2_prime(trace, built.params).pass ? 1 : 0;

        if (!cfg.trace_out.empty()) {
            std::ofstream out(cfg.trace_out + ".T" + std::to_string(horizon) + ".seed" +
                              std::to_string(seed) + ".trace");
            trace.write(out);
        }
    } catch (const OracleStarvedError&) {
        row.status = "oracle-starved";
    } catch (const InfeasibleAdversaryError&) {
        row.status = "infeasible-adversary";
    }
    return row;
}

void warn_small_gaps(const ExperimentConfig& cfg) {
    if (cfg.reactivation.empty()) return;
    for (long long horizon : cfg.horizons) {
        const auto times = expand_reactivations(cfg.reactivation, horizon);
        const long long epoch_len = ceil_pow(horizon, cfg.alpha);
        long long prev = 1;
        for (long long t : times) {
            if (t > prev && t - prev < epoch_len) {
                std::fprintf(stderr,
                             "warning: reactivation gap %lld below ceil(T^alpha)=%lld at T=%lld\n",
                             t - prev, epoch_len, horizon);
                return;
            }
            prev = t;
        }
    }
}

std::vector<SummaryRow> run_jobs(const ExperimentConfig& cfg, bool allow_parallel) {
    cfg.validate();
    warn_small_gaps(cfg);
    struct Job {
        long long horizon;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (long long horizon : cfg.horizons) {
        for (std::uint64_t seed : cfg.seeds) jobs.push_back({horizon, seed});
    }
    std::vector<SummaryRow> rows(jobs.size());
    std::vector<std::exception_ptr> errors(jobs.size());

#ifdef _OPENMP
    if (allow_parallel && cfg.threads != 1) {
        const int n = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(n)
        for (long long i = 0; i < static_cast<long long>(jobs.size()); ++i) {
            try {
                rows[i] = run_single(cfg, jobs[i].horizon, jobs[i].seed);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
        for (const auto& err : errors) {
            if (err) std::rethrow_exception(err);
        }
        return rows;
    }
#else
    (void)allow_parallel;
#endif
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        rows[i] = run_single(cfg, jobs[i].horizon, jobs[i].seed);
    }
    return rows;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file " + path);
    ExperimentConfig cfg;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("bad config line: " + line);
        cfg.apply_override(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void ExperimentConfig::apply_override(const std::string& key, const std::string& value) {
    if (key == "algorithm") algorithm = value;
    else if (key == "adversary") adversary = value;
    else if (key == "T") horizons = parse_horizon_list(value);
    else if (key == "alpha") alpha = std::stod(value);
    else if (key == "delta") delta = std::stod(value);
    else if (key == "c") c = std::stod(value);
    else if (key == "K") k = std::stoi(value);
    else if (key == "eta") eta = std::stod(value);
    else if (key == "reactivation") reactivation = value;
    else if (key == "seeds") seeds = parse_seed_list(value);
    else if (key == "out") out = value;
    else if (key == "amplitude") amplitude = std::stod(value);
    else if (key == "fll_variant") fll_variant = value;
    else if (key == "a2_update") a2_update = value;
    else if (key == "threads") threads = std::stoi(value);
    else if (key == "trace_out") trace_out = value;
    else throw std::invalid_argument("unknown config key: " + key);
}

void ExperimentConfig::validate() const {
    if (horizons.empty()) throw std::invalid_argument("no T values");
    if (seeds.empty()) throw std::invalid_argument("seeds must be nonempty");
    for (long long t : horizons) {
        if (t < 1) throw std::invalid_argument("T must be positive");
    }
    if (k < 1 || k > kMaxExperts) throw std::invalid_argument("K outside [1,64]");
    if (alpha < 0 || alpha > 1) throw std::invalid_argument("alpha outside [0,1]");
    if (delta < 0 || delta > 1) throw std::invalid_argument("delta outside [0,1]");
    if (c < 0 || c > 1) throw std::invalid_argument("c outside [0,1]");
    if (a2_update != "expected" && a2_update != "realized") {
        throw std::invalid_argument("a2_update must be expected or realized");
    }
    parse_fll_variant(fll_variant);
}

std::vector<SummaryRow> run_experiment(const ExperimentConfig& config) {
    return run_jobs(config, true);
}

std::vector<SummaryRow> run_experiment_serial(const ExperimentConfig& config) {
    return run_jobs(config, false);
}

std::string to_csv(const std::vector<SummaryRow>& rows) {
    std::string text = kCsvHeader;
    text += '\n';
    for (const SummaryRow& row : rows) {
        text += std::to_string(row.seed) + ',' + std::to_string(row.horizon) + ',' +
                std::to_string(row.k) + ',' + fmt(row.alpha) + ',' + fmt(row.delta) + ',' +
                fmt(row.c) + ',' + row.algorithm + ',' + row.adversary + ',' +
                std::to_string(row.world) + ',' + row.status + ',' + fmt(row.reg1_expected) +
                ',' + fmt(row.reg1_realized) + ',' + fmt(row.reg2c_expected) + ',' +
                fmt(row.reg2c_realized) + ',' + std::to_string(row.switches) + ',' +
                (row.assumption2_pass < 0 ? "na" : std::to_string(row.assumption2_pass)) + ',' +
                (row.assumption2prime_pass < 0 ? "na"
                                               : std::to_string(row.assumption2prime_pass)) +
                ',' + fmt(row.sreg_max) + ',' + std::to_string(row.active_rounds_min) + '\n';
    }
    return text;
}

bool all_ok(const std::vector<SummaryRow>& rows) {
    return std::all_of(rows.begin(), rows.end(),
                       [](const SummaryRow& r) { return r.status == "ok"; });
}

SlopeFit slope_fit(const std::vector<SummaryRow>& rows) {
    std::map<long long, std::pair<double, long long>> by_horizon;  // sum, count
    for (const SummaryRow& row : rows) {
        if (row.status != "ok") continue;
        auto& [sum, count] = by_horizon[row.horizon];
        sum += std::max(row.reg1_realized, row.reg2c_realized);
        ++count;
    }
    if (by_horizon.size() < 4) {
        throw std::invalid_argument("slope_fit needs at least 4 distinct T values");
    }
    std::vector<double> xs, ys;
    for (const auto& [horizon, entry] : by_horizon) {
        xs.push_back(std::log(static_cast<double>(horizon)));
        ys.push_back(std::log(entry.first / static_cast<double>(entry.second)));
    }
    const std::size_t n = xs.size();
    double mean_x = 0, mean_y = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (xs[i] - mean_x) * (ys[i] - mean_y);
        den += (xs[i] - mean_x) * (xs[i] - mean_x);
    }
    SlopeFit fit;
    fit.exponent = num / den;
    double sq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double predicted = mean_y + fit.exponent * (xs[i] - mean_x);
        sq += (ys[i] - predicted) * (ys[i] - predicted);
    }
    fit.residual = std::sqrt(sq / static_cast<double>(n));
    return fit;
}

std::vector<SummaryRow> rows_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != kCsvHeader) {
        throw std::invalid_argument("bad CSV header");
    }
    std::vector<SummaryRow> rows;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) fields.push_back(field);
        if (fields.size() != 19) throw std::invalid_argument("bad CSV row: " + line);
        SummaryRow row;
        row.seed = std::stoull(fields[0]);
        row.horizon = std::stoll(fields[1]);
        row.k = std::stoi(fields[2]);
        row.alpha = std::stod(fields[3]);
        row.delta = std::stod(fields[4]);
        row.c = std::stod(fields[5]);
        row.algorithm = fields[6];
        row.adversary = fields[7];
        row.world = std::stoi(fields[8]);
        row.status = fields[9];
        row.reg1_expected = std::stod(fields[10]);
        row.reg1_realized = std::stod(fields[11]);
        row.reg2c_expected = std::stod(fields[12]);
        row.reg2c_realized = std::stod(fields[13]);
        row.switches = std::stoll(fields[14]);
        row.assumption2_pass = fields[15] == "na" ? -1 : std::stoi(fields[15]);
        row.assumption2prime_pass = fields[16] == "na" ? -1 : std::stoi(fields[16]);
        row.sreg_max = std::stod(fields[17]);
        row.active_rounds_min = std::stoll(fields[18]);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (part.empty()) continue;
        const auto dash = part.find('-');
        if (dash != std::string::npos && dash > 0) {
            const std::uint64_t lo = std::stoull(part.substr(0, dash));
            const std::uint64_t hi = std::stoull(part.substr(dash + 1));
            if (hi < lo) throw std::invalid_argument("bad seed range: " + part);
            for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
        } else {
            seeds.push_back(std::stoull(part));
        }
    }
    if (seeds.empty()) throw std::invalid_argument("empty seed list");
    return seeds;
}

std::vector<long long> parse_horizon_list(const std::string& text) {
    std::vector<long long> horizons;
    std::istringstream in(text);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) horizons.push_back(std::stoll(part));
    }
    if (horizons.empty()) throw std::invalid_argument("empty T list");
    return horizons;
}

std::vector<long long> expand_reactivations(const std::string& spec, long long horizon) {
    std::vector<long long> times;
    if (spec.empty()) return times;
    if (spec.rfind("every:", 0) == 0) {
        const long long gap = std::stoll(spec.substr(6));
        if (gap < 1) throw std::invalid_argument("reactivation gap must be positive");
        for (long long t = 1 + gap; t <= horizon; t += gap) times.push_back(t);
        return times;
    }
    std::istringstream in(spec);
    std::string part;
    while (std::getline(in, part, ',')) {
        part = trim(part);
        if (!part.empty()) times.push_back(std::stoll(part));
    }
    return times;
}

}  // namespace bicrit
