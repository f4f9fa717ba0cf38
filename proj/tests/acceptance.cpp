// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria with exact values use exact comparisons; growth criteria
// pin their slope thresholds in code.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "bicrit/adversaries.hpp"
#include "bicrit/harness.hpp"
#include "bicrit/meta_asl.hpp"
#include "bicrit/metrics.hpp"
#include "bicrit/rng.hpp"
#include "bicrit/sleeping.hpp"

using namespace bicrit;

namespace {

int failures = 0;
char buffer[512];

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::uint64_t> seed_range(std::uint64_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::uint64_t s = 0; s < count; ++s) seeds[s] = s;
    return seeds;
}

const std::vector<long long> kFullGrid{1 << 10, 1 << 11, 1 << 12, 1 << 13,
                                       1 << 14, 1 << 15, 1 << 16};

// Shared config builders, reused verbatim by the determinism criterion.
std::vector<ExperimentConfig> criterion2_configs() {
    std::vector<ExperimentConfig> configs;
    for (const std::string algorithm : {"asl:sd", "asl:fll"}) {
        for (const double alpha : {0.3, 0.5, 0.7}) {
            ExperimentConfig cfg;
            cfg.algorithm = algorithm;
            cfg.adversary = "random-good";
            cfg.horizons = {1 << 14};
            cfg.alpha = alpha;
            cfg.delta = 0.25;
            cfg.c = 0.5;
            cfg.k = 4;
            cfg.seeds = seed_range(30);
            configs.push_back(std::move(cfg));
        }
    }
    return configs;
}

ExperimentConfig criterion3_config() {
    ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "random-good";
    cfg.horizons = {1 << 10, 1 << 12, 1 << 14, 1 << 16};
    cfg.alpha = 0.5;
    cfg.delta = 0.25;
    cfg.c = 0.5;
    cfg.k = 4;
    cfg.seeds = seed_range(30);
    return cfg;
}

std::vector<ExperimentConfig> criterion4_configs() {
    std::vector<ExperimentConfig> configs;
    for (const std::string algorithm : {"ew", "sd", "asl:sd"}) {
        ExperimentConfig cfg;
        cfg.algorithm = algorithm;
        cfg.adversary = "theorem1";
        cfg.horizons = kFullGrid;
        cfg.seeds = seed_range(50);
        configs.push_back(std::move(cfg));
    }
    return configs;
}

ExperimentConfig criterion5_config() {
    ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "adaptive-lb";
    cfg.horizons = kFullGrid;
    cfg.alpha = 0.5;
    cfg.delta = 0.25;
    cfg.c = 0.5;
    cfg.k = 2;
    cfg.seeds = seed_range(30);
    return cfg;
}

// ---- criterion 1: exact cumulative identity of the three-phase stream ----
void criterion1() {
    const auto start = std::chrono::steady_clock::now();
    const auto built = build_theorem2(4096, 0.5);
    bool pass = true;
    for (int h = 0; h < 2; ++h) {
        double total1 = 0.0, total2 = 0.0;
        for (long long t = 1; t <= 4096; ++t) {
            total1 += built.stream.round(t).primary[h];
            total2 += built.stream.round(t).secondary[h];
        }
        pass = pass && total1 == 3040.0 && total2 == 16.0;
    }
    std::snprintf(buffer, sizeof buffer,
                  "three-phase cumulative losses equal (3040, 16) exactly [%.2fs]",
                  elapsed(start));
    report(1, pass, buffer);
}

// ---- criterion 2: per-trajectory secondary bound, zero tolerance ----
void criterion2() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    long long checked = 0;
    for (const auto& cfg : criterion2_configs()) {
        for (const auto& row : run_experiment(cfg)) {
            if (row.status != "ok") {
                pass = false;
                continue;
            }
            const double budget = cfg.delta *
                                  static_cast<double>(ceil_pow(row.horizon, cfg.alpha)) *
                                  static_cast<double>(row.switches + 1);
            pass = pass && row.reg2c_realized <= budget;
            ++checked;
        }
    }
    std::snprintf(buffer, sizeof buffer,
                  "secondary excess within delta*ceil(T^a)*(switches+1) on %lld/180 runs [%.2fs]",
                  checked, elapsed(start));
    report(2, pass && checked == 180, buffer);
}

// ---- criterion 3: primary scaling of the epoch meta-algorithm ----
void criterion3() {
    const auto start = std::chrono::steady_clock::now();
    const auto fit = slope_fit(run_experiment(criterion3_config()));
    std::snprintf(buffer, sizeof buffer, "asl:sd growth exponent %.3f <= 0.85 [%.2fs]",
                  fit.exponent, elapsed(start));
    report(3, fit.exponent <= 0.85, buffer);
}

// ---- criterion 4: linear growth against the two-world stream ----
void criterion4() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (const auto& cfg : criterion4_configs()) {
        const auto fit = slope_fit(run_experiment(cfg));
        pass = pass && fit.exponent >= 0.9;
        detail += cfg.algorithm + "=" + std::to_string(fit.exponent).substr(0, 5) + " ";
    }
    std::snprintf(buffer, sizeof buffer, "two-world exponents %s(all >= 0.9) [%.2fs]",
                  detail.c_str(), elapsed(start));
    report(4, pass, buffer);
}

// ---- criterion 5: adaptive lower-bound scaling ----
void criterion5() {
    const auto start = std::chrono::steady_clock::now();
    const auto fit = slope_fit(run_experiment(criterion5_config()));
    std::snprintf(buffer, sizeof buffer, "adaptive adversary exponent %.3f >= 0.6 [%.2fs]",
                  fit.exponent, elapsed(start));
    report(5, fit.exponent >= 0.6, buffer);
}

// ---- criterion 6: the selection-law identity on tiny instances ----
void criterion6() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(20240601);
    bool pass = true;
    int checked = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const int k = 2 + rng.uniform_int(2);
        const long long epochs = 2 + rng.uniform_int(4);
        const long long epoch_len = 2;
        const long long horizon = epochs * epoch_len;

        std::vector<LossVectorPair> rounds;
        for (long long t = 0; t < horizon; ++t) {
            LossVectorPair pair{std::vector<double>(k), std::vector<double>(k, 0.0)};
            for (int h = 0; h < k; ++h) pair.primary[h] = rng.bernoulli(0.5) ? 1.0 : 0.0;
            rounds.push_back(std::move(pair));
        }
        const auto stream = LossStream::make_oblivious(k, std::move(rounds));

        // random epoch-aligned deactivation/reactivation pattern
        EpochActiveSets sets;
        std::uint64_t active = full_mask(k);
        for (long long m = 1; m <= epochs; ++m) {
            const bool reset = m == 1 || rng.bernoulli(0.2);
            if (reset) active = full_mask(k);
            sets.reactivation.push_back(reset);
            sets.active.push_back(active);
            std::uint64_t removed = 0;
            for (int h = 0; h < k; ++h) {
                if (in_mask(active, h) && rng.bernoulli(0.15)) removed |= 1ULL << h;
            }
            if (removed == active) removed &= removed - 1;
            sets.deactivated.push_back(removed);
            active &= ~removed;
        }

        const double eta = 0.75 + 0.2 * rng.next_double();
        const double alpha = std::log(2.0) / std::log(static_cast<double>(horizon));
        A2Options options;
        options.eta = eta;
        const A2Result result = a2_run_detailed(stream, AssumptionParams{0.0, 1.0, alpha},
                                                options, 9000 + trial, &sets);

        // forward law recursion over the held expert, with independently
        // recomputed weights
        std::vector<double> w(static_cast<std::size_t>(k) * k, 1.0 / k);
        std::vector<double> mu, prev_masked;
        for (long long m = 1; m <= epochs; ++m) {
            const std::uint64_t mask = sets.active[m - 1];
            std::vector<double> masked(k, 0.0);
            for (int hs = 0; hs < k; ++hs) {
                if (!in_mask(mask, hs)) continue;
                for (int h = 0; h < k; ++h) masked[h] += w[hs * k + h];
            }
            double total = 0.0;
            for (double x : masked) total += x;
            std::vector<double> p(k);
            for (int h = 0; h < k; ++h) p[h] = masked[h] / total;

            if (m == 1 || sets.reactivation[m - 1]) {
                mu = p;
            } else {
                std::vector<double> next(k, 0.0);
                double redraw = 0.0;
                for (int h = 0; h < k; ++h) {
                    const double keep = masked[h] / prev_masked[h];
                    next[h] += mu[h] * keep;
                    redraw += mu[h] * (1.0 - keep);
                }
                for (int h = 0; h < k; ++h) next[h] += p[h] * redraw;
                mu = next;
            }
            for (int h = 0; h < k; ++h) {
                pass = pass && std::fabs(mu[h] - p[h]) <= 1e-9 &&
                       std::fabs(result.diag.probabilities[(m - 1) * k + h] - p[h]) <= 1e-9;
            }
            // weight-sum supermartingale, every epoch of every instance
            pass = pass &&
                   result.diag.weight_sums[m] <= eta * result.diag.weight_sums[m - 1] + 1e-12;

            // advance the reference weights (expected pseudo epoch loss)
            const auto [s0, s1] = EpochSchedule::with_len(horizon, epoch_len).epoch_bounds(m);
            std::vector<double> pseudo(k, 0.0);
            for (long long t = s0; t <= s1; ++t) {
                for (int h = 0; h < k; ++h) {
                    pseudo[h] += in_mask(mask, h) ? stream.round(t).primary[h] : 1.0;
                }
            }
            for (double& x : pseudo) x /= static_cast<double>(s1 - s0 + 1);
            double alg = 0.0;
            for (int h = 0; h < k; ++h) alg += p[h] * pseudo[h];
            for (int hs = 0; hs < k; ++hs) {
                const double gate = in_mask(mask, hs) ? 1.0 : 0.0;
                for (int h = 0; h < k; ++h) {
                    w[hs * k + h] *= std::pow(eta, gate * (pseudo[h] - eta * alg) + 1.0);
                }
            }
            prev_masked = masked;
        }
        ++checked;
    }
    std::snprintf(buffer, sizeof buffer,
                  "selection law equals p_m and weight sums contract on %d/200 instances [%.2fs]",
                  checked, elapsed(start));
    report(6, pass && checked == 200, buffer);
}

// ---- criterion 7: deactivation schedule equals the accumulator replay ----
void criterion7() {
    const auto start = std::chrono::steady_clock::now();
    const auto built = build_linK(10000, 3, 0.5, 0.0, 1.0);
    const auto timeline = oracle1_timeline(built.stream, built.params);

    // independent replay with fresh accumulators
    std::vector<long long> replay(3, -1);
    std::vector<double> acc(3, 0.0);
    std::uint64_t active = full_mask(3);
    const double budget = excess_threshold(built.params, 10000);
    for (long long t = 1; t <= 10000; ++t) {
        for (int h = 0; h < 3; ++h) {
            if (!in_mask(active, h)) continue;
            acc[h] = std::max(acc[h], 0.0) + built.stream.round(t).secondary[h] - 0.0;
            if (acc[h] > budget && replay[h] < 0) {
                replay[h] = t;
                active &= ~(1ULL << h);
            }
        }
    }
    const bool pass = timeline.first_deactivation == replay && replay[0] > 0 && replay[1] > 0 &&
                      replay[2] == -1;
    std::snprintf(buffer, sizeof buffer,
                  "experts retire at replay-predicted rounds {%lld, %lld, never} [%.2fs]",
                  replay[0], replay[1], elapsed(start));
    report(7, pass, buffer);
}

// ---- criterion 8: interval scan equals O(T^2) brute force ----
void criterion8() {
    const auto start = std::chrono::steady_clock::now();
    Rng rng(777);
    bool pass = true;
    for (int trial = 0; trial < 1000; ++trial) {
        const long long n = 1 + rng.uniform_int(300);
        const double c = rng.next_double();
        std::vector<double> xs(n);
        for (auto& x : xs) x = rng.next_double();
        const auto fast = max_interval_excess(xs, c);

        double best = -1e300;
        for (long long t1 = 1; t1 <= n; ++t1) {
            double sum = 0.0;
            for (long long t2 = t1; t2 <= n; ++t2) {
                sum += xs[t2 - 1] - c;
                if (sum > best) best = sum;
            }
        }
        pass = pass && std::fabs(fast.value - best) <= 1e-9;
    }
    std::snprintf(buffer, sizeof buffer,
                  "interval scan matches brute force on 1000 streams [%.2fs]", elapsed(start));
    report(8, pass, buffer);
}

// ---- criterion 9: SD switch budget ----
void criterion9() {
    const auto start = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    for (const auto [k, rounds] : {std::pair<int, long long>{2, 1000},
                                   {8, 1000},
                                   {2, 10000},
                                   {8, 10000}}) {
        double total = 0.0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            Rng loss_rng(Rng::mix(seed, 0xbebe));
            std::vector<LossVectorPair> stream_rounds;
            stream_rounds.reserve(rounds);
            for (long long t = 0; t < rounds; ++t) {
                LossVectorPair pair{std::vector<double>(k), std::vector<double>(k, 0.0)};
                for (int h = 0; h < k; ++h) pair.primary[h] = loss_rng.bernoulli(0.5) ? 1.0 : 0.0;
                stream_rounds.push_back(std::move(pair));
            }
            const auto stream = LossStream::make_oblivious(k, std::move(stream_rounds));
            total += static_cast<double>(count_switches(run_learner(LearnerKind::Sd, stream, seed)));
        }
        const double mean = total / 50.0;
        const double budget = 3.0 * std::sqrt(static_cast<double>(rounds) *
                                              std::log(static_cast<double>(k)));
        pass = pass && mean <= budget;
        detail += "(" + std::to_string(k) + "," + std::to_string(rounds) + "):" +
                  std::to_string(mean).substr(0, 5) + "<=" + std::to_string(budget).substr(0, 5) +
                  " ";
    }
    std::snprintf(buffer, sizeof buffer, "mean switches %s[%.2fs]", detail.c_str(),
                  elapsed(start));
    report(9, pass, buffer);
}

// ---- criterion 10: determinism of the criteria 2-5 configs ----
void criterion10() {
    const auto start = std::chrono::steady_clock::now();
    std::vector<ExperimentConfig> configs = criterion2_configs();
    configs.push_back(criterion3_config());
    for (auto& cfg : criterion4_configs()) configs.push_back(cfg);
    configs.push_back(criterion5_config());

    bool pass = true;
    for (const auto& cfg : configs) {
        const auto first = to_csv(run_experiment(cfg));
        const auto second = to_csv(run_experiment(cfg));
        pass = pass && first == second && !first.empty();
    }
    std::snprintf(buffer, sizeof buffer,
                  "all %zu criteria 2-5 configs reproduce byte-identical CSVs [%.2fs]",
                  configs.size(), elapsed(start));
    report(10, pass, buffer);
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    if (failures == 0) {
        std::printf("all acceptance criteria passed\n");
    } else {
        std::printf("%d acceptance criteria FAILED\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
