#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bicrit/adversaries.hpp"
#include "bicrit/harness.hpp"
#include "bicrit/types.hpp"

using namespace bicrit;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = "/tmp/bicrit_test_" + name;
    std::ofstream out(path);
    out << content;
    return path;
}

}  // namespace

TEST_CASE("config files parse with comments and overrides") {
    const std::string path = write_temp("config.txt",
                                        "# experiment\n"
                                        "algorithm = asl:sd\n"
                                        "adversary = theorem2\n"
                                        "T = 1024, 4096\n"
                                        "alpha = 0.5\n"
                                        "seeds = 0-2\n");
    auto cfg = ExperimentConfig::from_file(path);
    CHECK(cfg.algorithm == "asl:sd");
    CHECK(cfg.adversary == "theorem2");
    CHECK(cfg.horizons == std::vector<long long>{1024, 4096});
    CHECK(cfg.seeds == std::vector<std::uint64_t>{0, 1, 2});

    cfg.apply_override("T", "512");
    CHECK(cfg.horizons == std::vector<long long>{512});
    CHECK_THROWS_AS(cfg.apply_override("bogus", "1"), std::invalid_argument);
    std::remove(path.c_str());
}

TEST_CASE("seed and horizon list parsing") {
    CHECK(parse_seed_list("3") == std::vector<std::uint64_t>{3});
    CHECK(parse_seed_list("1,4,2") == std::vector<std::uint64_t>{1, 4, 2});
    CHECK(parse_seed_list("5-8,11") == std::vector<std::uint64_t>{5, 6, 7, 8, 11});
    CHECK_THROWS_AS(parse_seed_list(""), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_list("9-4"), std::invalid_argument);

    CHECK(parse_horizon_list("1024,2048") == std::vector<long long>{1024, 2048});
}

TEST_CASE("reactivation expansion") {
    CHECK(expand_reactivations("", 100).empty());
    CHECK(expand_reactivations("every:40", 100) == std::vector<long long>{41, 81});
    CHECK(expand_reactivations("5,50", 100) == std::vector<long long>{5, 50});
    CHECK_THROWS_AS(expand_reactivations("every:0", 100), std::invalid_argument);
}

TEST_CASE("run_experiment produces one ok row per seed") {
    ExperimentConfig cfg;
    cfg.algorithm = "sd";
    cfg.adversary = "random-good";
    cfg.horizons = {256};
    cfg.seeds = {0, 1, 2};
    const auto rows = run_experiment(cfg);
    REQUIRE(rows.size() == 3);
    for (const auto& row : rows) {
        CHECK(row.status == "ok");
        CHECK(row.reg1_realized >= 1.0);
        CHECK(row.reg2c_realized >= 1.0);
        CHECK(row.switches <= 255);
        CHECK(row.assumption2_pass == 1);
        CHECK(row.assumption2prime_pass == 1);
        CHECK(row.active_rounds_min == 256);
    }
    CHECK(all_ok(rows));
}

TEST_CASE("asl row satisfies the per-trajectory secondary bound") {
    ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "theorem2";
    cfg.horizons = {4096};
    cfg.alpha = 0.5;
    cfg.seeds = {0, 1, 2, 3};
    const auto rows = run_experiment(cfg);
    for (const auto& row : rows) {
        REQUIRE(row.status == "ok");
        // theorem2 carries delta=1; budget = ceil(T^alpha) * (switches + 1).
        const double bound = 64.0 * static_cast<double>(row.switches + 1);
        CHECK(row.reg2c_realized <= bound);
    }
}

TEST_CASE("identical configs produce byte-identical CSV, serial or parallel") {
    ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "random-good";
    cfg.horizons = {512, 1024};
    cfg.seeds = {0, 1, 2, 3, 4, 5};
    const auto first = to_csv(run_experiment(cfg));
    const auto second = to_csv(run_experiment(cfg));
    CHECK(first == second);
    const auto serial = to_csv(run_experiment_serial(cfg));
    CHECK(first == serial);
    cfg.threads = 2;
    CHECK(first == to_csv(run_experiment(cfg)));
}

TEST_CASE("every algorithm name on the menu runs") {
    for (const std::string algorithm :
         {"ew", "sd", "fll", "asl:sd", "asl:fll", "asl:ew", "a1:sd", "a1:fll", "a2",
          "restart-a1", "restart-a1:sd", "a1-deact-restart:sd"}) {
        ExperimentConfig cfg;
        cfg.algorithm = algorithm;
        cfg.adversary = "random-good";
        cfg.horizons = {128};
        cfg.seeds = {0};
        cfg.reactivation = "every:64";
        const auto rows = run_experiment(cfg);
        REQUIRE(rows.size() == 1);
        CAPTURE(algorithm);
        CHECK(rows[0].status == "ok");
    }
}

TEST_CASE("adaptive adversary rows mark the assumption check not applicable") {
    ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "adaptive-lb";
    cfg.horizons = {256};
    cfg.c = 0.5;
    cfg.delta = 0.25;
    cfg.k = 2;
    cfg.seeds = {0};
    const auto rows = run_experiment(cfg);
    CHECK(rows[0].status == "ok");
    CHECK(rows[0].assumption2_pass == -1);
    const auto csv = to_csv(rows);
    CHECK(csv.find(",na,") != std::string::npos);
}

TEST_CASE("infeasible adversary parameters surface in the status column") {
    ExperimentConfig cfg;
    cfg.algorithm = "sd";
    cfg.adversary = "linK";
    cfg.horizons = {10000};
    cfg.alpha = 0.5;
    cfg.delta = 1.0;
    cfg.c = 0.5;  // c + budget rate exceeds 1 for the first expert
    cfg.k = 3;
    cfg.seeds = {0, 1};
    const auto rows = run_experiment(cfg);
    for (const auto& row : rows) CHECK(row.status == "infeasible-adversary");
    CHECK_FALSE(all_ok(rows));
}

TEST_CASE("oracle starvation surfaces in the status column") {
    // A stream file whose two experts both blow the budget immediately.
    std::vector<LossVectorPair> rounds(32,
                                       LossVectorPair{{0.5, 0.5}, {1.0, 1.0}});
    const auto stream = LossStream::make_oblivious(2, std::move(rounds),
                                                   StreamInfo{0.0, 0.1, 0.0, -1, "hostile"});
    std::ostringstream text;
    stream.write(text);
    const std::string path = write_temp("hostile.stream", text.str());

    ExperimentConfig cfg;
    cfg.algorithm = "a1:sd";
    cfg.adversary = "file:" + path;
    cfg.horizons = {32};
    cfg.seeds = {0};
    const auto rows = run_experiment(cfg);
    CHECK(rows[0].status == "oracle-starved");
    std::remove(path.c_str());
}

TEST_CASE("world column records the drawn world") {
    ExperimentConfig cfg;
    cfg.algorithm = "ew";
    cfg.adversary = "theorem1";
    cfg.horizons = {64};
    cfg.seeds = {0, 1, 2, 3, 4, 5, 6, 7};
    const auto rows = run_experiment(cfg);
    bool saw1 = false, saw2 = false;
    for (const auto& row : rows) {
        CHECK((row.world == 1 || row.world == 2));
        saw1 = saw1 || row.world == 1;
        saw2 = saw2 || row.world == 2;
        CHECK(row.c == doctest::Approx(1.0 / 16.0));
    }
    CHECK(saw1);
    CHECK(saw2);
}

TEST_CASE("CSV header is pinned and rows round-trip") {
    ExperimentConfig cfg;
    cfg.algorithm = "sd";
    cfg.adversary = "random-good";
    cfg.horizons = {128};
    cfg.seeds = {0, 1};
    const auto rows = run_experiment(cfg);
    const auto csv = to_csv(rows);
    CHECK(csv.rfind("seed,T,K,alpha,delta,c,algorithm,adversary,world,status,reg1_expected,"
                    "reg1_realized,reg2c_expected,reg2c_realized,switches,assumption2_pass,"
                    "assumption2prime_pass,sreg_max,active_rounds_min\n",
                    0) == 0);
    const auto parsed = rows_from_csv(csv);
    REQUIRE(parsed.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(parsed[i].seed == rows[i].seed);
        CHECK(parsed[i].horizon == rows[i].horizon);
        CHECK(parsed[i].reg1_realized == doctest::Approx(rows[i].reg1_realized));
        CHECK(parsed[i].switches == rows[i].switches);
    }
}

TEST_CASE("slope_fit on synthetic rows") {
    auto make_row = [](long long horizon, double value) {
        SummaryRow row;
        row.horizon = horizon;
        row.reg1_realized = value;
        row.reg2c_realized = 1.0;
        row.status = "ok";
        return row;
    };

    std::vector<SummaryRow> linear, sqrt_rows;
    for (long long horizon : {1024LL, 2048LL, 4096LL, 8192LL, 16384LL}) {
        linear.push_back(make_row(horizon, static_cast<double>(horizon)));
        sqrt_rows.push_back(make_row(horizon, std::sqrt(static_cast<double>(horizon))));
    }
    CHECK(slope_fit(linear).exponent == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(slope_fit(linear).residual == doctest::Approx(0.0));
    CHECK(slope_fit(sqrt_rows).exponent == doctest::Approx(0.5).epsilon(1e-9));

    std::vector<SummaryRow> few(linear.begin(), linear.begin() + 3);
    CHECK_THROWS_AS(slope_fit(few), std::invalid_argument);
}

TEST_CASE("trace_out writes one trace file per row") {
    ExperimentConfig cfg;
    cfg.algorithm = "sd";
    cfg.adversary = "random-good";
    cfg.horizons = {64};
    cfg.seeds = {7};
    cfg.trace_out = "/tmp/bicrit_test_traces";
    const auto rows = run_experiment(cfg);
    REQUIRE(rows[0].status == "ok");
    std::ifstream in("/tmp/bicrit_test_traces.T64.seed7.trace");
    REQUIRE(static_cast<bool>(in));
    const auto file = RunTrace::read(in);
    CHECK(file.k == 4);
    CHECK(file.t_horizon == 64);
    CHECK(file.rows.size() == 64);
    std::remove("/tmp/bicrit_test_traces.T64.seed7.trace");
}
