// Times the serial experiment loop against the OpenMP batch runner on the
// same seed grid and checks the rows come back identical.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "bicrit/harness.hpp"

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

bool same_rows(const std::vector<bicrit::SummaryRow>& a,
               const std::vector<bicrit::SummaryRow>& b) {
    return bicrit::to_csv(a) == bicrit::to_csv(b);
}

}  // namespace

int main(int argc, char** argv) {
    bicrit::ExperimentConfig cfg;
    cfg.algorithm = "asl:sd";
    cfg.adversary = "random-good";
    cfg.horizons = {16384};
    cfg.seeds.clear();
    for (std::uint64_t s = 0; s < 64; ++s) cfg.seeds.push_back(s);
    if (argc > 1) cfg = bicrit::ExperimentConfig::from_file(argv[1]);

    std::printf("jobs: %zu (T values x seeds), algorithm=%s adversary=%s\n",
                cfg.horizons.size() * cfg.seeds.size(), cfg.algorithm.c_str(),
                cfg.adversary.c_str());

    cfg.threads = 1;
    auto start = std::chrono::steady_clock::now();
    const auto serial = bicrit::run_experiment_serial(cfg);
    const double serial_s = seconds_since(start);
    std::printf("serial:   %8.3f s\n", serial_s);

#ifdef _OPENMP
    cfg.threads = 0;
    start = std::chrono::steady_clock::now();
    const auto parallel = bicrit::run_experiment(cfg);
    const double parallel_s = seconds_since(start);
    std::printf("openmp:   %8.3f s  (%d threads, speedup %.2fx)\n", parallel_s,
                omp_get_max_threads(), serial_s / parallel_s);
    if (!same_rows(serial, parallel)) {
        std::printf("MISMATCH: parallel rows differ from serial reference\n");
        return 1;
    }
    std::printf("rows identical to serial reference\n");
#else
    std::printf("openmp:   unavailable in this build\n");
#endif
    return 0;
}
