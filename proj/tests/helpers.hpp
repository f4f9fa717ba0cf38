#pragma once

// Shared fixtures and independent brute-force oracles for the test suites.
// Everything here recomputes from first principles; nothing reuses the
// library's incremental code paths.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "bicrit/metrics.hpp"
#include "bicrit/rng.hpp"
#include "bicrit/types.hpp"

namespace bicrit::testing {

inline std::vector<double> random_simplex(Rng& rng, int k, std::uint64_t support_mask) {
    std::vector<double> p(k, 0.0);
    double sum = 0.0;
    for (int h = 0; h < k; ++h) {
        if (!in_mask(support_mask, h)) continue;
        p[h] = 0.05 + rng.next_double();
        sum += p[h];
    }
    for (double& x : p) x /= sum;
    return p;
}

inline ExpertId random_support_pick(Rng& rng, std::span<const double> p) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        acc += p[h];
        if (u < acc) return static_cast<ExpertId>(h);
    }
    return static_cast<ExpertId>(p.size() - 1);
}

// Fully random complete trace over the full active set.
inline RunTrace random_trace(int k, long long t_horizon, std::uint64_t seed) {
    Rng rng(seed);
    RunTrace trace(k, t_horizon);
    const std::uint64_t everyone = full_mask(k);
    std::vector<double> l1(k), l2(k);
    for (long long t = 1; t <= t_horizon; ++t) {
        const auto p = random_simplex(rng, k, everyone);
        for (int h = 0; h < k; ++h) {
            l1[h] = rng.next_double();
            l2[h] = rng.next_double();
        }
        trace.append(p, random_support_pick(rng, p), everyone, l1, l2);
    }
    return trace;
}

// O(T^2) reference for max_interval_excess: iterate T1 ascending then T2
// ascending with a running inner sum, keep strictly-better values.
inline IntervalExcess brute_interval_excess(std::span<const double> xs, double c) {
    IntervalExcess best;
    best.value = -1e300;
    const long long n = static_cast<long long>(xs.size());
    for (long long t1 = 1; t1 <= n; ++t1) {
        double sum = 0.0;
        for (long long t2 = t1; t2 <= n; ++t2) {
            sum += xs[t2 - 1] - c;
            if (sum > best.value) {
                best.value = sum;
                best.t1 = t1;
                best.t2 = t2;
            }
        }
    }
    return best;
}

// Prefix-sum recomputation of the regret metrics straight from the trace.
inline double recompute_regret_primary(const RunTrace& trace, bool expected) {
    const int k = trace.num_experts();
    std::vector<double> totals(k, 0.0);
    double alg = 0.0;
    for (long long t = 1; t <= trace.horizon(); ++t) {
        const auto loss = trace.loss1(t);
        const auto dist = trace.dist(t);
        for (int h = 0; h < k; ++h) totals[h] += loss[h];
        if (expected) {
            for (int h = 0; h < k; ++h) alg += dist[h] * loss[h];
        } else {
            alg += loss[trace.selection(t)];
        }
    }
    return std::max(alg - *std::min_element(totals.begin(), totals.end()), 1.0);
}

inline double recompute_sleeping_regret(const RunTrace& trace, ExpertId target) {
    double alg = 0.0, ref = 0.0;
    for (long long t = 1; t <= trace.horizon(); ++t) {
        if (!in_mask(trace.active_mask(t), target)) continue;
        for (int h = 0; h < trace.num_experts(); ++h) {
            alg += trace.dist(t)[h] * trace.loss1(t)[h];
        }
        ref += trace.loss1(t)[target];
    }
    return std::max(alg - ref, 1.0);
}

inline long long rescan_switches(const RunTrace& trace) {
    long long count = 0;
    for (long long t = 2; t <= trace.horizon(); ++t) {
        count += trace.selection(t) != trace.selection(t - 1) ? 1 : 0;
    }
    return count;
}

// Realized secondary excess sum over the whole trajectory.
inline double realized_secondary_excess(const RunTrace& trace, double c) {
    double sum = 0.0;
    for (long long t = 1; t <= trace.horizon(); ++t) {
        sum += trace.loss2(t)[trace.selection(t)] - c;
    }
    return sum;
}

}  // namespace bicrit::testing
