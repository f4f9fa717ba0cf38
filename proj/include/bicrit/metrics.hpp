#pragma once

#include <span>
#include <vector>

#include "bicrit/types.hpp"

namespace bicrit {

// All regret values below are floored at 1; the *_raw variants return the
// signed difference before flooring.

/// Reg1: algorithm's cumulative primary loss minus the best expert's.
double regret_primary(const RunTrace& trace, bool expected);
double regret_primary_raw(const RunTrace& trace, bool expected);

/// Reg2_c: algorithm's cumulative secondary loss minus c*T.
double regret_secondary(const RunTrace& trace, double c, bool expected);
double regret_secondary_raw(const RunTrace& trace, double c, bool expected);

/// Sleeping regret against `target`, summed over the rounds it is active.
double sleeping_regret(const RunTrace& trace, ExpertId target);
double sleeping_regret_raw(const RunTrace& trace, ExpertId target);

/// Number of rounds t in [2,T] with A_t != A_{t-1}.
long long count_switches(const RunTrace& trace);

struct IntervalExcess {
    double value = 0.0;
    long long t1 = 1, t2 = 1;  // 1-based inclusive
};

// Maximum over all intervals [T1,T2] of sum(l2_t - c), with one attaining
// interval (leftmost start, then shortest). O(T) prefix scan.
IntervalExcess max_interval_excess(std::span<const double> secondary, double c);

struct ExpertAssumptionResult {
    bool pass = true;
    IntervalExcess worst;
};

struct AssumptionCheck {
    bool all_pass = true;
    std::vector<ExpertAssumptionResult> experts;
};

// Bounded-variance check per expert: max interval excess <= delta*ceil(T^alpha).
// Requires an oblivious stream.
AssumptionCheck check_assumption2(const LossStream& stream, const AssumptionParams& params);

struct SegmentCheck {
    bool pass = true;
    double worst_excess = 0.0;
    long long worst_start = 1, worst_end = 1;
};

// Relaxed check over the trace's maximal constant-selection segments.
SegmentCheck check_assumption2_prime(const RunTrace& trace, const AssumptionParams& params);

/// Full report: both regret flavors, per-expert sleeping regrets, switches.
RegretReport make_report(const RunTrace& trace, double c);

}  // namespace bicrit
