#include "bicrit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bicrit {

namespace {

void require_complete(const RunTrace& trace) {
    if (trace.rounds_recorded() == 0) throw std::invalid_argument("empty trace");
    if (!trace.complete()) throw std::invalid_argument("trace incomplete");
}

double floor_one(double x) { return std::max(x, 1.0); }

}  // namespace

double regret_primary_raw(const RunTrace& trace, bool expected) {
    require_complete(trace);
    double best = std::numeric_limits<double>::infinity();
    for (int h = 0; h < trace.num_experts(); ++h) best = std::min(best, trace.expert_loss1(h));
    const double alg = expected ? trace.alg_loss1_expected() : trace.alg_loss1_realized();
    return alg - best;
}

double regret_primary(const RunTrace& trace, bool expected) {
    return floor_one(regret_primary_raw(trace, expected));
}

double regret_secondary_raw(const RunTrace& trace, double c, bool expected) {
    require_complete(trace);
    if (c < 0.0 || c > 1.0) throw std::invalid_argument("c outside [0,1]");
    const double alg = expected ? trace.alg_loss2_expected() : trace.alg_loss2_realized();
    return alg - c * static_cast<double>(trace.horizon());
}

double regret_secondary(const RunTrace& trace, double c, bool expected) {
    return floor_one(regret_secondary_raw(trace, c, expected));
}

double sleeping_regret_raw(const RunTrace& trace, ExpertId target) {
    require_complete(trace);
    if (target < 0 || target >= trace.num_experts()) {
        throw std::invalid_argument("target expert out of range");
    }
    double alg = 0.0, ref = 0.0;
    for (long long t = 1; t <= trace.horizon(); ++t) {
        if (!in_mask(trace.active_mask(t), target)) continue;
        const auto dist = trace.dist(t);
        const auto loss = trace.loss1(t);
        for (int h = 0; h < trace.num_experts(); ++h) alg += dist[h] * loss[h];
        ref += loss[target];
    }
    return alg - ref;
}

double sleeping_regret(const RunTrace& trace, ExpertId target) {
    return floor_one(sleeping_regret_raw(trace, target));
}

long long count_switches(const RunTrace& trace) {
    long long switches = 0;
    for (long long t = 2; t <= trace.rounds_recorded(); ++t) {
        if (trace.selection(t) != trace.selection(t - 1)) ++switches;
    }
    return switches;
}

IntervalExcess max_interval_excess(std::span<const double> secondary, double c) {
    if (secondary.empty()) throw std::invalid_argument("empty sequence");
    const long long n = static_cast<long long>(secondary.size());

    // S[t] = prefix sum of (l2 - c); the interval [T1,T2] sums to S[T2]-S[T1-1].
    // Track the running minimum of S with its earliest index: for each T2 the
    // earliest argmin yields the leftmost maximizing T1, and updating the
    // global best only on strict improvement keeps the first (leftmost start,
    // then shortest) attaining interval.
    IntervalExcess best;
    best.value = -std::numeric_limits<double>::infinity();
    double prefix = 0.0;
    double min_prefix = 0.0;
    long long min_index = 0;  // S index, i.e. T1-1
    for (long long t = 1; t <= n; ++t) {
        prefix += secondary[t - 1] - c;
        const double value = prefix - min_prefix;
        if (value > best.value) {
            best.value = value;
            best.t1 = min_index + 1;
            best.t2 = t;
        }
        if (prefix < min_prefix) {
            min_prefix = prefix;
            min_index = t;
        }
    }
    return best;
}

AssumptionCheck check_assumption2(const LossStream& stream, const AssumptionParams& params) {
    params.validate();
    if (stream.adaptive()) {
        throw std::invalid_argument("assumption check needs a materialized oblivious stream");
    }
    const double budget = excess_threshold(params, stream.horizon());
    const int k = stream.num_experts();

    AssumptionCheck result;
    result.experts.resize(k);
    std::vector<double> column(static_cast<std::size_t>(stream.horizon()));
    for (int h = 0; h < k; ++h) {
        for (long long t = 1; t <= stream.horizon(); ++t) {
            column[t - 1] = stream.round(t).secondary[h];
        }
        auto& entry = result.experts[h];
        entry.worst = max_interval_excess(column, params.c);
        entry.pass = entry.worst.value <= budget;
        result.all_pass = result.all_pass && entry.pass;
    }
    return result;
}

SegmentCheck check_assumption2_prime(const RunTrace& trace, const AssumptionParams& params) {
    params.validate();
    require_complete(trace);
    const double budget = excess_threshold(params, trace.horizon());

    SegmentCheck result;
    result.worst_excess = -std::numeric_limits<double>::infinity();
    long long start = 1;
    double sum = 0.0;
    for (long long t = 1; t <= trace.horizon(); ++t) {
        if (t > 1 && trace.selection(t) != trace.selection(t - 1)) {
            if (sum > result.worst_excess) {
                result.worst_excess = sum;
                result.worst_start = start;
                result.worst_end = t - 1;
            }
            start = t;
            sum = 0.0;
        }
        sum += trace.loss2(t)[trace.selection(t)] - params.c;
    }
    if (sum > result.worst_excess) {
        result.worst_excess = sum;
        result.worst_start = start;
        result.worst_end = trace.horizon();
    }
    result.pass = result.worst_excess <= budget;
    return result;
}

RegretReport make_report(const RunTrace& trace, double c) {
    RegretReport report;
    report.reg1_expected_raw = regret_primary_raw(trace, true);
    report.reg1_realized_raw = regret_primary_raw(trace, false);
    report.reg2c_expected_raw = regret_secondary_raw(trace, c, true);
    report.reg2c_realized_raw = regret_secondary_raw(trace, c, false);
    report.reg1_expected = floor_one(report.reg1_expected_raw);
    report.reg1_realized = floor_one(report.reg1_realized_raw);
    report.reg2c_expected = floor_one(report.reg2c_expected_raw);
    report.reg2c_realized = floor_one(report.reg2c_realized_raw);
    report.switches = count_switches(trace);
    const int k = trace.num_experts();
    report.sleeping.resize(k);
    report.sleeping_raw.resize(k);
    report.active_rounds.resize(k);
    for (int h = 0; h < k; ++h) {
        report.sleeping_raw[h] = sleeping_regret_raw(trace, h);
        report.sleeping[h] = floor_one(report.sleeping_raw[h]);
        report.active_rounds[h] = trace.active_rounds(h);
    }
    return report;
}

}  // namespace bicrit
