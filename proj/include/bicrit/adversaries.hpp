#pragma once

#include <utility>

#include "bicrit/types.hpp"

namespace bicrit {

/// Expected primary/secondary loss of the threshold expert h(b) when the
/// label is negative with probability a: ((1-a)b + a(1-b), (1-a)b).
std::pair<double, double> threshold_losses(double a, double b);

struct BuiltStream {
    LossStream stream;
    AssumptionParams params;
    int world = -1;
};

/// Two-expert, two-phase, two-world stream with c = 1/16; the world is drawn
/// uniformly from the seed and recorded in the result.
BuiltStream build_theorem1(long long t_horizon, std::uint64_t seed);

/// Two-expert, three-phase stream (phase lengths ceil(T^alpha), ceil(T^alpha),
/// remainder) with both experts' cumulative losses equal by construction; c=0.
BuiltStream build_theorem2(long long t_horizon, double alpha);

/// Adaptive stream: per-epoch fair-coin primaries; the secondary is c only
/// for the expert held for the previous ceil(T^alpha) rounds, else c+delta.
LossStream adaptive_lb(long long t_horizon, double alpha, double c, double delta, int k,
                       std::uint64_t seed);

/// Interval family with beta=(1+alpha)/2 and delta=1/2: world 0 alternates a
/// primary/secondary pattern per half-interval; world w replays matched
/// cumulative primaries (i.i.d. plus compensation) and then turns all
/// primaries to 1 after the w-th interval's first half.
BuiltStream build_appendixB(long long t_horizon, double alpha, std::uint64_t seed);

/// K-expert stream on which a deactivation oracle retires experts 1..K-1 in
/// sequence: expert k has (1, c) through T_{k-1}, then (0, c + excess-rate).
BuiltStream build_linK(long long t_horizon, int k, double alpha, double c, double delta);

/// Random stream guaranteed to satisfy the bounded-variance assumption:
/// i.i.d. uniform primaries; per-expert secondary random walk around c whose
/// running interval excess is clipped below the budget.
LossStream random_bounded_variance(long long t_horizon, int k, const AssumptionParams& params,
                                   double amplitude, std::uint64_t seed);

}  // namespace bicrit
