#pragma once

#include <vector>

#include "bicrit/learners.hpp"
#include "bicrit/types.hpp"

namespace bicrit {

/// Partition of [1,T] into epochs of length ceil(T^alpha); the last epoch
/// may be shorter.
struct EpochSchedule {
    long long horizon = 0;
    long long epoch_len = 1;
    long long num_epochs = 0;

    static EpochSchedule make(long long t_horizon, double alpha);
    static EpochSchedule with_len(long long t_horizon, long long epoch_len);

    // 1-based epoch index -> inclusive [start, end] rounds.
    std::pair<long long, long long> epoch_bounds(long long i) const;
    long long epoch_of_round(long long t) const { return (t - 1) / epoch_len + 1; }
};

/// Componentwise mean over the rounds of one epoch.
std::vector<double> epoch_average(const std::vector<std::vector<double>>& rounds);

// Epoch-batched wrapper around a base learner: one learner round per epoch,
// the epoch's expert is played every round, and the learner observes the
// epoch-averaged primary losses. Callers supply the loss vector to feed
// (a1_run feeds pseudo losses), so the driver is shared by asl_run and the
// sleeping-oracle algorithms.
class AslDriver {
public:
    AslDriver(LearnerKind base, int k, long long t_horizon, double alpha, std::uint64_t seed,
              FllVariant variant = FllVariant::Coupled);
    AslDriver(LearnerKind base, int k, EpochSchedule schedule, std::uint64_t seed,
              FllVariant variant = FllVariant::Coupled);

    const EpochSchedule& schedule() const { return schedule_; }

    // Steps the base learner at epoch starts; returns the expert held for
    // the epoch containing t and its distribution.
    std::pair<ExpertId, const SimplexDistribution*> begin_round(long long t);

    // Buffers the primary losses for round t and feeds the epoch average to
    // the base learner when the epoch closes.
    void end_round(long long t, std::span<const double> primary);

private:
    EpochSchedule schedule_;
    std::unique_ptr<Learner> learner_;
    ExpertId epoch_choice_ = -1;
    SimplexDistribution epoch_dist_;
    std::vector<std::vector<double>> buffer_;
    long long expected_round_ = 1;
};

/// Runs the base learner directly, one step per round. Serial reference for
/// the alpha=0 equivalence of asl_run.
RunTrace run_learner(LearnerKind kind, const LossStream& stream, std::uint64_t seed,
                     FllVariant variant = FllVariant::Coupled);

/// The epoch meta-algorithm over a switching-limited base learner.
RunTrace asl_run(LearnerKind base, const LossStream& stream, double alpha, std::uint64_t seed,
                 FllVariant variant = FllVariant::Coupled);

}  // namespace bicrit
