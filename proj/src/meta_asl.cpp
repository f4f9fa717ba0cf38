#include "bicrit/meta_asl.hpp"

#include <stdexcept>

namespace bicrit {

EpochSchedule EpochSchedule::make(long long t_horizon, double alpha) {
    if (t_horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha outside [0,1]");
    EpochSchedule s;
    s.horizon = t_horizon;
    s.epoch_len = ceil_pow(t_horizon, alpha);
    s.num_epochs = (t_horizon + s.epoch_len - 1) / s.epoch_len;
    return s;
}

EpochSchedule EpochSchedule::with_len(long long t_horizon, long long epoch_len) {
    if (t_horizon < 1) throw std::invalid_argument("horizon must be positive");
    if (epoch_len < 1) throw std::invalid_argument("epoch length must be positive");
    EpochSchedule s;
    s.horizon = t_horizon;
    s.epoch_len = epoch_len;
    s.num_epochs = (t_horizon + epoch_len - 1) / epoch_len;
    return s;
}

std::pair<long long, long long> EpochSchedule::epoch_bounds(long long i) const {
    if (i < 1 || i > num_epochs) throw std::invalid_argument("epoch index out of range");
    const long long start = (i - 1) * epoch_len + 1;
    return {start, std::min(start + epoch_len - 1, horizon)};
}

std::vector<double> epoch_average(const std::vector<std::vector<double>>& rounds) {
    if (rounds.empty()) throw std::invalid_argument("empty epoch");
    std::vector<double> avg(rounds.front().size(), 0.0);
    for (const auto& row : rounds) {
        if (row.size() != avg.size()) throw std::invalid_argument("ragged epoch rows");
        for (std::size_t h = 0; h < avg.size(); ++h) avg[h] += row[h];
    }
    for (double& x : avg) x /= static_cast<double>(rounds.size());
    return avg;
}

AslDriver::AslDriver(LearnerKind base, int k, long long t_horizon, double alpha,
                     std::uint64_t seed, FllVariant variant)
    : AslDriver(base, k, EpochSchedule::make(t_horizon, alpha), seed, variant) {}

AslDriver::AslDriver(LearnerKind base, int k, EpochSchedule schedule, std::uint64_t seed,
                     FllVariant variant)
    : schedule_(schedule),
      learner_(make_learner(base, k, schedule_.num_epochs, seed, variant)) {}

std::pair<ExpertId, const SimplexDistribution*> AslDriver::begin_round(long long t) {
    if (t != expected_round_) throw std::logic_error("rounds must be driven in order");
    const auto [start, end] = schedule_.epoch_bounds(schedule_.epoch_of_round(t));
    (void)end;
    if (t == start) {
        StepResult step = learner_->step();
        epoch_choice_ = step.choice;
        epoch_dist_ = std::move(step.dist);
        buffer_.clear();
    }
    return {epoch_choice_, &epoch_dist_};
}

void AslDriver::end_round(long long t, std::span<const double> primary) {
    if (t != expected_round_) throw std::logic_error("rounds must be driven in order");
    buffer_.emplace_back(primary.begin(), primary.end());
    const auto [start, end] = schedule_.epoch_bounds(schedule_.epoch_of_round(t));
    (void)start;
    if (t == end) learner_->observe(epoch_average(buffer_));
    ++expected_round_;
}

RunTrace run_learner(LearnerKind kind, const LossStream& stream, std::uint64_t seed,
                     FllVariant variant) {
    const int k = stream.num_experts();
    const std::uint64_t everyone = full_mask(k);
    auto learner = make_learner(kind, k, stream.horizon(), seed, variant);
    RunTrace trace(k, stream.horizon());
    std::vector<ExpertId> history;
    history.reserve(static_cast<std::size_t>(stream.horizon()));
    for (long long t = 1; t <= stream.horizon(); ++t) {
        StepResult step = learner->step();
        const LossVectorPair loss = stream.reveal(t, history);
        trace.append(step.dist.w, step.choice, everyone, loss.primary, loss.secondary);
        history.push_back(step.choice);
        learner->observe(loss.primary);
    }
    return trace;
}

RunTrace asl_run(LearnerKind base, const LossStream& stream, double alpha, std::uint64_t seed,
                 FllVariant variant) {
    const int k = stream.num_experts();
    const std::uint64_t everyone = full_mask(k);
    AslDriver driver(base, k, stream.horizon(), alpha, seed, variant);
    RunTrace trace(k, stream.horizon());
    std::vector<ExpertId> history;
    history.reserve(static_cast<std::size_t>(stream.horizon()));
    for (long long t = 1; t <= stream.horizon(); ++t) {
        const auto [choice, dist] = driver.begin_round(t);
        const LossVectorPair loss = stream.reveal(t, history);
        trace.append(dist->w, choice, everyone, loss.primary, loss.secondary);
        history.push_back(choice);
        driver.end_round(t, loss.primary);
    }
    return trace;
}

}  // namespace bicrit
