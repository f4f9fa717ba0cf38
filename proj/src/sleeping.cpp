#include "bicrit/sleeping.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "bicrit/rng.hpp"

namespace bicrit {

namespace {

constexpr double kEtaMin = 0.70710678118654752440;  // 1/sqrt(2)

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

ExpertId lowest_active(std::uint64_t mask) {
    if (mask == 0) throw OracleStarvedError("no active expert remains");
    return static_cast<ExpertId>(std::countr_zero(mask));
}

std::vector<long long> sorted_reactivations(std::span<const long long> times,
                                            long long horizon) {
    std::vector<long long> out(times.begin(), times.end());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    for (long long t : out) {
        require(t >= 1 && t <= horizon, "reactivation time outside [1,T]");
    }
    if (!out.empty() && out.front() == 1) out.erase(out.begin());  // t0=1 is implicit
    return out;
}

ExpertId sample_from(Rng& rng, std::span<const double> p) {
    const double u = rng.next_double();
    double acc = 0.0;
    for (std::size_t h = 0; h < p.size(); ++h) {
        acc += p[h];
        if (u < acc) return static_cast<ExpertId>(h);
    }
    return static_cast<ExpertId>(p.size() - 1);
}

std::vector<double> pushforward(std::span<const double> dist, const ExpertMap& f, int k) {
    std::vector<double> q(k, 0.0);
    for (int h = 0; h < k; ++h) q[f(static_cast<ExpertId>(h))] += dist[h];
    return q;
}

ActiveSetTimeline build_timeline(const LossStream& stream, const AssumptionParams& params,
                                 std::span<const long long> reactivation_times,
                                 long long budget_horizon) {
    require(!stream.adaptive(), "oracle timelines need an oblivious stream");
    if (budget_horizon == 0) budget_horizon = stream.horizon();
    DeactivationOracle oracle(stream.num_experts(), params, budget_horizon,
                              sorted_reactivations(reactivation_times, stream.horizon()));
    ActiveSetTimeline timeline;
    timeline.k = stream.num_experts();
    timeline.horizon = stream.horizon();
    timeline.active.reserve(stream.horizon());
    timeline.deactivated.reserve(stream.horizon());
    timeline.first_deactivation.assign(stream.num_experts(), -1);
    for (long long t = 1; t <= stream.horizon(); ++t) {
        timeline.active.push_back(oracle.begin_round(t));
        const std::uint64_t removed = oracle.end_round(t, stream.round(t).secondary);
        timeline.deactivated.push_back(removed);
        for (int h = 0; h < stream.num_experts(); ++h) {
            if (in_mask(removed, h) && timeline.first_deactivation[h] < 0) {
                timeline.first_deactivation[h] = t;
            }
        }
    }
    return timeline;
}

}  // namespace

DeactivationOracle::DeactivationOracle(int k, const AssumptionParams& params,
                                       long long budget_horizon,
                                       std::vector<long long> reactivation_times)
    : k_(k),
      c_(params.c),
      budget_(excess_threshold(params, budget_horizon)),
      active_(full_mask(k)),
      suffix_excess_(k, 0.0),
      reactivations_(std::move(reactivation_times)) {
    params.validate();
    require(k >= 1 && k <= kMaxExperts, "K outside [1,64]");
}

std::uint64_t DeactivationOracle::begin_round(long long t) {
    if (!reactivations_.empty() && reactivations_.front() == t) {
        reactivations_.erase(reactivations_.begin());
        active_ = full_mask(k_);
        std::fill(suffix_excess_.begin(), suffix_excess_.end(), 0.0);
    }
    return active_;
}

std::uint64_t DeactivationOracle::end_round(long long t, std::span<const double> secondary) {
    require(static_cast<int>(secondary.size()) == k_, "secondary loss width mismatch");
    std::uint64_t removed = 0;
    for (int h = 0; h < k_; ++h) {
        if (!in_mask(active_, h)) continue;
        suffix_excess_[h] = std::max(suffix_excess_[h], 0.0) + secondary[h] - c_;
        if (suffix_excess_[h] > budget_) removed |= 1ULL << h;
    }
    if (removed == active_) {
        throw OracleStarvedError("oracle starved at round " + std::to_string(t));
    }
    active_ &= ~removed;
    return removed;
}

ActiveSetTimeline oracle1_timeline(const LossStream& stream, const AssumptionParams& params,
                                   long long budget_horizon) {
    return build_timeline(stream, params, {}, budget_horizon);
}

ActiveSetTimeline oracle2_timeline(const LossStream& stream, const AssumptionParams& params,
                                   std::span<const long long> reactivation_times,
                                   long long budget_horizon) {
    return build_timeline(stream, params, reactivation_times, budget_horizon);
}

std::vector<double> pseudo_primary(std::span<const double> loss, std::uint64_t active_mask) {
    std::vector<double> out(loss.size());
    for (std::size_t h = 0; h < loss.size(); ++h) {
        out[h] = in_mask(active_mask, static_cast<ExpertId>(h)) ? loss[h] : 1.0;
    }
    return out;
}

ExpertMap::ExpertMap(int k) : map_(k) { reset_identity(); }

void ExpertMap::reset_identity() {
    for (std::size_t h = 0; h < map_.size(); ++h) map_[h] = static_cast<ExpertId>(h);
}

void ExpertMap::repair(std::uint64_t removed, std::uint64_t next_active) {
    if (removed == 0) return;
    const ExpertId fallback = lowest_active(next_active);
    for (auto& target : map_) {
        if (in_mask(removed, target)) target = fallback;
    }
}

std::uint64_t ExpertMap::range_mask() const {
    std::uint64_t mask = 0;
    for (ExpertId target : map_) mask |= 1ULL << target;
    return mask;
}

RunTrace a1_run(const LossStream& stream, const AssumptionParams& params, LearnerKind base,
                std::uint64_t seed, FllVariant variant, long long budget_horizon) {
    require(!stream.adaptive(), "a1_run needs an oblivious stream");
    if (budget_horizon == 0) budget_horizon = stream.horizon();
    const int k = stream.num_experts();
    const ActiveSetTimeline timeline = oracle1_timeline(stream, params, budget_horizon);

    const EpochSchedule schedule =
        EpochSchedule::with_len(stream.horizon(), ceil_pow(budget_horizon, params.alpha));
    AslDriver driver(base, k, schedule, seed, variant);
    ExpertMap f(k);
    RunTrace trace(k, stream.horizon());
    for (long long t = 1; t <= stream.horizon(); ++t) {
        const auto [choice, dist] = driver.begin_round(t);
        const ExpertId played = f(choice);
        const auto& loss = stream.round(t);
        trace.append(pushforward(dist->w, f, k), played, timeline.active[t - 1], loss.primary,
                     loss.secondary, choice);
        driver.end_round(t, pseudo_primary(loss.primary, timeline.active[t - 1]));
        if (t < stream.horizon()) {
            f.repair(timeline.deactivated[t - 1], timeline.active[t]);
        }
    }
    return trace;
}

RunTrace restart_a1_run(const LossStream& stream, const AssumptionParams& params,
                        LearnerKind base, std::span<const long long> reactivation_times,
                        std::uint64_t seed, FllVariant variant) {
    require(!stream.adaptive(), "restart_a1_run needs an oblivious stream");
    const int k = stream.num_experts();
    const long long horizon = stream.horizon();
    std::vector<long long> starts = sorted_reactivations(reactivation_times, horizon);
    starts.insert(starts.begin(), 1);

    RunTrace trace(k, horizon);
    for (std::size_t n = 0; n < starts.size(); ++n) {
        const long long begin = starts[n];
        const long long end = n + 1 < starts.size() ? starts[n + 1] - 1 : horizon;
        std::vector<LossVectorPair> block;
        block.reserve(static_cast<std::size_t>(end - begin + 1));
        for (long long t = begin; t <= end; ++t) block.push_back(stream.round(t));
        const LossStream slice = LossStream::make_oblivious(k, std::move(block), stream.info());
        const RunTrace part = a1_run(slice, params, base, Rng::mix(seed, n), variant, horizon);
        for (long long t = 1; t <= part.horizon(); ++t) {
            trace.append(part.dist(t), part.selection(t), part.active_mask(t), part.loss1(t),
                         part.loss2(t), part.learner_choice(t));
        }
    }
    return trace;
}

RunTrace a1_deact_restart_run(const LossStream& stream, const AssumptionParams& params,
                              LearnerKind base, std::uint64_t seed, FllVariant variant) {
    require(!stream.adaptive(), "a1_deact_restart_run needs an oblivious stream");
    const int k = stream.num_experts();
    const long long horizon = stream.horizon();
    const ActiveSetTimeline timeline = oracle1_timeline(stream, params);
    const long long epoch_len = ceil_pow(horizon, params.alpha);

    RunTrace trace(k, horizon);
    long long t = 1;
    int restarts = 0;
    while (t <= horizon) {
        const std::uint64_t active = timeline.active[t - 1];
        std::vector<ExpertId> experts;
        for (int h = 0; h < k; ++h) {
            if (in_mask(active, h)) experts.push_back(h);
        }
        AslDriver driver(base, static_cast<int>(experts.size()),
                         EpochSchedule::with_len(horizon - t + 1, epoch_len),
                         Rng::mix(seed, static_cast<std::uint64_t>(restarts)), variant);
        std::vector<double> dist(k, 0.0);
        long long local = 1;
        for (; t <= horizon; ++t, ++local) {
            const auto [sub_choice, sub_dist] = driver.begin_round(local);
            const ExpertId played = experts[sub_choice];
            std::fill(dist.begin(), dist.end(), 0.0);
            for (std::size_t i = 0; i < experts.size(); ++i) dist[experts[i]] = sub_dist->w[i];
            const auto& loss = stream.round(t);
            trace.append(dist, played, timeline.active[t - 1], loss.primary, loss.secondary);
            std::vector<double> sub_loss(experts.size());
            for (std::size_t i = 0; i < experts.size(); ++i) sub_loss[i] = loss.primary[experts[i]];
            driver.end_round(local, sub_loss);
            if (timeline.deactivated[t - 1] != 0) {
                ++t;
                ++restarts;
                break;
            }
        }
    }
    return trace;
}

SelectionWeights SelectionWeights::init(int k) {
    SelectionWeights weights;
    weights.k = k;
    weights.w.assign(static_cast<std::size_t>(k) * k, 1.0 / static_cast<double>(k));
    return weights;
}

std::vector<double> SelectionWeights::masked(std::uint64_t active_targets) const {
    std::vector<double> out(k, 0.0);
    for (ExpertId h_star = 0; h_star < k; ++h_star) {
        if (!in_mask(active_targets, h_star)) continue;
        for (ExpertId h = 0; h < k; ++h) out[h] += at(h_star, h);
    }
    return out;
}

double SelectionWeights::total() const {
    double sum = 0.0;
    for (double x : w) sum += x;
    return sum;
}

void a2_weight_update(SelectionWeights& weights, std::uint64_t active_targets,
                      std::span<const double> pseudo_epoch_loss, double alg_epoch_loss,
                      double eta) {
    require(eta >= kEtaMin && eta < 1.0, "eta outside [1/sqrt(2), 1)");
    require(static_cast<int>(pseudo_epoch_loss.size()) == weights.k, "loss width mismatch");
    for (ExpertId h_star = 0; h_star < weights.k; ++h_star) {
        const bool gated = in_mask(active_targets, h_star);
        for (ExpertId h = 0; h < weights.k; ++h) {
            const double exponent =
                gated ? pseudo_epoch_loss[h] - eta * alg_epoch_loss + 1.0 : 1.0;
            weights.at(h_star, h) *= std::pow(eta, exponent);
        }
    }
}

EpochActiveSets epoch_active_sets(const LossStream& stream, const AssumptionParams& params,
                                  const EpochSchedule& schedule,
                                  std::span<const long long> reactivation_times) {
    require(!stream.adaptive(), "epoch active sets need an oblivious stream");
    const int k = stream.num_experts();
    const double budget = excess_threshold(params, schedule.horizon);

    std::vector<long long> times = sorted_reactivations(reactivation_times, schedule.horizon);
    EpochActiveSets sets;
    std::vector<char> resets(schedule.num_epochs + 1, 0);
    for (long long t : times) {
        resets[schedule.epoch_of_round(t)] = 1;
        if ((t - 1) % schedule.epoch_len != 0) sets.snapped = true;
    }

    std::uint64_t active = full_mask(k);
    std::vector<double> excess(k, 0.0);
    for (long long m = 1; m <= schedule.num_epochs; ++m) {
        if (resets[m]) {
            active = full_mask(k);
            std::fill(excess.begin(), excess.end(), 0.0);
        }
        sets.reactivation.push_back(m == 1 || resets[m]);
        sets.active.push_back(active);
        const auto [start, end] = schedule.epoch_bounds(m);
        std::uint64_t removed = 0;
        for (long long t = start; t <= end; ++t) {
            const auto& secondary = stream.round(t).secondary;
            for (int h = 0; h < k; ++h) {
                if (!in_mask(active, h) || in_mask(removed, h)) continue;
                excess[h] = std::max(excess[h], 0.0) + secondary[h] - params.c;
                if (excess[h] > budget) removed |= 1ULL << h;
            }
        }
        if (removed == active) {
            throw OracleStarvedError("oracle starved in epoch " + std::to_string(m));
        }
        sets.deactivated.push_back(removed);
        active &= ~removed;
    }
    return sets;
}

A2Result a2_run_detailed(const LossStream& stream, const AssumptionParams& params,
                         const A2Options& options, std::uint64_t seed,
                         const EpochActiveSets* injected) {
    require(!stream.adaptive(), "a2_run needs an oblivious stream");
    params.validate();
    const int k = stream.num_experts();
    const long long horizon = stream.horizon();
    const EpochSchedule schedule = EpochSchedule::make(horizon, params.alpha);

    EpochActiveSets sets = injected
                               ? *injected
                               : epoch_active_sets(stream, params, schedule,
                                                   options.reactivation_times);

    double eta;
    if (options.eta) {
        eta = *options.eta;
        require(eta >= kEtaMin && eta < 1.0, "eta outside [1/sqrt(2), 1)");
    } else {
        eta = 1.0 - std::sqrt(2.0 * std::log(static_cast<double>(k)) /
                              static_cast<double>(schedule.num_epochs));
        eta = std::clamp(eta, kEtaMin, 1.0 - 1e-6);
    }

    A2Result result{RunTrace(k, horizon), {}};
    result.diag.eta = eta;
    result.diag.snapped_reactivations = sets.snapped;

    SelectionWeights weights = SelectionWeights::init(k);
    ExpertMap f(k);
    Rng rng(seed);
    std::vector<double> prev_masked;
    ExpertId held = -1;

    for (long long m = 1; m <= schedule.num_epochs; ++m) {
        const std::uint64_t active = sets.active[m - 1];
        if (m > 1 && sets.reactivation[m - 1]) f.reset_identity();

        const std::vector<double> masked = weights.masked(active);
        double total = 0.0;
        for (double x : masked) total += x;
        std::vector<double> p(k);
        for (int h = 0; h < k; ++h) p[h] = masked[h] / total;

        if (held < 0 || sets.reactivation[m - 1]) {
            held = sample_from(rng, p);
        } else {
            const double keep = masked[held] / prev_masked[held];
            if (keep > 1.0 + 1e-9) {
                throw std::logic_error("keep probability above 1");
            }
            if (!(rng.next_double() < std::min(keep, 1.0))) held = sample_from(rng, p);
        }
        const ExpertId played = f(held);

        const auto [start, end] = schedule.epoch_bounds(m);
        const std::vector<double> q = pushforward(p, f, k);
        std::vector<std::vector<double>> pseudo_rows;
        pseudo_rows.reserve(static_cast<std::size_t>(end - start + 1));
        for (long long t = start; t <= end; ++t) {
            const auto& loss = stream.round(t);
            result.trace.append(q, played, active, loss.primary, loss.secondary, held);
            pseudo_rows.push_back(pseudo_primary(loss.primary, active));
        }
        const std::vector<double> pseudo_avg = epoch_average(pseudo_rows);

        double expected_alg = 0.0;
        for (int h = 0; h < k; ++h) expected_alg += p[h] * pseudo_avg[h];
        const double realized_alg = pseudo_avg[played];
        result.diag.expected_alg_loss.push_back(expected_alg);
        result.diag.realized_alg_loss.push_back(realized_alg);
        result.diag.probabilities.insert(result.diag.probabilities.end(), p.begin(), p.end());

        const double sum_before = weights.total();
        result.diag.weight_sums.push_back(sum_before);
        a2_weight_update(weights, active, pseudo_avg,
                         options.realized_update ? realized_alg : expected_alg, eta);
        const double sum_after = weights.total();
        if (sum_after > eta * sum_before + 1e-12) {
            if (options.realized_update) {
                ++result.diag.supermartingale_violations;
            } else {
                throw std::logic_error("weight-sum supermartingale violated");
            }
        }

        if (m < schedule.num_epochs) {
            f.repair(sets.deactivated[m - 1], sets.active[m]);
        }
        prev_masked = masked;
    }
    result.diag.weight_sums.push_back(weights.total());
    return result;
}

RunTrace a2_run(const LossStream& stream, const AssumptionParams& params,
                std::span<const long long> reactivation_times, std::optional<double> eta,
                std::uint64_t seed) {
    A2Options options;
    options.eta = eta;
    options.reactivation_times.assign(reactivation_times.begin(), reactivation_times.end());
    return a2_run_detailed(stream, params, options, seed).trace;
}

}  // namespace bicrit
