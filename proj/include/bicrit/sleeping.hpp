#pragma once

#include <optional>
#include <span>
#include <vector>

#include "bicrit/learners.hpp"
#include "bicrit/meta_asl.hpp"
#include "bicrit/types.hpp"

namespace bicrit {

/// Per-round active sets H_t and end-of-round deactivations dH_t. H_1 is the
/// full expert set; H_{t+1} = H_t \ dH_t except at reactivation rounds, where
/// H_t resets to the full set. H_t is never empty (oracle-starved otherwise).
struct ActiveSetTimeline {
    int k = 0;
    long long horizon = 0;
    std::vector<std::uint64_t> active;       // H_t, index t-1
    std::vector<std::uint64_t> deactivated;  // dH_t, index t-1
    std::vector<long long> first_deactivation;  // per expert, -1 if never
};

/// Incremental deactivation rule shared by both oracles: an active expert
/// leaves once some suffix of its secondary losses exceeds c by more than
/// delta*ceil(T^alpha). The suffix maximum is maintained in O(1) per round
/// as s <- max(s,0) + (l2 - c). With reactivation times the window restarts
/// at each block, which is Oracle 2; without any, this is Oracle 1.
class DeactivationOracle {
public:
    DeactivationOracle(int k, const AssumptionParams& params, long long budget_horizon,
                       std::vector<long long> reactivation_times = {});

    // Applies reactivation at the start of round t and returns H_t.
    std::uint64_t begin_round(long long t);

    // Feeds round-t secondary losses; returns dH_t and shrinks the active
    // set. Throws OracleStarvedError if no expert would remain.
    std::uint64_t end_round(long long t, std::span<const double> secondary);

    std::uint64_t active_mask() const { return active_; }

private:
    int k_;
    double c_;
    double budget_;
    std::uint64_t active_;
    std::vector<double> suffix_excess_;
    std::vector<long long> reactivations_;  // sorted, excludes t=1
};

ActiveSetTimeline oracle1_timeline(const LossStream& stream, const AssumptionParams& params,
                                   long long budget_horizon = 0);
ActiveSetTimeline oracle2_timeline(const LossStream& stream, const AssumptionParams& params,
                                   std::span<const long long> reactivation_times,
                                   long long budget_horizon = 0);

/// Primary losses with inactive experts pinned to 1.
std::vector<double> pseudo_primary(std::span<const double> loss, std::uint64_t active_mask);

/// Repairable map sending every expert to an active one.
class ExpertMap {
public:
    explicit ExpertMap(int k);

    ExpertId operator()(ExpertId h) const { return map_[h]; }

    // Every h whose image was just deactivated is redirected to the
    // lowest-index member of the next active set.
    void repair(std::uint64_t removed, std::uint64_t next_active);
    void reset_identity();

    std::uint64_t range_mask() const;

private:
    std::vector<ExpertId> map_;
};

/// Algorithm 1: A_SL over pseudo primary losses under Oracle 1; inactive
/// picks are redirected through the expert map. `budget_horizon` overrides
/// the T used for the epoch length and the oracle budget (the restart
/// composition passes the global horizon for each block).
RunTrace a1_run(const LossStream& stream, const AssumptionParams& params, LearnerKind base,
                std::uint64_t seed, FllVariant variant = FllVariant::Coupled,
                long long budget_horizon = 0);

/// Restarting Algorithm 1 at each reactivation time (Oracle 2 baseline).
RunTrace restart_a1_run(const LossStream& stream, const AssumptionParams& params,
                        LearnerKind base, std::span<const long long> reactivation_times,
                        std::uint64_t seed, FllVariant variant = FllVariant::Coupled);

/// Experimental baseline: restart A_SL over the surviving experts whenever a
/// deactivation occurred in the previous round.
RunTrace a1_deact_restart_run(const LossStream& stream, const AssumptionParams& params,
                              LearnerKind base, std::uint64_t seed,
                              FllVariant variant = FllVariant::Coupled);

/// Per-target selection weights of Algorithm 2: w[h_star][h], initialised to
/// 1/K; the per-expert weight is the sum over currently-active targets.
struct SelectionWeights {
    int k = 0;
    std::vector<double> w;  // w[h_star * k + h]

    static SelectionWeights init(int k);

    double& at(ExpertId h_star, ExpertId h) { return w[static_cast<std::size_t>(h_star) * k + h]; }
    double at(ExpertId h_star, ExpertId h) const {
        return w[static_cast<std::size_t>(h_star) * k + h];
    }

    std::vector<double> masked(std::uint64_t active_targets) const;
    double total() const;
};

/// The exact exponent update w^{h*}_{m+1,h} = w^{h*}_{m,h} *
/// eta^{I(h*) * (pseudo_h - eta * alg) + 1}. Requires eta in [1/sqrt(2), 1).
void a2_weight_update(SelectionWeights& weights, std::uint64_t active_targets,
                      std::span<const double> pseudo_epoch_loss, double alg_epoch_loss,
                      double eta);

/// Epoch-aligned active sets for Algorithm 2 (the oracle is applied at epoch
/// boundaries only).
struct EpochActiveSets {
    std::vector<std::uint64_t> active;       // at the start of epoch m, index m-1
    std::vector<std::uint64_t> deactivated;  // during epoch m, applied at m+1
    std::vector<char> reactivation;          // epoch m resets to the full set
    bool snapped = false;  // some reactivation time was not epoch-aligned
};

EpochActiveSets epoch_active_sets(const LossStream& stream, const AssumptionParams& params,
                                  const EpochSchedule& schedule,
                                  std::span<const long long> reactivation_times);

struct A2Options {
    std::optional<double> eta;
    std::vector<long long> reactivation_times;
    // The weight update's algorithm loss: the expected pseudo loss under p_m
    // (the analysis' choice, keeps the selection law exact) or the realized
    // pseudo loss of the played expert.
    bool realized_update = false;
};

struct A2Diagnostics {
    double eta = 0.0;
    std::vector<double> weight_sums;        // per epoch, before the update
    std::vector<double> probabilities;      // p_{m,h}, row-major per epoch
    std::vector<double> expected_alg_loss;  // per epoch
    std::vector<double> realized_alg_loss;  // per epoch
    long long supermartingale_violations = 0;  // only possible in realized mode
    bool snapped_reactivations = false;
};

struct A2Result {
    RunTrace trace;
    A2Diagnostics diag;
};

/// Algorithm 2: time-selection weights with lazy switching under Oracle 2.
/// `injected` replaces the oracle-derived epoch active sets (test hook).
A2Result a2_run_detailed(const LossStream& stream, const AssumptionParams& params,
                         const A2Options& options, std::uint64_t seed,
                         const EpochActiveSets* injected = nullptr);

RunTrace a2_run(const LossStream& stream, const AssumptionParams& params,
                std::span<const long long> reactivation_times, std::optional<double> eta,
                std::uint64_t seed);

}  // namespace bicrit
