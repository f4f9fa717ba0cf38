#pragma once

#include <memory>
#include <span>

#include "bicrit/rng.hpp"
#include "bicrit/types.hpp"

namespace bicrit {

enum class LearnerKind { Ew, Sd, Fll };

// The lazy-leader schedule: Coupled re-derives the leader from a shared
// perturbation grid every round (switches only when the leader's cumulative
// loss crosses a grid line); Grid redraws fresh perturbations on a fixed
// round grid and holds the leader in between.
enum class FllVariant { Coupled, Grid };

struct StepResult {
    ExpertId choice = 0;
    SimplexDistribution dist;  // marginal law of `choice`
};

/// Scalar-loss base learner: step() once per round, then observe() the
/// full loss vector. Identical seeds produce identical trajectories.
class Learner {
public:
    virtual ~Learner() = default;

    StepResult step();
    void observe(std::span<const double> loss);

    int num_experts() const { return k_; }
    long long horizon() const { return horizon_; }

protected:
    Learner(int k, long long horizon);

    virtual StepResult do_step() = 0;
    virtual void do_observe(std::span<const double> loss) = 0;

    int k_;
    long long horizon_;

private:
    bool awaiting_observe_ = false;
};

std::unique_ptr<Learner> make_learner(LearnerKind kind, int k, long long horizon,
                                      std::uint64_t seed,
                                      FllVariant variant = FllVariant::Coupled);

// Exact marginal law of argmin_h(cum[h] - r_h) for i.i.d. perturbations.
// Uniform: r ~ U[0, span); exponential: r ~ Exp(rate lambda). Used by the
// lazy-leader learners to report the true selection distribution.
SimplexDistribution fpl_uniform_law(std::span<const double> cum, double span);
SimplexDistribution fpl_exponential_law(std::span<const double> cum, double lambda);

}  // namespace bicrit
