#include "bicrit/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bicrit {

namespace {

constexpr double kUnderflowFloor = 1e-150;

SimplexDistribution normalize(const std::vector<double>& w) {
    double sum = 0.0;
    for (double x : w) sum += x;
    SimplexDistribution dist;
    dist.w.resize(w.size());
    for (std::size_t h = 0; h < w.size(); ++h) dist.w[h] = w[h] / sum;
    return dist;
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

// Rescales by a power of two so multiplicative weight ratios survive exactly.
void renorm_if_tiny(std::vector<double>& w, double* companion = nullptr) {
    double max_w = 0.0;
    for (double x : w) max_w = std::max(max_w, x);
    if (max_w >= kUnderflowFloor) return;
    const double scale = std::ldexp(1.0, -std::ilogb(max_w));
    for (double& x : w) x *= scale;
    if (companion) *companion *= scale;
}

void check_loss(std::span<const double> loss, int k) {
    if (static_cast<int>(loss.size()) != k) throw std::invalid_argument("loss width mismatch");
    for (double x : loss) {
        if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("loss outside [0,1]");
    }
}

class EwLearner final : public Learner {
public:
    EwLearner(int k, long long horizon, std::uint64_t seed)
        : Learner(k, horizon),
          rate_(std::sqrt(8.0 * std::log(static_cast<double>(k)) /
                          static_cast<double>(horizon))),
          w_(k, 1.0),
          rng_(seed) {}

protected:
    StepResult do_step() override {
        if (k_ == 1) return {0, SimplexDistribution{{1.0}}};
        SimplexDistribution p = normalize(w_);
        return {sample_from(rng_, p.w), std::move(p)};
    }

    void do_observe(std::span<const double> loss) override {
        for (int h = 0; h < k_; ++h) w_[h] *= std::exp(-rate_ * loss[h]);
        renorm_if_tiny(w_);
    }

private:
    double rate_;
    std::vector<double> w_;
    Rng rng_;
};

// Shrinking Dartboard: weights decay by (1-eps)^loss; the previous selection
// is kept with probability w_t(h)/w_{t-1}(h), otherwise the new selection is
// resampled from the normalized weights. The reported distribution w_t/W_t
// is the exact marginal law of the selection.
class SdLearner final : public Learner {
public:
    SdLearner(int k, long long horizon, std::uint64_t seed)
        : Learner(k, horizon),
          eps_(std::min(0.5, std::sqrt(std::log(static_cast<double>(k)) /
                                       static_cast<double>(horizon)))),
          w_(k, 1.0),
          rng_(seed) {}

protected:
    StepResult do_step() override {
        if (k_ == 1) return {0, SimplexDistribution{{1.0}}};
        SimplexDistribution p = normalize(w_);
        if (held_ < 0) {
            held_ = sample_from(rng_, p.w);
        } else {
            const double keep = w_[held_] / held_weight_;
            if (!(rng_.next_double() < keep)) held_ = sample_from(rng_, p.w);
        }
        held_weight_ = w_[held_];
        return {held_, std::move(p)};
    }

    void do_observe(std::span<const double> loss) override {
        for (int h = 0; h < k_; ++h) w_[h] *= std::pow(1.0 - eps_, loss[h]);
        renorm_if_tiny(w_, held_ >= 0 ? &held_weight_ : nullptr);
    }

private:
    double eps_;
    std::vector<double> w_;
    ExpertId held_ = -1;
    double held_weight_ = 1.0;
    Rng rng_;
};

// Coupled lazy leader: one uniform grid offset per expert, drawn once. The
// round-t leader minimizes the grid point below its cumulative loss, so the
// marginal law each round equals follow-the-perturbed-leader with U[0,span)
// perturbations while the leader only changes when its own cumulative loss
// crosses a grid line.
class FllCoupledLearner final : public Learner {
public:
    FllCoupledLearner(int k, long long horizon, std::uint64_t seed)
        : Learner(k, horizon), cum_(k, 0.0), offset_(k, 0.0) {
        span_ = std::max(1.0, std::sqrt(static_cast<double>(horizon) /
                                        std::log(std::max(2, k))));
        Rng rng(seed);
        if (k_ > 1) {
            for (int h = 0; h < k_; ++h) offset_[h] = rng.uniform(0.0, span_);
        }
    }

protected:
    StepResult do_step() override {
        if (k_ == 1) return {0, SimplexDistribution{{1.0}}};
        ExpertId leader = 0;
        double best = std::numeric_limits<double>::infinity();
        for (int h = 0; h < k_; ++h) {
            const double shifted = cum_[h] - offset_[h];
            const double v = cum_[h] - (shifted - span_ * std::floor(shifted / span_));
            if (v < best) {
                best = v;
                leader = h;
            }
        }
        return {leader, fpl_uniform_law(cum_, span_)};
    }

    void do_observe(std::span<const double> loss) override {
        for (int h = 0; h < k_; ++h) cum_[h] += loss[h];
    }

private:
    double span_;
    std::vector<double> cum_;
    std::vector<double> offset_;
};

// Grid-scheduled lazy leader: redraws exponential perturbations every
// `redraw_gap_` rounds and holds the perturbed leader in between.
class FllGridLearner final : public Learner {
public:
    FllGridLearner(int k, long long horizon, std::uint64_t seed)
        : Learner(k, horizon), cum_(k, 0.0), rng_(seed) {
        if (k_ > 16) throw std::invalid_argument("grid FLL supports K <= 16");
        theta_ = std::max(1.0, std::sqrt(static_cast<double>(horizon) /
                                         std::log(std::max(2, k))));
        redraw_gap_ = std::max<long long>(
            1, static_cast<long long>(std::ceil(std::sqrt(static_cast<double>(horizon)))));
    }

protected:
    StepResult do_step() override {
        if (k_ == 1) return {0, SimplexDistribution{{1.0}}};
        if (round_ % redraw_gap_ == 0) {
            double best = std::numeric_limits<double>::infinity();
            held_ = 0;
            for (int h = 0; h < k_; ++h) {
                const double v = cum_[h] - rng_.exponential(theta_);
                if (v < best) {
                    best = v;
                    held_ = h;
                }
            }
            held_law_ = fpl_exponential_law(cum_, 1.0 / theta_);
        }
        return {held_, held_law_};
    }

    void do_observe(std::span<const double> loss) override {
        for (int h = 0; h < k_; ++h) cum_[h] += loss[h];
        ++round_;
    }

private:
    double theta_ = 1.0;
    long long redraw_gap_ = 1;
    long long round_ = 0;
    ExpertId held_ = 0;
    SimplexDistribution held_law_;
    std::vector<double> cum_;
    Rng rng_;
};

}  // namespace

Learner::Learner(int k, long long horizon) : k_(k), horizon_(horizon) {
    if (k < 1) throw std::invalid_argument("K must be positive");
    if (horizon < 1) throw std::invalid_argument("horizon must be positive");
}

StepResult Learner::step() {
    if (awaiting_observe_) throw std::logic_error("step called twice without observe");
    awaiting_observe_ = true;
    StepResult result = do_step();
    result.dist.validate();
    return result;
}

void Learner::observe(std::span<const double> loss) {
    if (!awaiting_observe_) throw std::logic_error("observe without a preceding step");
    check_loss(loss, k_);
    do_observe(loss);
    awaiting_observe_ = false;
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, int k, long long horizon,
                                      std::uint64_t seed, FllVariant variant) {
    switch (kind) {
        case LearnerKind::Ew:
            return std::make_unique<EwLearner>(k, horizon, seed);
        case LearnerKind::Sd:
            return std::make_unique<SdLearner>(k, horizon, seed);
        case LearnerKind::Fll:
            if (variant == FllVariant::Grid) {
                return std::make_unique<FllGridLearner>(k, horizon, seed);
            }
            return std::make_unique<FllCoupledLearner>(k, horizon, seed);
    }
    throw std::invalid_argument("unknown learner kind");
}

SimplexDistribution fpl_uniform_law(std::span<const double> cum, double span) {
    const int k = static_cast<int>(cum.size());
    if (span <= 0.0) throw std::invalid_argument("span must be positive");
    SimplexDistribution law;
    law.w.assign(k, 0.0);
    if (k == 1) {
        law.w[0] = 1.0;
        return law;
    }

    std::vector<double> breaks;
    std::vector<double> coef;
    for (int j = 0; j < k; ++j) {
        // P(j wins) = int_0^span (1/span) prod_{h != j} clamp((x+d_h)/span, 0, 1) dx
        // with d_h = cum[h] - cum[j]. Piecewise polynomial in x; integrate each
        // piece exactly by expanding the product in piece-local coordinates.
        breaks.clear();
        breaks.push_back(0.0);
        breaks.push_back(span);
        bool impossible = false;
        for (int h = 0; h < k && !impossible; ++h) {
            if (h == j) continue;
            const double d = cum[h] - cum[j];
            if (-d >= span) impossible = true;  // factor is 0 on the whole range
            if (-d > 0.0 && -d < span) breaks.push_back(-d);
            if (span - d > 0.0 && span - d < span) breaks.push_back(span - d);
        }
        if (impossible) continue;
        std::sort(breaks.begin(), breaks.end());

        double total = 0.0;
        for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
            const double a = breaks[i], b = breaks[i + 1];
            const double width = b - a;
            if (width <= 0.0) continue;
            // Product over experts of (c_h + u/span) for interior factors,
            // constant 0/1 otherwise, with u in [0, width].
            coef.assign(1, 1.0);
            bool zero = false;
            for (int h = 0; h < k && !zero; ++h) {
                if (h == j) continue;
                const double d = cum[h] - cum[j];
                const double at_mid = (0.5 * (a + b) + d) / span;
                if (at_mid <= 0.0) {
                    zero = true;
                } else if (at_mid >= 1.0) {
                    continue;  // saturated at 1
                } else {
                    const double c0 = (a + d) / span;
                    coef.push_back(0.0);
                    for (std::size_t q = coef.size() - 1; q > 0; --q) {
                        coef[q] = coef[q] * c0 + coef[q - 1] / span;
                    }
                    coef[0] *= c0;
                }
            }
            if (zero) continue;
            double piece = 0.0;
            double upow = width;
            for (std::size_t q = 0; q < coef.size(); ++q) {
                piece += coef[q] * upow / static_cast<double>(q + 1);
                upow *= width;
            }
            total += piece / span;
        }
        law.w[j] = std::max(0.0, total);
    }

    double sum = 0.0;
    for (double x : law.w) sum += x;
    if (std::fabs(sum - 1.0) > 1e-6) throw std::logic_error("perturbed-leader law failed to normalize");
    for (double& x : law.w) x /= sum;
    return law;
}

SimplexDistribution fpl_exponential_law(std::span<const double> cum, double lambda) {
    const int k = static_cast<int>(cum.size());
    if (k > 16) throw std::invalid_argument("exponential law supports K <= 16");
    if (lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
    SimplexDistribution law;
    law.w.assign(k, 0.0);
    if (k == 1) {
        law.w[0] = 1.0;
        return law;
    }

    std::vector<double> d(k);
    for (int j = 0; j < k; ++j) {
        double floor_x = 0.0;  // integration starts where all factors are positive
        int others = 0;
        for (int h = 0; h < k; ++h) {
            if (h == j) continue;
            d[others++] = cum[h] - cum[j];
            floor_x = std::max(floor_x, -(cum[h] - cum[j]));
        }
        // P(j wins) = int lambda e^{-lambda x} prod_h (1 - e^{-lambda(x+d_h)}) dx
        // expanded by inclusion-exclusion over subsets of the other experts.
        double total = 0.0;
        for (unsigned mask = 0; mask < (1u << others); ++mask) {
            double shifted = floor_x;  // accumulates sum_{h in S} (d_h + floor_x)
            int bits = 0;
            for (int b = 0; b < others; ++b) {
                if (mask & (1u << b)) {
                    shifted += d[b] + floor_x;
                    ++bits;
                }
            }
            const double term = std::exp(-lambda * shifted) / static_cast<double>(bits + 1);
            total += (bits % 2 == 0) ? term : -term;
        }
        law.w[j] = std::max(0.0, total);
    }

    double sum = 0.0;
    for (double x : law.w) sum += x;
    if (std::fabs(sum - 1.0) > 1e-6) throw std::logic_error("perturbed-leader law failed to normalize");
    for (double& x : law.w) x /= sum;
    return law;
}

}  // namespace bicrit
