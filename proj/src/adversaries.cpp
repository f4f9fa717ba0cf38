#include "bicrit/adversaries.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "bicrit/rng.hpp"

namespace bicrit {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

std::vector<LossVectorPair> blank_rounds(long long t_horizon, int k) {
    return std::vector<LossVectorPair>(
        static_cast<std::size_t>(t_horizon),
        LossVectorPair{std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)});
}

}  // namespace

std::pair<double, double> threshold_losses(double a, double b) {
    require(a >= 0.0 && a <= 1.0, "a outside [0,1]");
    require(b >= 0.0 && b <= 1.0, "b outside [0,1]");
    return {(1.0 - a) * b + a * (1.0 - b), (1.0 - a) * b};
}

BuiltStream build_theorem1(long long t_horizon, std::uint64_t seed) {
    require(t_horizon >= 2, "T must be at least 2");
    Rng rng(seed);
    const int world = rng.bernoulli(0.5) ? 1 : 2;
    const long long phase1_end = t_horizon / 2;

    const auto h1_base = threshold_losses(5.0 / 8.0, 1.0 / 6.0);  // (7/12, 1/16)
    const auto h2_base = threshold_losses(5.0 / 8.0, 0.0);        // (5/8, 0)
    const auto h1_w1 = threshold_losses(3.0 / 4.0, 0.0);          // (3/4, 0)
    const auto h2_w1 = threshold_losses(3.0 / 4.0, 0.5);          // (1/2, 1/8)

    auto rounds = blank_rounds(t_horizon, 2);
    for (long long t = 1; t <= t_horizon; ++t) {
        const bool phase2_world1 = world == 1 && t > phase1_end;
        const auto h1 = phase2_world1 ? h1_w1 : h1_base;
        const auto h2 = phase2_world1 ? h2_w1 : h2_base;
        auto& r = rounds[t - 1];
        r.primary = {h1.first, h2.first};
        r.secondary = {h1.second, h2.second};
    }

    BuiltStream built{LossStream::make_oblivious(
                          2, std::move(rounds),
                          StreamInfo{1.0 / 16.0, 1.0, 1.0, world, "theorem1"}),
                      AssumptionParams{1.0 / 16.0, 1.0, 1.0}, world};
    return built;
}

BuiltStream build_theorem2(long long t_horizon, double alpha) {
    const long long m = ceil_pow(t_horizon, alpha);
    require(t_horizon > 2 * m, "T must exceed two phases of ceil(T^alpha)");

    const auto predict_neg = threshold_losses(3.0 / 4.0, 1.0);  // (1/4, 1/4)
    const auto predict_pos = threshold_losses(3.0 / 4.0, 0.0);  // (3/4, 0)

    auto rounds = blank_rounds(t_horizon, 2);
    for (long long t = 1; t <= t_horizon; ++t) {
        const int phase = t <= m ? 1 : (t <= 2 * m ? 2 : 3);
        const auto h1 = phase == 1 ? predict_neg : predict_pos;
        const auto h2 = phase == 2 ? predict_neg : predict_pos;
        auto& r = rounds[t - 1];
        r.primary = {h1.first, h2.first};
        r.secondary = {h1.second, h2.second};
    }

    AssumptionParams params{0.0, 1.0, alpha};
    return BuiltStream{LossStream::make_oblivious(2, std::move(rounds),
                                                  StreamInfo{0.0, 1.0, alpha, -1, "theorem2"}),
                       params, -1};
}

LossStream adaptive_lb(long long t_horizon, double alpha, double c, double delta, int k,
                       std::uint64_t seed) {
    require(k >= 1 && k <= kMaxExperts, "K outside [1,64]");
    if (c + delta > 1.0) {
        throw InfeasibleAdversaryError("adaptive_lb needs c + delta <= 1");
    }
    const long long m = ceil_pow(t_horizon, alpha);
    const long long epochs = (t_horizon + m - 1) / m;

    // Oblivious fair-coin primaries, constant within each epoch.
    auto coins = std::make_shared<std::vector<double>>();
    coins->reserve(static_cast<std::size_t>(epochs) * k);
    Rng rng(seed);
    for (long long e = 0; e < epochs; ++e) {
        for (int h = 0; h < k; ++h) coins->push_back(rng.bernoulli(0.5) ? 1.0 : 0.0);
    }

    auto gen = [coins, m, c, delta, k](long long t,
                                       std::span<const ExpertId> history) -> LossVectorPair {
        LossVectorPair pair;
        const long long epoch = (t - 1) / m;
        pair.primary.assign(coins->begin() + epoch * k, coins->begin() + (epoch + 1) * k);
        pair.secondary.assign(k, c + delta);
        if (t > m) {
            // The held expert earns c only after m consecutive selections.
            const ExpertId last = history[t - 2];
            long long run = 0;
            while (run < m && history[t - 2 - run] == last) ++run;
            if (run >= m) pair.secondary[last] = c;
        }
        return pair;
    };

    return LossStream::make_adaptive(k, t_horizon, std::move(gen),
                                     StreamInfo{c, delta, alpha, -1, "adaptive-lb"});
}

BuiltStream build_appendixB(long long t_horizon, double alpha, std::uint64_t seed) {
    const double beta = (1.0 + alpha) / 2.0;
    const double c = 0.5, delta = 0.5;
    long long len = ceil_pow(t_horizon, beta);
    len += len & 1;  // even length so interval targets are integers
    require(t_horizon >= len, "T too small for one interval");
    const long long half = len / 2;
    const long long count = t_horizon / len;
    const double wobble = delta * std::pow(static_cast<double>(t_horizon), alpha - beta);

    Rng rng(seed);
    const int world = rng.bernoulli(0.5) ? 0 : 1 + rng.uniform_int(static_cast<int>(count));

    auto rounds = blank_rounds(t_horizon, 2);

    // World-0 pattern everywhere; world w reuses its secondary losses.
    for (long long t = 1; t <= t_horizon; ++t) {
        const long long interval = (t - 1) / len + 1;
        const bool first_half = (t - 1) % len < half;
        const bool odd = interval % 2 == 1;
        auto& r = rounds[t - 1];
        if (first_half) {
            const int low = odd ? 0 : 1;  // expert with primary 0 in this half
            r.primary[low] = 0.0;
            r.primary[1 - low] = 1.0;
            r.secondary[low] = c + wobble;
            r.secondary[1 - low] = c - wobble;
        } else {
            const int low = odd ? 1 : 0;
            r.primary[low] = 0.0;
            r.primary[1 - low] = 1.0;
            r.secondary = {c, c};
        }
    }

    if (world > 0) {
        const long long w = world;
        const long long block_end = (w - 1) * len;
        const double slack = std::sqrt(static_cast<double>(block_end) *
                                       std::log(static_cast<double>(t_horizon)));
        const long long iid_end =
            std::max<long long>(0, static_cast<long long>(std::floor(block_end - 2.0 * slack)));

        long long cum[2] = {0, 0};
        for (long long t = 1; t <= iid_end; ++t) {
            for (int h = 0; h < 2; ++h) {
                const double x = rng.bernoulli(0.5) ? 1.0 : 0.0;
                rounds[t - 1].primary[h] = x;
                cum[h] += static_cast<long long>(x);
            }
        }
        const bool both_concentrated =
            std::fabs(cum[0] - iid_end / 2.0) <= slack && std::fabs(cum[1] - iid_end / 2.0) <= slack;
        for (int h = 0; h < 2; ++h) {
            // Compensation block: hit exactly block_end/2 cumulative primaries
            // when the concentration events hold, otherwise all ones.
            long long ones = block_end - iid_end;
            if (both_concentrated) {
                ones = std::clamp<long long>(block_end / 2 - cum[h], 0, block_end - iid_end);
            }
            for (long long t = iid_end + 1; t <= block_end; ++t) {
                rounds[t - 1].primary[h] = t - iid_end <= ones ? 1.0 : 0.0;
            }
        }
        // First half of interval w keeps the world-0 primaries; everything
        // after its midpoint is 1 for both experts.
        for (long long t = block_end + half + 1; t <= t_horizon; ++t) {
            rounds[t - 1].primary = {1.0, 1.0};
        }
    }

    AssumptionParams params{c, delta, alpha};
    return BuiltStream{LossStream::make_oblivious(
                           2, std::move(rounds), StreamInfo{c, delta, alpha, world, "appendixB"}),
                       params, world};
}

BuiltStream build_linK(long long t_horizon, int k, double alpha, double c, double delta) {
    require(k >= 2 && k <= kMaxExperts, "K outside [2,64]");
    AssumptionParams params{c, delta, alpha};
    params.validate();

    std::vector<long long> bounds(k + 1, 0);  // T_0..T_K
    for (int i = 1; i <= k; ++i) {
        const double expo = alpha + (i - 1) * (1.0 - alpha) / (k - 1);
        bounds[i] = ceil_pow(t_horizon, expo);
        require(bounds[i] > bounds[i - 1], "deactivation boundaries must increase");
    }

    const double budget = excess_threshold(params, t_horizon);
    std::vector<double> rate(k);
    for (int i = 1; i <= k; ++i) {
        rate[i - 1] = budget / static_cast<double>(bounds[i] - bounds[i - 1]);
        if (c + rate[i - 1] > 1.0) {
            throw InfeasibleAdversaryError("linK expert " + std::to_string(i) +
                                           " needs secondary loss above 1");
        }
    }

    auto rounds = blank_rounds(t_horizon, k);
    for (long long t = 1; t <= t_horizon; ++t) {
        auto& r = rounds[t - 1];
        for (int h = 0; h < k; ++h) {
            if (t <= bounds[h]) {
                r.primary[h] = 1.0;
                r.secondary[h] = c;
            } else {
                r.primary[h] = 0.0;
                r.secondary[h] = c + rate[h];
            }
        }
    }

    return BuiltStream{LossStream::make_oblivious(k, std::move(rounds),
                                                  StreamInfo{c, delta, alpha, -1, "linK"}),
                       params, -1};
}

LossStream random_bounded_variance(long long t_horizon, int k, const AssumptionParams& params,
                                   double amplitude, std::uint64_t seed) {
    params.validate();
    require(amplitude >= 0.0, "amplitude must be nonnegative");
    require(params.c - amplitude >= 0.0 && params.c + amplitude <= 1.0,
            "c +/- amplitude must stay in [0,1]");

    // Clip just below the budget so the checker passes with margin to spare.
    const double cap = 0.99 * excess_threshold(params, t_horizon);
    Rng rng(seed);
    std::vector<double> excess(k, 0.0);
    auto rounds = blank_rounds(t_horizon, k);
    for (long long t = 1; t <= t_horizon; ++t) {
        auto& r = rounds[t - 1];
        for (int h = 0; h < k; ++h) r.primary[h] = rng.next_double();
        for (int h = 0; h < k; ++h) {
            double step = rng.uniform(-amplitude, amplitude);
            const double carried = std::max(excess[h], 0.0);
            if (carried + step > cap) step = cap - carried;
            excess[h] = carried + step;
            r.secondary[h] = params.c + step;
        }
    }

    return LossStream::make_oblivious(
        k, std::move(rounds),
        StreamInfo{params.c, params.delta, params.alpha, -1, "random-good"});
}

}  // namespace bicrit
