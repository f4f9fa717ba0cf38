#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bicrit {

using ExpertId = int;

// Absolute tolerance for simplex and sum checks; losses are O(1).
inline constexpr double kSimplexTol = 1e-9;

// Active sets are stored as bitmasks, which caps K.
inline constexpr int kMaxExperts = 64;

// Raised when a deactivation oracle would leave no active expert.
struct OracleStarvedError : std::runtime_error {
    explicit OracleStarvedError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when an adversary construction cannot keep losses in [0,1].
struct InfeasibleAdversaryError : std::runtime_error {
    explicit InfeasibleAdversaryError(const std::string& what) : std::runtime_error(what) {}
};

inline std::uint64_t full_mask(int k) {
    return k >= 64 ? ~0ULL : ((1ULL << k) - 1);
}

inline bool in_mask(std::uint64_t mask, ExpertId h) {
    return (mask >> h) & 1ULL;
}

/// Per-round pair of loss vectors over K experts, all entries in [0,1].
struct LossVectorPair {
    std::vector<double> primary;
    std::vector<double> secondary;

    void validate(int k) const;
};

/// c, delta, alpha of the bounded-variance assumption, all in [0,1].
struct AssumptionParams {
    double c = 0.0;
    double delta = 0.0;
    double alpha = 0.0;

    void validate() const;
};

// Metadata a builder attaches to its stream (world index for randomized
// constructions, the c/delta/alpha the construction was built for).
struct StreamInfo {
    double c = -1.0;
    double delta = -1.0;
    double alpha = -1.0;
    int world = -1;
    std::string name;
};

/// A horizon-T sequence of loss pairs. Oblivious streams hold a precomputed
/// T x K x 2 table and are immutable; adaptive streams hold a generator that
/// is a deterministic function of (t, realized selection history, seed).
class LossStream {
public:
    using AdaptiveFn =
        std::function<LossVectorPair(long long t, std::span<const ExpertId> history)>;

    static LossStream make_oblivious(int k, std::vector<LossVectorPair> rounds,
                                     StreamInfo info = {});
    static LossStream make_adaptive(int k, long long t_horizon, AdaptiveFn gen,
                                    StreamInfo info = {});

    long long horizon() const { return horizon_; }
    int num_experts() const { return k_; }
    bool adaptive() const { return static_cast<bool>(gen_); }
    const StreamInfo& info() const { return info_; }

    // Oblivious access, t is 1-based.
    const LossVectorPair& round(long long t) const;

    // Works for both kinds; history covers rounds 1..t-1.
    LossVectorPair reveal(long long t, std::span<const ExpertId> history) const;

    // Tab-separated export: header `#bicrit-stream v1 K T c delta alpha`,
    // then one line per round with the K primary then K secondary losses.
    void write(std::ostream& os) const;
    static LossStream read(std::istream& is);

private:
    LossStream() = default;

    int k_ = 0;
    long long horizon_ = 0;
    std::vector<LossVectorPair> rounds_;
    AdaptiveFn gen_;
    StreamInfo info_;
};

/// Probability vector over experts.
struct SimplexDistribution {
    std::vector<double> w;

    // Entries >= 0, sum to 1 within kSimplexTol, support inside `support`.
    void validate(std::uint64_t support = ~0ULL) const;
};

/// Full record of one run: per-round distribution, realized selection,
/// active set, revealed losses, plus incrementally maintained cumulative
/// sums for every expert and for the algorithm (expected and realized).
class RunTrace {
public:
    RunTrace(int k, long long t_horizon);

    void append(std::span<const double> dist, ExpertId selection, std::uint64_t active_mask,
                std::span<const double> loss1, std::span<const double> loss2,
                ExpertId learner_choice = -1);

    int num_experts() const { return k_; }
    long long horizon() const { return horizon_; }
    long long rounds_recorded() const { return recorded_; }
    bool complete() const { return recorded_ == horizon_; }

    // All accessors are 1-based in t.
    std::span<const double> dist(long long t) const { return row(dist_, t); }
    std::span<const double> loss1(long long t) const { return row(loss1_, t); }
    std::span<const double> loss2(long long t) const { return row(loss2_, t); }
    ExpertId selection(long long t) const { return selection_[t - 1]; }
    std::uint64_t active_mask(long long t) const { return active_[t - 1]; }
    ExpertId learner_choice(long long t) const { return learner_choice_[t - 1]; }

    double expert_loss1(ExpertId h) const { return cum1_[h]; }
    double expert_loss2(ExpertId h) const { return cum2_[h]; }
    double alg_loss1_expected() const { return alg1_expected_; }
    double alg_loss2_expected() const { return alg2_expected_; }
    double alg_loss1_realized() const { return alg1_realized_; }
    double alg_loss2_realized() const { return alg2_realized_; }

    long long active_rounds(ExpertId h) const { return active_rounds_[h]; }

    bool operator==(const RunTrace& other) const;

    // Line-oriented text format: header `#bicrit-trace v1 K=<K> T=<T>`, then
    // per round the tab-separated t, A_t, active-set mask (hex), and the
    // selected expert's primary and secondary losses.
    void write(std::ostream& os) const;

    struct FileRow {
        long long t;
        ExpertId selection;
        std::uint64_t active_mask;
        double loss1;
        double loss2;
    };
    struct File {
        int k;
        long long t_horizon;
        std::vector<FileRow> rows;
    };
    static File read(std::istream& is);

private:
    std::span<const double> row(const std::vector<double>& m, long long t) const {
        return {m.data() + (t - 1) * k_, static_cast<std::size_t>(k_)};
    }

    int k_;
    long long horizon_;
    long long recorded_ = 0;
    std::vector<double> dist_, loss1_, loss2_;
    std::vector<ExpertId> selection_, learner_choice_;
    std::vector<std::uint64_t> active_;
    std::vector<double> cum1_, cum2_;
    std::vector<long long> active_rounds_;
    double alg1_expected_ = 0, alg2_expected_ = 0;
    double alg1_realized_ = 0, alg2_realized_ = 0;
};

/// Regret summary of one trace. Floored values follow the max(.,1)
/// definition; raw values are kept for diagnostics.
struct RegretReport {
    double reg1_expected = 1, reg1_realized = 1;
    double reg2c_expected = 1, reg2c_realized = 1;
    double reg1_expected_raw = 0, reg1_realized_raw = 0;
    double reg2c_expected_raw = 0, reg2c_realized_raw = 0;
    std::vector<double> sleeping;      // floored, per expert
    std::vector<double> sleeping_raw;  // unfloored
    long long switches = 0;
    std::vector<long long> active_rounds;
};

// ceil(T^alpha) with a nearest-integer nudge so that e.g. 16^0.5 cannot land
// on 4.0000000000001 and get rounded up.
long long ceil_pow(long long t_horizon, double alpha);

// The excess budget delta * ceil(T^alpha) used by every threshold.
double excess_threshold(const AssumptionParams& params, long long t_horizon);

}  // namespace bicrit
