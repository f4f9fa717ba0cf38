#include "bicrit/types.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace bicrit {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

void check_unit_vector(const std::vector<double>& v, int k, const char* label) {
    require(static_cast<int>(v.size()) == k,
            std::string(label) + " has wrong length");
    for (double x : v) {
        require(x >= 0.0 && x <= 1.0, std::string(label) + " entry outside [0,1]");
    }
}

// Fixed-width float formatting keeps output byte-identical across runs.
std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void LossVectorPair::validate(int k) const {
    check_unit_vector(primary, k, "primary loss");
    check_unit_vector(secondary, k, "secondary loss");
}

void AssumptionParams::validate() const {
    require(c >= 0.0 && c <= 1.0, "c outside [0,1]");
    require(delta >= 0.0 && delta <= 1.0, "delta outside [0,1]");
    require(alpha >= 0.0 && alpha <= 1.0, "alpha outside [0,1]");
}

LossStream LossStream::make_oblivious(int k, std::vector<LossVectorPair> rounds,
                                      StreamInfo info) {
    require(k >= 1 && k <= kMaxExperts, "K outside [1,64]");
    require(!rounds.empty(), "empty stream");
    for (const auto& r : rounds) r.validate(k);
    LossStream s;
    s.k_ = k;
    s.horizon_ = static_cast<long long>(rounds.size());
    s.rounds_ = std::move(rounds);
    s.info_ = std::move(info);
    return s;
}

LossStream LossStream::make_adaptive(int k, long long t_horizon, AdaptiveFn gen,
                                     StreamInfo info) {
    require(k >= 1 && k <= kMaxExperts, "K outside [1,64]");
    require(t_horizon >= 1, "horizon must be positive");
    require(static_cast<bool>(gen), "adaptive stream needs a generator");
    LossStream s;
    s.k_ = k;
    s.horizon_ = t_horizon;
    s.gen_ = std::move(gen);
    s.info_ = std::move(info);
    return s;
}

const LossVectorPair& LossStream::round(long long t) const {
    if (adaptive()) throw std::logic_error("round() on adaptive stream");
    require(t >= 1 && t <= horizon_, "round index out of range");
    return rounds_[t - 1];
}

LossVectorPair LossStream::reveal(long long t, std::span<const ExpertId> history) const {
    require(t >= 1 && t <= horizon_, "round index out of range");
    if (!adaptive()) return rounds_[t - 1];
    require(static_cast<long long>(history.size()) >= t - 1,
            "adaptive reveal needs full history");
    LossVectorPair pair = gen_(t, history.first(static_cast<std::size_t>(t - 1)));
    pair.validate(k_);
    return pair;
}

void LossStream::write(std::ostream& os) const {
    if (adaptive()) throw std::logic_error("cannot export adaptive stream without a trajectory");
    os << "#bicrit-stream v1 " << k_ << '\t' << horizon_ << '\t' << fmt(info_.c) << '\t'
       << fmt(info_.delta) << '\t' << fmt(info_.alpha) << '\n';
    for (const auto& r : rounds_) {
        for (int h = 0; h < k_; ++h) os << (h ? "\t" : "") << fmt(r.primary[h]);
        for (int h = 0; h < k_; ++h) os << '\t' << fmt(r.secondary[h]);
        os << '\n';
    }
}

LossStream LossStream::read(std::istream& is) {
    std::string header;
    std::getline(is, header);
    std::istringstream hs(header);
    std::string magic, version;
    int k = 0;
    long long t_horizon = 0;
    StreamInfo info;
    hs >> magic >> version >> k >> t_horizon >> info.c >> info.delta >> info.alpha;
    require(magic == "#bicrit-stream" && version == "v1", "bad stream header");
    require(k >= 1 && t_horizon >= 1, "bad stream dimensions");
    std::vector<LossVectorPair> rounds;
    rounds.reserve(static_cast<std::size_t>(t_horizon));
    for (long long t = 0; t < t_horizon; ++t) {
        LossVectorPair pair;
        pair.primary.resize(k);
        pair.secondary.resize(k);
        for (int h = 0; h < k; ++h) is >> pair.primary[h];
        for (int h = 0; h < k; ++h) is >> pair.secondary[h];
        require(static_cast<bool>(is), "truncated stream file");
        rounds.push_back(std::move(pair));
    }
    return make_oblivious(k, std::move(rounds), info);
}

void SimplexDistribution::validate(std::uint64_t support) const {
    double sum = 0.0;
    for (std::size_t h = 0; h < w.size(); ++h) {
        require(w[h] >= 0.0, "negative probability");
        if (!in_mask(support, static_cast<ExpertId>(h))) {
            require(w[h] <= kSimplexTol, "mass outside active set");
        }
        sum += w[h];
    }
    require(std::fabs(sum - 1.0) <= kSimplexTol, "probabilities do not sum to 1");
}

RunTrace::RunTrace(int k, long long t_horizon) : k_(k), horizon_(t_horizon) {
    if (k < 1 || k > kMaxExperts) throw std::invalid_argument("K outside [1,64]");
    if (t_horizon < 1) throw std::invalid_argument("horizon must be positive");
    const std::size_t n = static_cast<std::size_t>(t_horizon) * k;
    dist_.reserve(n);
    loss1_.reserve(n);
    loss2_.reserve(n);
    selection_.reserve(t_horizon);
    learner_choice_.reserve(t_horizon);
    active_.reserve(t_horizon);
    cum1_.assign(k, 0.0);
    cum2_.assign(k, 0.0);
    active_rounds_.assign(k, 0);
}

void RunTrace::append(std::span<const double> dist, ExpertId selection,
                      std::uint64_t active_mask, std::span<const double> loss1,
                      std::span<const double> loss2, ExpertId learner_choice) {
    if (recorded_ >= horizon_) throw std::logic_error("trace already complete");
    if (static_cast<int>(dist.size()) != k_ || static_cast<int>(loss1.size()) != k_ ||
        static_cast<int>(loss2.size()) != k_) {
        throw std::invalid_argument("row width mismatch");
    }
    if (selection < 0 || selection >= k_ || !in_mask(active_mask, selection)) {
        throw std::invalid_argument("selection outside active set");
    }
    SimplexDistribution{std::vector<double>(dist.begin(), dist.end())}.validate(active_mask);

    double exp1 = 0.0, exp2 = 0.0;
    for (int h = 0; h < k_; ++h) {
        if (loss1[h] < 0.0 || loss1[h] > 1.0 || loss2[h] < 0.0 || loss2[h] > 1.0) {
            throw std::invalid_argument("loss outside [0,1]");
        }
        cum1_[h] += loss1[h];
        cum2_[h] += loss2[h];
        exp1 += dist[h] * loss1[h];
        exp2 += dist[h] * loss2[h];
        if (in_mask(active_mask, h)) ++active_rounds_[h];
    }
    alg1_expected_ += exp1;
    alg2_expected_ += exp2;
    alg1_realized_ += loss1[selection];
    alg2_realized_ += loss2[selection];

    dist_.insert(dist_.end(), dist.begin(), dist.end());
    loss1_.insert(loss1_.end(), loss1.begin(), loss1.end());
    loss2_.insert(loss2_.end(), loss2.begin(), loss2.end());
    selection_.push_back(selection);
    learner_choice_.push_back(learner_choice < 0 ? selection : learner_choice);
    active_.push_back(active_mask);
    ++recorded_;
}

bool RunTrace::operator==(const RunTrace& other) const {
    return k_ == other.k_ && horizon_ == other.horizon_ && recorded_ == other.recorded_ &&
           dist_ == other.dist_ && loss1_ == other.loss1_ && loss2_ == other.loss2_ &&
           selection_ == other.selection_ && learner_choice_ == other.learner_choice_ &&
           active_ == other.active_;
}

void RunTrace::write(std::ostream& os) const {
    os << "#bicrit-trace v1 K=" << k_ << " T=" << horizon_ << '\n';
    for (long long t = 1; t <= recorded_; ++t) {
        const ExpertId a = selection_[t - 1];
        char mask[20];
        std::snprintf(mask, sizeof mask, "%llx",
                      static_cast<unsigned long long>(active_[t - 1]));
        os << t << '\t' << a << '\t' << mask << '\t' << fmt(loss1(t)[a]) << '\t'
           << fmt(loss2(t)[a]) << '\n';
    }
}

RunTrace::File RunTrace::read(std::istream& is) {
    std::string header;
    std::getline(is, header);
    File file{};
    if (std::sscanf(header.c_str(), "#bicrit-trace v1 K=%d T=%lld", &file.k,
                    &file.t_horizon) != 2) {
        throw std::invalid_argument("bad trace header");
    }
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        FileRow row{};
        unsigned long long mask = 0;
        if (std::sscanf(line.c_str(), "%lld\t%d\t%llx\t%lg\t%lg", &row.t, &row.selection,
                        &mask, &row.loss1, &row.loss2) != 5) {
            throw std::invalid_argument("bad trace row");
        }
        row.active_mask = mask;
        file.rows.push_back(row);
    }
    return file;
}

long long ceil_pow(long long t_horizon, double alpha) {
    if (t_horizon < 1) throw std::invalid_argument("horizon must be positive");
    const double p = std::pow(static_cast<double>(t_horizon), alpha);
    const double r = std::round(p);
    if (std::fabs(p - r) < 1e-9) return static_cast<long long>(r);
    return static_cast<long long>(std::ceil(p));
}

double excess_threshold(const AssumptionParams& params, long long t_horizon) {
    return params.delta * static_cast<double>(ceil_pow(t_horizon, params.alpha));
}

}  // namespace bicrit
