#pragma once

#include <cstdint>
#include <cmath>

namespace bicrit {

// xoshiro256** seeded through splitmix64. Hand-rolled so that traces and
// CSV output are bit-reproducible across platforms and libstdc++ versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * next_double();
    }

    // Uniform in [0, n) without modulo bias.
    int uniform_int(int n) {
        using u128 = unsigned __int128;
        return static_cast<int>((static_cast<u128>(next_u64()) * static_cast<u128>(n)) >> 64);
    }

    bool bernoulli(double p) { return next_double() < p; }

    double exponential(double mean) {
        return -mean * std::log1p(-next_double());
    }

    // Derives independent sub-seeds (per-row stream/learner seeds).
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a ^ (0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2));
        x = splitmix64(x);
        return splitmix64(x);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t splitmix64(std::uint64_t& x) {
        std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_[4];
};

}  // namespace bicrit
