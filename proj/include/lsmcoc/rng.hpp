#pragma once
// Deterministic random-number substreams. Every randomized routine takes an
// explicit stream; parallel code derives one substream per (role, time, index)
// from the master seed, so results never depend on thread count or scheduling.

#include <cstdint>
#include <random>

namespace lsmcoc {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Roles keep draws for different purposes disjoint within one run.
enum class StreamRole : std::uint64_t {
    outer = 1,         // marginal outer-state sampling
    inner = 2,         // conditional inner sampling at an outer point
    time_zero = 3,     // the final inner run at the fixed initial state
    oracle_outer = 4,
    oracle_inner = 5,
};

class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

    RngStream(std::uint64_t seed, StreamRole role, std::int64_t t, std::uint64_t index)
        : gen_(derive(seed, static_cast<std::uint64_t>(role),
                      static_cast<std::uint64_t>(t), index)) {}

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                                std::uint64_t c) {
        std::uint64_t h = splitmix64(seed);
        h = splitmix64(h ^ (a * 0xd6e8feb86659fd93ull));
        h = splitmix64(h ^ (b * 0xa5cb3e2f7bb02e1bull));
        h = splitmix64(h ^ (c * 0xc2b2ae3d27d4eb4full));
        return h;
    }

    double normal() { return normal_(gen_); }
    double uniform() { return uniform_(gen_); }

    // Binomial count; inputs and output are exact small integers held in double.
    double binomial(double n, double p) {
        auto trials = static_cast<long long>(n);
        if (trials <= 0) return 0.0;
        if (p <= 0.0) return 0.0;
        if (p >= 1.0) return static_cast<double>(trials);
        std::binomial_distribution<long long> dist(trials, p);
        return static_cast<double>(dist(gen_));
    }

    std::mt19937_64& raw() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace lsmcoc
