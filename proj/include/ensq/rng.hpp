#pragma once

#include <cstdint>

namespace ensq {

// Counter-seeded splitmix64 stream. Each Monte Carlo trial owns a stream
// derived from (master seed, trial index), so trial i draws the same numbers
// no matter which thread runs it or in which order trials complete.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : state_(scramble(seed)) {}

    RngStream(std::uint64_t master_seed, std::uint64_t stream_index)
        : state_(scramble(scramble(master_seed) ^ scramble(stream_index * 0x9E3779B97F4A7C15ULL + 1))) {}

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    int binomial(int n, double p) {
        int k = 0;
        for (int i = 0; i < n; ++i) {
            if (uniform() < p) ++k;
        }
        return k;
    }

private:
    static std::uint64_t scramble(std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t state_;
};

}  // namespace ensq
