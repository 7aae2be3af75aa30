#pragma once

#include <cmath>
#include <cstdint>

namespace gibbs {

// Counter-based pseudorandom primitives. Every random quantity in the library
// is a pure function of a key built from (seed, structural coordinates), so
// samples are reproducible and window-nesting-stable without storing state.

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Keyed mixing: fold a word into a running hash. Chaining splitmix rounds
// gives avalanche across all folded words.
inline std::uint64_t mix_in(std::uint64_t h, std::uint64_t w) {
    return splitmix64(h ^ (w + kGolden));
}

inline std::uint64_t prf64(std::uint64_t seed, std::uint64_t a) {
    return mix_in(splitmix64(seed), a);
}
inline std::uint64_t prf64(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_in(prf64(seed, a), b);
}
inline std::uint64_t prf64(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_in(prf64(seed, a, b), c);
}
inline std::uint64_t prf64(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c,
                           std::uint64_t d) {
    return mix_in(prf64(seed, a, b, c), d);
}

// Uniform in [0,1) from the top 53 bits.
inline double to_unit(std::uint64_t u) {
    return static_cast<double>(u >> 11) * 0x1.0p-53;
}

// A deterministic stream of uniforms: key fixed, counter advancing. Used for
// per-cell point generation and for Monte Carlo estimator draws.
class CounterStream {
public:
    explicit CounterStream(std::uint64_t key) : key_(key) {}

    std::uint64_t next_u64() { return prf64(key_, counter_++); }
    double next_unit() { return to_unit(next_u64()); }

    // Poisson count via the exponential-race form: N = max{k : sum of k
    // Exp(1) variables <= lambda}. Stable for any lambda.
    std::uint64_t next_poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        double acc = 0.0;
        std::uint64_t n = 0;
        for (;;) {
            double u = next_unit();
            acc += -std::log(1.0 - u);
            if (acc > lambda) return n;
            ++n;
        }
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// Per-replication seed derivation.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t rep) {
    return base ^ splitmix64(rep);
}

} // namespace gibbs
