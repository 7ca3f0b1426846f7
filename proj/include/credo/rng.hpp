#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace credo {

// splitmix64 step; used for seed mixing and stream derivation.
inline uint64_t splitmix64(uint64_t& state) {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Combine a seed with stream indices into a new 64-bit seed. Used to derive
// independent per-record / per-episode streams so parallel and serial
// generation agree bitwise.
inline uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
    uint64_t s = seed;
    splitmix64(s);
    s ^= a + 0x9e3779b97f4a7c15ULL;
    splitmix64(s);
    s ^= b + 0xd1b54a32d192ed03ULL;
    splitmix64(s);
    s ^= c + 0x8bb84b93962eacc9ULL;
    return splitmix64(s);
}

// Seeded RNG with hand-rolled distributions. The mt19937_64 engine is fully
// specified by the standard; the distributions in <random> are not, so we
// implement the few we need to keep every artifact bit-reproducible.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t s = seed;
        engine_.seed(splitmix64(s));
    }

    uint64_t next_u64() { return engine_(); }

    // Uniform double in [0, 1).
    double next_unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). Rejection sampling to avoid modulo bias.
    uint32_t next_below(uint32_t n) {
        if (n <= 1) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return static_cast<uint32_t>(x % n);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

    // Standard normal via Box-Muller (two fixed draws per value).
    double normal() {
        double u1 = next_unit();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Poisson via Knuth's product method; fine for the small means used here.
    int poisson(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= next_unit();
        } while (p > limit);
        return k - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            const size_t j = next_below(static_cast<uint32_t>(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace credo
