#pragma once

#include <cmath>
#include <cstdint>

namespace sparseloc {

/// Deterministic, platform-independent random generator (xoshiro256++ seeded
/// through splitmix64). All simulation randomness goes through this class so
/// identical seeds give bit-identical outputs on every build.
class Rng {
public:
    explicit Rng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& s : state_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    uint64_t next() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    uint64_t uniform_int(uint64_t n) {
        if (n == 0) return 0;
        const uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t r = next();
        while (r >= limit) r = next();
        return r % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    /// Exact Poisson sample by counting unit-exponential arrivals; O(mean)
    /// time but free of the underflow the multiplicative method hits at
    /// large means.
    long poisson(double mean) {
        if (!(mean > 0.0)) return 0;
        double sum = 0.0;
        long count = -1;
        while (sum <= mean) {
            double u = uniform();
            while (u <= 0.0) u = uniform();
            sum += -std::log(u);
            ++count;
        }
        return count;
    }

private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    uint64_t state_[4];
};

}  // namespace sparseloc
