#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace cylwalk {

// Replica-indexed random streams. Each replica gets its own generator derived
// from (master_seed, replica_index) through splitmix64, so replica sets are
// reproducible regardless of scheduling order or worker count.
inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class Rng {
  public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    static Rng for_replica(uint64_t master_seed, uint64_t replica_index) {
        uint64_t s = splitmix64(master_seed ^ splitmix64(replica_index + 1));
        return Rng(s);
    }

    uint64_t next() { return engine_(); }

    // uniform in [0, 1) with 53 random bits; avoids distribution objects so
    // the stream is identical across standard library implementations
    double u01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // uniform integer in [0, n)
    uint64_t below(uint64_t n) {
        // rejection sampling to stay exactly uniform
        uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % n;
    }

    // Exp(rate) by inverse CDF
    double exponential(double rate) { return -std::log1p(-u01()) / rate; }

    bool bernoulli(double p) { return u01() < p; }

  private:
    std::mt19937_64 engine_;
};

}  // namespace cylwalk
