#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace specplan {

uint64_t splitmix64(uint64_t x);
uint64_t fnv1a64(std::string_view bytes);

// Deterministic random source with named streams. Every piece of randomness
// in a run is drawn from a stream identified by (base_seed, name, index), so
// changing e.g. the bandit seed cannot perturb latency draws.
//
// Uniform and normal variates are produced from raw 64-bit output with fixed
// arithmetic rather than std::*_distribution, which keeps sequences identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(uint64_t seed, std::string name = "rng");

    static Rng stream(uint64_t base_seed, std::string_view stream_name, uint64_t index = 0);

    uint64_t next_u64();
    // Uniform in [0, 1) with 53-bit resolution.
    double u01();
    // Standard normal (Box-Muller, one variate per call).
    double normal();
    // Uniform integer in [0, n), n > 0.
    uint64_t below(uint64_t n);

    uint64_t draw_count() const { return draws_; }
    const std::string& name() const { return name_; }

private:
    std::mt19937_64 engine_;
    uint64_t draws_ = 0;
    std::string name_;
};

}  // namespace specplan
