#include "specplan/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace specplan {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t fnv1a64(std::string_view bytes) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

Rng::Rng(uint64_t seed, std::string name)
    : engine_(splitmix64(seed)), name_(std::move(name)) {}

Rng Rng::stream(uint64_t base_seed, std::string_view stream_name, uint64_t index) {
    uint64_t seed = splitmix64(base_seed ^ fnv1a64(stream_name) ^ splitmix64(index));
    std::string name = std::string(stream_name) + "/" + std::to_string(index);
    return Rng(seed, std::move(name));
}

uint64_t Rng::next_u64() {
    ++draws_;
    return engine_();
}

double Rng::u01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    // Box-Muller; u clamped away from 0 so log stays finite.
    double u = u01();
    double v = u01();
    if (u < 1e-300) u = 1e-300;
    return std::sqrt(-2.0 * std::log(u)) * std::cos(2.0 * std::numbers::pi * v);
}

uint64_t Rng::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: n must be positive");
    return next_u64() % n;
}

}  // namespace specplan
