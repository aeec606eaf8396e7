#pragma once
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace nehari {

// rotate-and-mix finalizer; used to derive decorrelated per-start seeds
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// mt19937_64 is fully specified by the standard; the distributions are not,
// so sampling maps raw 64-bit draws ourselves to keep outputs byte-stable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    // independent stream for a given start index, stable under the count of
    // streams actually consumed
    static Rng stream(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix64(seed + 0x9e3779b97f4a7c15ull * (index + 1)));
    }

    std::uint64_t bits() { return eng_(); }
    double uniform01() { return (eng_() >> 11) * 0x1.0p-53; }  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    double log_uniform(double lo, double hi) {
        return lo * std::exp(uniform01() * std::log(hi / lo));
    }
    double normal() {
        double u1;
        do { u1 = uniform01(); } while (u1 == 0);
        return std::sqrt(-2 * std::log(u1)) *
               std::cos(2 * std::numbers::pi * uniform01());
    }

private:
    std::mt19937_64 eng_;
};

} // namespace nehari
