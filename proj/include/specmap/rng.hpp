#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace specmap {

// Deterministic RNG built on the standardized mt19937_64 stream. All
// transformations (uniform doubles, bounded ints, gaussians, shuffles) are
// implemented here rather than with std::*_distribution, whose output is
// implementation-defined. Identical seeds give identical streams on every
// platform and build.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0, 1) with 53-bit resolution
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n); modulo bias is irrelevant at the scales used here
    std::size_t uniform_index(std::size_t n) { return static_cast<std::size_t>(next_u64() % n); }

    // Box-Muller, pair-cached
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = uniform_index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Seed-derivation scheme: every stage and every sweep cell draws its own seed
// as derive_seed(master, stage_tag, cell_counter). Work units can then run in
// any order, on any number of threads, without perturbing results.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag, std::uint64_t counter = 0) {
    return splitmix64(splitmix64(master ^ fnv1a64(tag)) + counter);
}

} // namespace specmap
