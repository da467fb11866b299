#pragma once

#include <concepts>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace lrtc {

/// Anything that can drive the seeded samplers in this library.
template <typename R>
concept UniformSource = requires(R &r, std::uint64_t n) {
    { r.uniform01() } -> std::convertible_to<double>;
    { r.uniform_int(n) } -> std::convertible_to<std::uint64_t>;
};

/// Seeded generator. The engine sequence is fixed by the standard and the
/// samplers below are written out by hand, so streams are identical across
/// standard libraries (std::*_distribution is not).
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return x % n;
    }

   private:
    std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = 0xCBF29CE484222325ULL) {
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Derives an independent seed for a named sub-task.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
    return splitmix64(fnv1a64(label) ^ splitmix64(seed));
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) + 0x632BE59BD9B4E019ULL * (index + 1));
}

/// In-place Fisher-Yates shuffle.
template <typename T, UniformSource R>
void shuffle(std::vector<T> &v, R &rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.uniform_int(i));
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace lrtc
