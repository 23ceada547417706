#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <vector>

namespace ntl {

// Portable seeded generator used for every random decision in the library.
//
// The scheme is fully specified so a port in another language reproduces the
// same streams from the same seeds:
//   - state advances by the 64-bit Weyl constant 0x9E3779B97F4A7C15
//   - output = mix(state) with mix(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9;
//     z ^= z>>27; z *= 0x94D049BB133111EB; z ^= z>>31 (SplitMix64)
//   - uniform01() = (next() >> 11) * 2^-53
//   - below(n) = high 64 bits of the 128-bit product next() * n
//   - normal() = Box-Muller on two uniform01 draws, first draw clamped > 0
//   - shuffle = Fisher-Yates from the back using below()
// Child seeds are derived, never reused: derive(master, key...) mixes the
// 64-bit FNV-1a hash of each key into the running state. Parallel workers
// therefore draw from disjoint streams and never share generator state.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ull;
        return mix(state_);
    }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // Uniform integer in [lo, hi] inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    double uniform_real(double lo, double hi) { return lo + uniform01() * (hi - lo); }

    double log_uniform_real(double lo, double hi) {
        return std::exp(uniform_real(std::log(lo), std::log(hi)));
    }

    // Standard normal, Box-Muller.
    double normal() {
        double u1 = uniform01();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

private:
    std::uint64_t state_;
};

// 64-bit FNV-1a over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key) {
    return Rng::mix(master ^ fnv1a64(key));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key, std::uint64_t index) {
    return Rng::mix(derive_seed(master, key) ^ Rng::mix(index + 0x9E3779B97F4A7C15ull));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view key, std::uint64_t a,
                                 std::uint64_t b) {
    return derive_seed(derive_seed(master, key, a), key, b);
}

}  // namespace ntl
