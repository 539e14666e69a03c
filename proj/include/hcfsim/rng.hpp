#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace hcfsim {

/// splitmix64 step; also used to hash-combine seeds into independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

/// Derive an independent stream seed from a master seed and stream tags.
/// Streams for different tag tuples are decorrelated even when tags collide
/// under plain XOR (e.g. channel/direction pairs).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag_a,
                                 std::uint64_t tag_b = 0, std::uint64_t tag_c = 0) {
    std::uint64_t s = master;
    splitmix64(s);
    s ^= tag_a;
    splitmix64(s);
    s ^= tag_b;
    splitmix64(s);
    s ^= tag_c;
    return splitmix64(s);
}

/// xoshiro256++ with platform-independent output; all randomness in the
/// project flows through this engine so results are bit-identical across
/// compilers and thread counts.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform index in [0, n). Multiply-shift; bias is < 2^-64 per draw.
    std::size_t next_index(std::size_t n) {
        return static_cast<std::size_t>((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    /// Standard normal pair via Box-Muller (consumes exactly two uniforms).
    void next_gaussian_pair(double& g0, double& g1) {
        double u1 = 1.0 - next_double(); // (0, 1], keeps log() finite
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * std::numbers::pi * u2;
        g0 = r * std::cos(a);
        g1 = r * std::sin(a);
    }

    double next_gaussian() {
        double g0, g1;
        next_gaussian_pair(g0, g1);
        return g0;
    }

    /// Circularly symmetric complex Gaussian with total variance `variance`.
    std::complex<double> next_complex_gaussian(double variance) {
        double g0, g1;
        next_gaussian_pair(g0, g1);
        double s = std::sqrt(variance / 2.0);
        return {s * g0, s * g1};
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4];
};

} // namespace hcfsim
