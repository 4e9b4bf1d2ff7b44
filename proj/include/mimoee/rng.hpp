#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace mimoee {

/// Mixes a seed with a stream index so independent streams can be drawn in
/// parallel with results that do not depend on scheduling (SplitMix64 finalizer).
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Seeded 64-bit generator. The raw mt19937_64 integer sequence is fixed by
/// the standard, and all real-valued mappings below are hand-rolled, so the
/// same seed yields the same draws on every platform.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on (0, 1]; never returns 0, safe for log().
    double uniform_pos() {
        return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Standard exponential, mean 1.
    double exponential() { return -std::log(uniform_pos()); }

    /// Circularly-symmetric complex Gaussian CN(0,1): E|z|^2 = 1.
    /// Polar form: radius^2 ~ Exp(1), phase uniform.
    std::complex<double> complex_gaussian() {
        const double r = std::sqrt(exponential());
        const double phi = 2.0 * M_PI * uniform();
        return {r * std::cos(phi), r * std::sin(phi)};
    }

    /// Real standard normal (Box-Muller, one half used).
    double gaussian() {
        const double r = std::sqrt(2.0 * exponential());
        return r * std::cos(2.0 * M_PI * uniform());
    }

    std::uint64_t raw() { return engine_(); }

  private:
    std::mt19937_64 engine_;
};

} // namespace mimoee
