#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace phom {

/// Counter-based generator: draw (index, lane) is a pure function of the seed,
/// so any partition of the index range across workers yields the same stream.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t bits(std::uint64_t index, std::uint64_t lane) const
    {
        std::uint64_t z = mix(seed_ ^ 0x9e3779b97f4a7c15ULL);
        z = mix(z ^ (index + 0x632be59bd9b4e019ULL));
        return mix(z ^ (lane * 0xbf58476d1ce4e5b9ULL + 0x94d049bb133111ebULL));
    }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform(std::uint64_t index, std::uint64_t lane) const
    {
        return static_cast<double>(bits(index, lane) >> 11) * 0x1.0p-53;
    }

    double uniform(std::uint64_t index, std::uint64_t lane, double lo, double hi) const
    {
        return lo + (hi - lo) * uniform(index, lane);
    }

    /// Standard Cauchy variate clipped to [-clip, clip].
    double clipped_cauchy(std::uint64_t index, std::uint64_t lane, double clip) const
    {
        const double u = uniform(index, lane);
        const double c = std::tan(std::numbers::pi * (u - 0.5));
        return c > clip ? clip : (c < -clip ? -clip : c);
    }

    std::uint64_t seed() const { return seed_; }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
};

}  // namespace phom
