#pragma once

// Deterministic random number generation.
//
// Everything stochastic in this library is driven by an explicit 64-bit seed,
// and test suites freeze expected values, so the generator must produce
// bit-identical streams on every platform.  std::mt19937_64 would qualify but
// std::normal_distribution's algorithm is implementation-defined, so the
// normal transform is written out here (Box-Muller) on top of a xoshiro256++
// engine seeded through splitmix64.

#include <cmath>
#include <cstdint>

namespace fracmort::rng {

inline constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class engine {
public:
    explicit engine(std::uint64_t seed) noexcept {
        std::uint64_t sm = seed;
        for (auto& word : state_) word = splitmix64_next(sm);
    }

    std::uint64_t next_u64() noexcept {
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

    // Uniform on (0, 1]: never zero, so it is safe under log().
    double next_uniform() noexcept {
        return 1.0 - static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Standard normal via the Box-Muller transform; generates pairs and
    // caches the second value so consecutive calls stay cheap.
    double next_normal() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_uniform();
        const double u2 = next_uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 6.283185307179586476925286766559 * u2;
        spare_ = radius * std::sin(angle);
        have_spare_ = true;
        return radius * std::cos(angle);
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
        return (x << k) | (x >> (64 - k));
    }

    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace fracmort::rng
