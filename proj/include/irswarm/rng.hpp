#pragma once

#include <cstdint>
#include <initializer_list>

namespace irswarm {

/// SplitMix64 stream. Output depends only on the seed and the number of draws,
/// so traces are reproducible across compilers and standard libraries (the
/// std:: distributions are not).
class RandomStream {
public:
    constexpr explicit RandomStream(std::uint64_t seed = 0) noexcept : state_(seed) {}

    constexpr std::uint64_t next_u64() noexcept {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform in [0, 1) with 53 random bits.
    constexpr double uniform01() noexcept {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    constexpr double uniform(double lo, double hi) noexcept {
        return lo + (hi - lo) * uniform01();
    }

    /// Independent substream keyed by `keys`, e.g. (tick, agent id). Does not
    /// advance this stream.
    constexpr RandomStream derive(std::initializer_list<std::uint64_t> keys) const noexcept {
        std::uint64_t h = mix(state_ ^ 0x6A09E667F3BCC909ULL);
        for (auto k : keys) {
            h = mix(h ^ mix(k + 0x9E3779B97F4A7C15ULL));
        }
        return RandomStream{h};
    }

    constexpr std::uint64_t state() const noexcept { return state_; }

private:
    static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

}  // namespace irswarm
