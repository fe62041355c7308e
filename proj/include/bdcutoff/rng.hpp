#pragma once

#include <cstdint>
#include <limits>

namespace bdcutoff {

// SplitMix64 finalizer: a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// Substream key for replicate `stream` under master `seed`:
//   key = mix64(seed ^ mix64(stream + golden))
// Keys depend only on (seed, stream), never on scheduling order.
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t stream) noexcept {
    return mix64(seed ^ mix64(stream + kGolden));
}

// Two-level key, used by ensembles keyed on (state count, replicate).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t major,
                                      std::uint64_t minor) noexcept {
    return derive_stream(derive_stream(seed, major), minor);
}

// Counter-based generator: the i-th output is mix64(key + i * golden).
// Satisfies UniformRandomBitGenerator. State is (key, counter), so a
// stream can be positioned anywhere in O(1).
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit constexpr CounterRng(std::uint64_t key = 0, std::uint64_t counter = 0) noexcept
        : key_(key), counter_(counter) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept {
        return std::numeric_limits<result_type>::max();
    }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * kGolden);
    }

    // Uniform on [0, 1) with 53 random bits.
    constexpr double uniform() noexcept {
        return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
    }

    // Uniform integer on [0, bound). Lemire's multiply-shift with rejection.
    std::uint64_t below(std::uint64_t bound) noexcept {
        while (true) {
            const std::uint64_t x = (*this)();
            const __uint128_t m = static_cast<__uint128_t>(x) * bound;
            const auto low = static_cast<std::uint64_t>(m);
            if (low >= bound || low >= (-bound) % bound) {
                return static_cast<std::uint64_t>(m >> 64);
            }
        }
    }

    constexpr std::uint64_t key() const noexcept { return key_; }
    constexpr std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace bdcutoff
