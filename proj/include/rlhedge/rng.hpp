#pragma once

#include <cstdint>
#include <limits>

namespace rlhedge {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Inverse of the standard normal CDF (Wichura's AS241, ~1e-16 relative).
/// p must lie in (0, 1).
double inverse_normal_cdf(double p) noexcept;

/// Counter-based random stream. A stream is fully determined by its key and
/// counter, so substreams keyed by (seed, index) can be generated in any order
/// or in parallel with identical results. Copyable value type.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(mix64(seed + kGolden)) {}

    /// Independent stream for item `index` of a batch seeded with `seed`.
    static CounterRng substream(std::uint64_t seed, std::uint64_t index) noexcept {
        CounterRng rng;
        rng.key_ = mix64(mix64(seed + kGolden) ^ mix64(index * 0xd1342543de82ef95ULL + 0x632be59bd9b4e019ULL));
        return rng;
    }

    /// Child stream derived from this stream's key; does not advance this stream.
    [[nodiscard]] CounterRng fork(std::uint64_t tag) const noexcept {
        CounterRng rng;
        rng.key_ = mix64(key_ ^ mix64(tag + 0x5851f42d4c957f2dULL));
        return rng;
    }

    std::uint64_t next_u64() noexcept { return mix64(key_ + kGolden * ++counter_); }
    result_type operator()() noexcept { return next_u64(); }
    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    /// Uniform draw on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        const auto idx = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return idx < n ? idx : n - 1;
    }

    double normal() noexcept { return inverse_normal_cdf(uniform()); }

    std::uint64_t key() const noexcept { return key_; }
    std::uint64_t counter() const noexcept { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace rlhedge
