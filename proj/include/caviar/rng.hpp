#pragma once

#include <cstdint>

#include "caviar/numkit.hpp"

namespace caviar {

/// SplitMix64 finalizer. Used both as the stream generator and as the seed hash.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Seed of substream `index` under `master` (master xor hash(index)).
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    return master ^ mix64(index + 0x632BE59BD9B4E019ULL);
}

/**
 * Counter-based generator: draw k is mix64(key + k * golden). Cheap to fork,
 * and the k-th value of a stream does not depend on how earlier draws were consumed.
 */
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0, 1).
    double uniform() noexcept { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

    double normal() { return numkit::std_normal_quantile(uniform()); }

    [[nodiscard]] Rng fork(std::uint64_t index) const noexcept { return Rng(derive_seed(key_, index)); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace caviar
