#pragma once

#include <cstdint>
#include <limits>

namespace cpmon {

/// xoshiro256** (Blackman & Vigna), a small-state generator usable with
/// the <random> distributions. Seeded through splitmix64.
class Xoshiro256 {
public:
    using result_type = std::uint64_t;

    explicit Xoshiro256(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

private:
    std::uint64_t s_[4];
};

/// Independent generator for replication `index` of a campaign seeded with
/// `seed`. Results depend only on (seed, index), never on scheduling.
[[nodiscard]] Xoshiro256 substream(std::uint64_t seed, std::uint64_t index) noexcept;

/// Derives a child seed, e.g. one per scenario cell of a campaign.
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t label) noexcept;

} // namespace cpmon
