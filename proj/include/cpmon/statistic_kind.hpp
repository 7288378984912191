#pragma once

#include <cstddef>
#include <string>
#include <string_view>

namespace cpmon {

enum class Family { gaussian, exponential };

/// The four monitored max-statistics.
enum class StatisticKind {
    corrected_gaussian,    ///< D^c_t = max_k 2 D_{k,t} / E[D_{k,t}]
    hz_gaussian,           ///< H_t = max_k D_{k,t} / C_{k,t}
    corrected_exponential, ///< M^c_t = max_k M_{k,t} / E[M_{k,t}]
    raw_exponential,       ///< M_t = max_k M_{k,t}
};

[[nodiscard]] std::string_view to_string(StatisticKind kind) noexcept;
[[nodiscard]] std::string_view to_string(Family family) noexcept;

/// Accepts the names produced by to_string(); throws std::invalid_argument.
[[nodiscard]] StatisticKind parse_statistic_kind(std::string_view name);
[[nodiscard]] Family parse_family(std::string_view name);

[[nodiscard]] Family family_of(StatisticKind kind) noexcept;

/// Smallest segment on either side of an admissible split.
[[nodiscard]] std::size_t min_segment(Family family) noexcept;

} // namespace cpmon
