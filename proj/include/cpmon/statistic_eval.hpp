#pragma once

#include "cpmon/glr_exponential.hpp"
#include "cpmon/glr_gaussian.hpp"
#include "cpmon/split_maximum.hpp"
#include "cpmon/statistic_kind.hpp"
#include "cpmon/stream_stats.hpp"

#include <cstddef>

namespace cpmon {

/// Evaluates one of the four max-statistics over a candidate set, owning
/// the expectation caches it needs.
class StatisticEvaluator {
public:
    explicit StatisticEvaluator(StatisticKind kind);

    [[nodiscard]] StatisticKind kind() const noexcept { return kind_; }

    /// Grows the caches to cover t <= horizon.
    void reserve(std::size_t horizon);
    [[nodiscard]] std::size_t horizon() const noexcept;

    /// Requires candidates.global().n <= horizon(). Safe to call
    /// concurrently once reserved.
    [[nodiscard]] SplitMaximum operator()(const CandidateSet& candidates) const;

    /// Grows the caches geometrically as needed, then evaluates.
    SplitMaximum evaluate(const CandidateSet& candidates);

private:
    StatisticKind kind_;
    gaussian::ExpectationTable gaussian_table_;
    exponential::ExpectationTable exponential_table_;
};

} // namespace cpmon
