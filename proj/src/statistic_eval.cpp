#include "cpmon/statistic_eval.hpp"

#include <algorithm>

namespace cpmon {

StatisticEvaluator::StatisticEvaluator(StatisticKind kind) : kind_(kind) {}

void StatisticEvaluator::reserve(std::size_t horizon) {
    if (family_of(kind_) == Family::gaussian) {
        gaussian_table_.ensure(horizon);
    } else {
        exponential_table_.ensure(horizon);
    }
}

std::size_t StatisticEvaluator::horizon() const noexcept {
    return family_of(kind_) == Family::gaussian ? gaussian_table_.horizon()
                                                : exponential_table_.horizon();
}

SplitMaximum StatisticEvaluator::operator()(const CandidateSet& candidates) const {
    switch (kind_) {
    case StatisticKind::corrected_gaussian:
        return gaussian::max_statistic(candidates, gaussian::Statistic::corrected, gaussian_table_);
    case StatisticKind::hz_gaussian:
        return gaussian::max_statistic(candidates, gaussian::Statistic::hz, gaussian_table_);
    case StatisticKind::corrected_exponential:
        return exponential::max_statistic(candidates, exponential::Statistic::corrected,
                                          exponential_table_);
    case StatisticKind::raw_exponential:
        return exponential::max_statistic(candidates, exponential::Statistic::raw,
                                          exponential_table_);
    }
    return {};
}

SplitMaximum StatisticEvaluator::evaluate(const CandidateSet& candidates) {
    const std::size_t t = candidates.global().n;
    if (t > horizon()) {
        reserve(std::max<std::size_t>({t, 2 * horizon(), 256}));
    }
    return (*this)(candidates);
}

} // namespace cpmon
