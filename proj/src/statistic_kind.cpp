#include "cpmon/statistic_kind.hpp"

#include <stdexcept>

namespace cpmon {

std::string_view to_string(StatisticKind kind) noexcept {
    switch (kind) {
    case StatisticKind::corrected_gaussian: return "corrected-gaussian";
    case StatisticKind::hz_gaussian: return "hz-gaussian";
    case StatisticKind::corrected_exponential: return "corrected-exponential";
    case StatisticKind::raw_exponential: return "raw-exponential";
    }
    return "unknown";
}

std::string_view to_string(Family family) noexcept {
    return family == Family::gaussian ? "gaussian" : "exponential";
}

StatisticKind parse_statistic_kind(std::string_view name) {
    for (auto kind : {StatisticKind::corrected_gaussian, StatisticKind::hz_gaussian,
                      StatisticKind::corrected_exponential, StatisticKind::raw_exponential}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown statistic kind '" + std::string(name) + "'");
}

Family parse_family(std::string_view name) {
    if (name == "gaussian") return Family::gaussian;
    if (name == "exponential") return Family::exponential;
    throw std::invalid_argument("unknown family '" + std::string(name) + "'");
}

Family family_of(StatisticKind kind) noexcept {
    return kind == StatisticKind::corrected_gaussian || kind == StatisticKind::hz_gaussian
               ? Family::gaussian
               : Family::exponential;
}

std::size_t min_segment(Family family) noexcept {
    return family == Family::gaussian ? 2 : 1;
}

} // namespace cpmon
