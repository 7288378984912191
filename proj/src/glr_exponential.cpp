#include "cpmon/glr_exponential.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cpmon::exponential {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_split(std::size_t k, std::size_t t, const char* what) {
    if (k < kMinSegment || t < k + kMinSegment) {
        throw DomainError(std::string(what) + ": split k=" + std::to_string(k) +
                          " is outside 1..t-1 for t=" + std::to_string(t));
    }
}

// j (psi(j) - ln j)
double length_term(std::size_t j) {
    const double jd = static_cast<double>(j);
    return jd * digamma_minus_log(jd);
}

void require_exponential_set(const CandidateSet& candidates) {
    if (candidates.global().n < 2) {
        throw DomainError("exponential scores need at least 2 observations");
    }
    if (!(candidates.min_observation() > 0.0)) {
        throw InputError("exponential scores need strictly positive observations");
    }
    if (candidates.empty()) {
        throw DomainError("exponential scores: no admissible candidate");
    }
}

// 2 [ k ln(r0/r) + (n-k) ln(r1/r) ] in log-rate form; >= 0 up to rounding.
double from_log_rates(double k, double rest, double log_rate, double log_rate0, double log_rate1) {
    const double m = 2.0 * (k * (log_rate0 - log_rate) + rest * (log_rate1 - log_rate));
    return m > 0.0 ? m : 0.0;
}

} // namespace

double m_stat(double prefix_sum, std::size_t k, double total_sum, std::size_t t) {
    require_split(k, t, "m_stat");
    const double suffix_sum = total_sum - prefix_sum;
    if (!(prefix_sum > 0.0) || !(suffix_sum > 0.0)) {
        throw DomainError("m_stat: segment sums must be positive");
    }
    const double kd = static_cast<double>(k);
    const double rest = static_cast<double>(t - k);
    const double td = static_cast<double>(t);
    return from_log_rates(kd, rest, std::log(td / total_sum), std::log(kd / prefix_sum),
                          std::log(rest / suffix_sum));
}

double expected_m(std::size_t k, std::size_t t) {
    require_split(k, t, "expected_m");
    return -2.0 * (length_term(k) + length_term(t - k) - length_term(t));
}

SplitScores corrected_scores(const CandidateSet& candidates) {
    require_exponential_set(candidates);
    SplitScores out;
    out.t = candidates.global().n;
    out.records.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        SplitScore s;
        s.k = c.k;
        s.m = m_stat(c.prefix.s1, c.k, candidates.global().s1, out.t);
        s.mc = s.m / expected_m(c.k, out.t);
        out.records.push_back(s);
    }
    return out;
}

SplitMaximum max_score(const SplitScores& scores, Statistic which) {
    if (scores.records.empty()) {
        throw DomainError("max_score: no scores");
    }
    SplitMaximum best{-kInf, 0};
    for (const SplitScore& s : scores.records) {
        const double v = which == Statistic::raw ? s.m : s.mc;
        if (v > best.value) {
            best = {v, s.k};
        }
    }
    return best;
}

void ExpectationTable::ensure(std::size_t horizon) {
    if (terms_.size() > horizon) {
        return;
    }
    std::size_t j = terms_.size();
    terms_.resize(horizon + 1, 0.0);
    logs_.resize(horizon + 1, 0.0);
    for (; j <= horizon; ++j) {
        terms_[j] = j == 0 ? 0.0 : length_term(j);
        logs_[j] = j == 0 ? -kInf : std::log(static_cast<double>(j));
    }
}

SplitMaximum max_statistic(const CandidateSet& candidates, Statistic which,
                           const ExpectationTable& table) {
    require_exponential_set(candidates);
    const RunningSummary& global = candidates.global();
    const std::size_t t = global.n;
    if (table.horizon() < t) {
        throw DomainError("max_statistic: expectation table does not cover t=" + std::to_string(t));
    }
    const double log_rate = table.log_count(t) - std::log(global.s1);

    SplitMaximum best{-kInf, 0};
    for (const Candidate& c : candidates) {
        const std::size_t rest_n = t - c.k;
        const double suffix_sum = global.s1 - c.prefix.s1;
        double m;
        if (!(suffix_sum > 0.0)) {
            m = kInf;
        } else {
            m = from_log_rates(static_cast<double>(c.k), static_cast<double>(rest_n), log_rate,
                               table.log_count(c.k) - c.log_sum,
                               table.log_count(rest_n) - std::log(suffix_sum));
        }
        const double v = which == Statistic::raw ? m : m / table.expected(c.k, t);
        if (v > best.value) {
            best = {v, c.k};
        }
    }
    return best;
}

} // namespace cpmon::exponential
