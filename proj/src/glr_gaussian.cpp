#include "cpmon/glr_gaussian.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/special_functions.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cpmon::gaussian {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_split(std::size_t k, std::size_t t, const char* what) {
    if (k < kMinSegment || t < k + kMinSegment) {
        throw DomainError(std::string(what) + ": split k=" + std::to_string(k) +
                          " is outside 2..t-2 for t=" + std::to_string(t));
    }
}

// j (ln(2/j) + psi((j-1)/2)), written to avoid cancelling two ~ln j terms.
double length_term(std::size_t j) {
    const double jd = static_cast<double>(j);
    return jd * (digamma_minus_log(0.5 * (jd - 1.0)) + std::log1p(-1.0 / jd));
}

bool all_identical(const RunningSummary& global, double global_variance) {
    const double mean = global.s1 / static_cast<double>(global.n);
    return global_variance <= kDegenerateTolerance * (1.0 + mean * mean);
}

void require_gaussian_set(const CandidateSet& candidates) {
    if (candidates.min_segment() < kMinSegment) {
        throw DomainError("gaussian scores need a candidate set with min_segment >= 2");
    }
    if (candidates.global().n < 2 * kMinSegment) {
        throw DomainError("gaussian scores need at least 4 observations");
    }
    if (candidates.empty()) {
        throw DomainError("gaussian scores: no admissible candidate");
    }
}

} // namespace

double d_stat(const RunningSummary& prefix, const RunningSummary& global) {
    if (prefix.n < kMinSegment || global.n < prefix.n + kMinSegment) {
        throw DomainError("d_stat: each segment needs at least two observations");
    }
    const double s0n = variance_mle(global);
    if (all_identical(global, s0n)) {
        return 0.0;
    }
    const double s0k = variance_mle(prefix);
    const double skn = variance_mle(suffix(global, prefix));
    const double floor = kDegenerateTolerance * s0n;
    if (s0k <= floor || skn <= floor) {
        return kInf;
    }
    const double k = static_cast<double>(prefix.n);
    const double rest = static_cast<double>(global.n - prefix.n);
    const double d = k * std::log(s0n / s0k) + rest * std::log(s0n / skn);
    return d > 0.0 ? d : 0.0;
}

double bartlett_factor(std::size_t k, std::size_t t) {
    require_split(k, t, "bartlett_factor");
    const double a = 1.0 / static_cast<double>(k);
    const double b = 1.0 / static_cast<double>(t - k);
    const double c = 1.0 / static_cast<double>(t);
    return 1.0 + 11.0 / 12.0 * (a + b - c) + (a * a + b * b - c * c);
}

double expected_d(std::size_t k, std::size_t t) {
    require_split(k, t, "expected_d");
    return length_term(t) - (length_term(k) + length_term(t - k));
}

SplitScores corrected_scores(const CandidateSet& candidates) {
    require_gaussian_set(candidates);
    SplitScores out;
    out.t = candidates.global().n;
    out.records.reserve(candidates.size());
    for (const Candidate& c : candidates) {
        SplitScore s;
        s.k = c.k;
        s.d = d_stat(c.prefix, candidates.global());
        s.h = s.d / bartlett_factor(c.k, out.t);
        s.dc = 2.0 * s.d / expected_d(c.k, out.t);
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
        const double v = which == Statistic::raw ? s.d : which == Statistic::hz ? s.h : s.dc;
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
    for (; j <= horizon; ++j) {
        // lengths 0 and 1 never enter an admissible split
        terms_[j] = j < kMinSegment ? 0.0 : length_term(j);
    }
}

SplitMaximum max_statistic(const CandidateSet& candidates, Statistic which,
                           const ExpectationTable& table) {
    require_gaussian_set(candidates);
    const RunningSummary& global = candidates.global();
    const std::size_t t = global.n;
    if (table.horizon() < t) {
        throw DomainError("max_statistic: expectation table does not cover t=" + std::to_string(t));
    }
    const double s0n = variance_mle(global);
    if (all_identical(global, s0n)) {
        return {0.0, candidates[0].k};
    }
    const double log_s0n = std::log(s0n);
    const double log_floor = std::log(kDegenerateTolerance) + log_s0n;
    const double floor = kDegenerateTolerance * s0n;
    const double td = static_cast<double>(t);
    const double inv_t = 1.0 / td;

    SplitMaximum best{-kInf, 0};
    for (const Candidate& c : candidates) {
        const std::size_t rest_n = t - c.k;
        const double rest = static_cast<double>(rest_n);
        const double mean = (global.s1 - c.prefix.s1) / rest;
        const double skn = (global.s2 - c.prefix.s2) / rest - mean * mean;
        double d;
        if (c.log_variance <= log_floor || skn <= floor) {
            d = kInf;
        } else {
            const double k = static_cast<double>(c.k);
            d = k * (log_s0n - c.log_variance) + rest * (log_s0n - std::log(skn));
            if (d < 0.0) {
                d = 0.0;
            }
        }
        double v = d;
        if (which == Statistic::hz) {
            const double a = 1.0 / static_cast<double>(c.k);
            const double b = 1.0 / rest;
            v = d / (1.0 + 11.0 / 12.0 * (a + b - inv_t) + (a * a + b * b - inv_t * inv_t));
        } else if (which == Statistic::corrected) {
            v = 2.0 * d / table.expected(c.k, t);
        }
        if (v > best.value) {
            best = {v, c.k};
        }
    }
    return best;
}

} // namespace cpmon::gaussian
