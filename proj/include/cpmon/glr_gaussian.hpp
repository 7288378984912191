#pragma once

#include "cpmon/split_maximum.hpp"
#include "cpmon/stream_stats.hpp"

#include <cstddef>
#include <vector>

/// Two-sample Gaussian likelihood ratio statistics for a joint change in
/// mean and variance, with both segments' parameters unknown.
namespace cpmon::gaussian {

/// Each segment needs two points to estimate a variance: 2 <= k <= t-2.
inline constexpr std::size_t kMinSegment = 2;

/// Relative tolerance below which a variance is treated as zero.
inline constexpr double kDegenerateTolerance = 1e-12;

enum class Statistic {
    raw,       ///< D_{k,t}
    hz,        ///< D_{k,t} / C_{k,t} (Bartlett-type factor)
    corrected, ///< 2 D_{k,t} / E[D_{k,t}]
};

/// D_{k,n} = k ln(S_0n / S_0k) + (n-k) ln(S_0n / S_kn), with S the MLE
/// variances of the whole sample, the prefix 1..k and the suffix k+1..n.
///
/// Constant data gives 0. A constant segment inside otherwise varying data
/// gives +infinity.
double d_stat(const RunningSummary& prefix, const RunningSummary& global);

/// C_{k,t} = 1 + 11/12 (1/k + 1/(t-k) - 1/t) + (1/k^2 + 1/(t-k)^2 - 1/t^2).
double bartlett_factor(std::size_t k, std::size_t t);

/// Exact null expectation of D_{k,t}:
///   t(ln(2/t) + psi((t-1)/2)) - k(ln(2/k) + psi((k-1)/2))
///     - (t-k)(ln(2/(t-k)) + psi((t-k-1)/2)).
double expected_d(std::size_t k, std::size_t t);

/// Per-split values of the three statistics.
struct SplitScore {
    std::size_t k = 0;
    double d = 0.0;
    double h = 0.0;
    double dc = 0.0;
};

struct SplitScores {
    std::size_t t = 0;
    std::vector<SplitScore> records;
};

/// Scores every retained candidate. Throws DomainError when t < 4, when the
/// set has no candidates, or when its segments are shorter than kMinSegment.
SplitScores corrected_scores(const CandidateSet& candidates);

/// Maximum of the chosen statistic; ties resolve to the smallest k.
SplitMaximum max_score(const SplitScores& scores, Statistic which);

/// Cache of the per-length terms j(ln(2/j) + psi((j-1)/2)) so that
/// E[D_{k,t}] costs three lookups.
class ExpectationTable {
public:
    ExpectationTable() = default;
    explicit ExpectationTable(std::size_t horizon) { ensure(horizon); }

    /// Extends the cache to cover every t <= horizon.
    void ensure(std::size_t horizon);
    [[nodiscard]] std::size_t horizon() const noexcept { return terms_.empty() ? 0 : terms_.size() - 1; }

    /// E[D_{k,t}]; requires t <= horizon().
    [[nodiscard]] double expected(std::size_t k, std::size_t t) const {
        return terms_[t] - (terms_[k] + terms_[t - k]);
    }

private:
    std::vector<double> terms_;
};

/// Single-pass maximum of the chosen statistic over the candidate set,
/// without materializing per-split records. `table` must cover global().n.
SplitMaximum max_statistic(const CandidateSet& candidates, Statistic which,
                           const ExpectationTable& table);

} // namespace cpmon::gaussian
