#pragma once

#include "cpmon/split_maximum.hpp"
#include "cpmon/stream_stats.hpp"

#include <cstddef>
#include <vector>

/// Two-sample likelihood ratio statistics for a change in the rate of
/// Exponential observations, both rates unknown.
///
/// The segment statistic here is the segment SUM of the observations, not
/// the Gaussian variance: S_{0,k} = x_1 + ... + x_k is Gamma(k, lambda)
/// under the null, which is what the expectation formula is built on.
namespace cpmon::exponential {

/// A rate is estimable from one observation: 1 <= k <= t-1.
inline constexpr std::size_t kMinSegment = 1;

enum class Statistic {
    raw,       ///< M_{k,t}
    corrected, ///< M_{k,t} / E[M_{k,t}]
};

/// M_{k,n} = -2 [ n ln(n/S_0n) - k ln(k/S_0k) - (n-k) ln((n-k)/S_kn) ]
/// where S are segment sums and S_kn = total_sum - prefix_sum.
double m_stat(double prefix_sum, std::size_t k, double total_sum, std::size_t t);

/// Exact null expectation of M_{k,n}:
///   -2 [ k psi(k) + (n-k) psi(n-k) - n psi(n) + n ln n - k ln k - (n-k) ln(n-k) ].
double expected_m(std::size_t k, std::size_t t);

struct SplitScore {
    std::size_t k = 0;
    double m = 0.0;
    double mc = 0.0;
};

struct SplitScores {
    std::size_t t = 0;
    std::vector<SplitScore> records;
};

/// Scores every retained candidate. Throws InputError if any observation
/// pushed into the set is not strictly positive, DomainError when t < 2 or
/// the set is empty.
SplitScores corrected_scores(const CandidateSet& candidates);

/// Maximum of the chosen statistic; ties resolve to the smallest k.
SplitMaximum max_score(const SplitScores& scores, Statistic which);

/// Cached j (psi(j) - ln j) and ln j terms.
class ExpectationTable {
public:
    ExpectationTable() = default;
    explicit ExpectationTable(std::size_t horizon) { ensure(horizon); }

    void ensure(std::size_t horizon);
    [[nodiscard]] std::size_t horizon() const noexcept { return terms_.empty() ? 0 : terms_.size() - 1; }

    /// E[M_{k,t}]; requires t <= horizon().
    [[nodiscard]] double expected(std::size_t k, std::size_t t) const {
        return -2.0 * (terms_[k] + terms_[t - k] - terms_[t]);
    }
    [[nodiscard]] double log_count(std::size_t j) const { return logs_[j]; }

private:
    std::vector<double> terms_;
    std::vector<double> logs_;
};

/// Single-pass maximum over the candidate set. `table` must cover global().n.
SplitMaximum max_statistic(const CandidateSet& candidates, Statistic which,
                           const ExpectationTable& table);

} // namespace cpmon::exponential
