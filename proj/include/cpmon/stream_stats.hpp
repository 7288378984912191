#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

namespace cpmon {

/// Count, sum and sum of squares of a data segment.
///
/// Raw moments make segment statistics available by subtraction (see
/// suffix()). Accuracy degrades when |mean| dwarfs the spread; data with
/// magnitudes above ~1e6 should be centred first.
struct RunningSummary {
    std::size_t n = 0;
    double s1 = 0.0;
    double s2 = 0.0;

    friend bool operator==(const RunningSummary&, const RunningSummary&) = default;
};

/// Returns `summary` with `x` appended. Throws InputError for non-finite x.
RunningSummary update(const RunningSummary& summary, double x);

/// Biased (maximum likelihood) variance s2/n - (s1/n)^2, clamped at 0.
/// Throws DomainError when summary.n == 0.
double variance_mle(const RunningSummary& summary);

/// Statistics of the observations in `global` that are not in `prefix`.
/// Throws DomainError when prefix.n > global.n.
RunningSummary suffix(const RunningSummary& global, const RunningSummary& prefix);

/// Batch summary of a contiguous range, used as the reference for the
/// recursive path.
RunningSummary summarize(const std::vector<double>& values);

/// One admissible split point k and the summary of observations 1..k.
struct Candidate {
    std::size_t k = 0;
    RunningSummary prefix;
    /// ln(variance_mle(prefix)), or -inf when that variance is zero.
    double log_variance = 0.0;
    /// ln(prefix.s1); NaN when s1 <= 0 (only meaningful for positive data).
    double log_sum = 0.0;
};

/// Windowed collection of prefix summaries, one per admissible split point.
///
/// A split k is admissible once both segments 1..k and k+1..t hold at least
/// `min_segment` observations, so after t pushes the candidates are
/// k = min_segment .. t - min_segment. With a capacity W only the W largest
/// k are kept; evicted observations stay inside global(), so the suffix
/// statistics of surviving candidates are unchanged.
class CandidateSet {
public:
    explicit CandidateSet(std::size_t min_segment, std::optional<std::size_t> capacity = {});

    /// Appends x; may add one candidate and evict the oldest.
    /// Throws InputError for non-finite x (the set is left untouched).
    void push(double x);

    void reset();

    [[nodiscard]] const RunningSummary& global() const noexcept { return global_; }
    [[nodiscard]] std::size_t size() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::size_t min_segment() const noexcept { return min_segment_; }
    [[nodiscard]] std::optional<std::size_t> capacity() const noexcept { return capacity_; }
    /// Smallest observation pushed since construction or reset().
    [[nodiscard]] double min_observation() const noexcept { return min_observation_; }

    [[nodiscard]] const Candidate& operator[](std::size_t i) const { return entries_[i]; }
    [[nodiscard]] auto begin() const noexcept { return entries_.begin(); }
    [[nodiscard]] auto end() const noexcept { return entries_.end(); }

private:
    std::size_t min_segment_;
    std::optional<std::size_t> capacity_;
    RunningSummary global_;
    // ring of global summaries after each of the last min_segment_ pushes
    std::vector<RunningSummary> recent_;
    std::size_t recent_next_ = 0;
    std::deque<Candidate> entries_;
    double min_observation_;
};

} // namespace cpmon
