#include "cpmon/stream_stats.hpp"

#include "cpmon/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace cpmon {

RunningSummary update(const RunningSummary& summary, double x) {
    if (!std::isfinite(x)) {
        throw InputError("observation is not finite");
    }
    return {summary.n + 1, summary.s1 + x, summary.s2 + x * x};
}

double variance_mle(const RunningSummary& summary) {
    if (summary.n == 0) {
        throw DomainError("variance_mle: empty summary");
    }
    const double n = static_cast<double>(summary.n);
    const double mean = summary.s1 / n;
    const double v = summary.s2 / n - mean * mean;
    return v > 0.0 ? v : 0.0;
}

RunningSummary suffix(const RunningSummary& global, const RunningSummary& prefix) {
    if (prefix.n > global.n) {
        throw DomainError("suffix: prefix holds " + std::to_string(prefix.n) +
                          " observations but global only " + std::to_string(global.n));
    }
    if (prefix.n == global.n) {
        return {};
    }
    return {global.n - prefix.n, global.s1 - prefix.s1, global.s2 - prefix.s2};
}

RunningSummary summarize(const std::vector<double>& values) {
    RunningSummary s;
    for (double x : values) {
        s = update(s, x);
    }
    return s;
}

CandidateSet::CandidateSet(std::size_t min_segment, std::optional<std::size_t> capacity)
    : min_segment_(min_segment), capacity_(capacity),
      min_observation_(std::numeric_limits<double>::infinity()) {
    if (min_segment_ == 0) {
        throw DomainError("CandidateSet: min_segment must be at least 1");
    }
    recent_.assign(min_segment_, RunningSummary{});
    if (capacity_ && *capacity_ == 0) {
        throw DomainError("CandidateSet: capacity must be positive");
    }
}

void CandidateSet::push(double x) {
    const RunningSummary next = update(global_, x);
    global_ = next;
    if (x < min_observation_) {
        min_observation_ = x;
    }
    // The slot being overwritten holds the summary of observations
    // 1..t-min_segment, i.e. the prefix of the newest admissible split.
    const RunningSummary prefix = recent_[recent_next_];
    recent_[recent_next_] = global_;
    recent_next_ = (recent_next_ + 1) % min_segment_;
    if (prefix.n < min_segment_) {
        return;
    }
    Candidate c;
    c.k = prefix.n;
    c.prefix = prefix;
    const double v = variance_mle(prefix);
    c.log_variance = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    c.log_sum = prefix.s1 > 0.0 ? std::log(prefix.s1) : std::numeric_limits<double>::quiet_NaN();
    entries_.push_back(c);
    if (capacity_ && entries_.size() > *capacity_) {
        entries_.pop_front();
    }
}

void CandidateSet::reset() {
    global_ = {};
    recent_.assign(min_segment_, RunningSummary{});
    recent_next_ = 0;
    entries_.clear();
    min_observation_ = std::numeric_limits<double>::infinity();
}

} // namespace cpmon
