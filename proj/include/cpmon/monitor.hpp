#pragma once

#include "cpmon/statistic_eval.hpp"
#include "cpmon/statistic_kind.hpp"
#include "cpmon/thresholds.hpp"

#include <cstddef>
#include <deque>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace cpmon {

/// Thresholds from the closed-form regression for a given gamma = 1/ARL0.
struct RegressionThreshold {
    double gamma = 0.002;
};

/// A constant threshold. Voids any ARL0 guarantee; for experiments only.
struct FixedThreshold {
    double h = 0.0;
};

using ThresholdSource =
    std::variant<std::shared_ptr<const ThresholdTable>, RegressionThreshold, FixedThreshold>;

struct DetectorConfig {
    StatisticKind statistic = StatisticKind::corrected_gaussian;
    ThresholdSource threshold = RegressionThreshold{};
    /// Maximum number of retained split candidates; unset keeps all.
    std::optional<std::size_t> window;
    /// Observations consumed before the first decision.
    std::size_t burn_in = 20;
    /// Restart after each detection instead of stopping.
    bool multi_change = false;

    [[nodiscard]] Family family() const noexcept { return family_of(statistic); }

    /// Throws std::invalid_argument: burn_in below 4 (Gaussian) or 2
    /// (Exponential), window below 8, a table for a different statistic or
    /// one that starts after burn_in + 1.
    void validate() const;
};

/// Uses the shipped table for (statistic, arl0).
[[nodiscard]] DetectorConfig shipped_config(StatisticKind statistic, double arl0);

struct DetectionReport {
    /// Index of the observation at which the threshold was first crossed.
    std::size_t detection_time = 0;
    /// Split point maximizing the statistic: the last pre-change observation.
    std::size_t tau_hat = 0;
    double statistic = 0.0;
    double threshold = 0.0;

    friend bool operator==(const DetectionReport&, const DetectionReport&) = default;
};

/// Single-change sequential detector. Indices in reports count from the
/// first observation given to this detector (1-based).
class Detector {
public:
    explicit Detector(DetectorConfig config);

    /// Consumes x and signals when the configured max-statistic exceeds h_t.
    /// Observations up to burn_in never signal. Throws InputError for a
    /// non-finite x, or x <= 0 in the Exponential family; the detector is
    /// unchanged in that case.
    std::optional<DetectionReport> step(double x);

    /// Clears the data but keeps cached expectation terms.
    void reset();

    [[nodiscard]] std::size_t observations() const noexcept { return candidates_.global().n; }
    [[nodiscard]] const DetectorConfig& config() const noexcept { return config_; }
    [[nodiscard]] const CandidateSet& candidates() const noexcept { return candidates_; }

    /// Threshold applied at local time t (t > burn_in).
    [[nodiscard]] double threshold_at(std::size_t t) const;

private:
    DetectorConfig config_;
    CandidateSet candidates_;
    StatisticEvaluator evaluator_;
};

/// Streaming front end implementing the restart protocol: after a signal
/// at T with estimate tau_hat, a fresh detector is fed the already-received
/// observations tau_hat+1..T and then the live stream. Reports use global
/// 1-based indices.
class StreamMonitor {
public:
    explicit StreamMonitor(DetectorConfig config);

    /// Returns every detection triggered by x, including any raised while
    /// replaying after a restart. In single-change mode observations after
    /// the first detection are ignored.
    std::vector<DetectionReport> push(double x);

    [[nodiscard]] bool finished() const noexcept { return finished_; }
    /// Observations received so far.
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    std::optional<DetectionReport> feed(double x);

    Detector detector_;
    std::size_t position_ = 0;
    // global index of the observation preceding the detector's first one
    std::size_t offset_ = 0;
    std::deque<double> history_;
    std::size_t history_limit_;
    bool finished_ = false;
};

/// Runs a whole stream. Errors are rethrown as InputError naming the
/// 1-based position of the offending observation.
[[nodiscard]] std::vector<DetectionReport> run(std::span<const double> stream, const DetectorConfig& config);

} // namespace cpmon
