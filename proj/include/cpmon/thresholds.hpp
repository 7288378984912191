#pragma once

#include "cpmon/statistic_kind.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace cpmon {

/// Default first monitored index: decisions start after 20 observations.
inline constexpr std::size_t kDefaultStartT = 21;

struct ThresholdEntry {
    std::size_t t = 0;
    double h = 0.0;
};

/// Per-time-step thresholds h_t for one statistic and one ARL0.
///
/// Lookups between tabulated t carry the previous entry forward; beyond the
/// last entry the final value applies.
class ThresholdTable {
public:
    /// Throws std::invalid_argument unless entries are non-empty, strictly
    /// increasing in t, start at start_t, all h > 0, and arl0 >= 1.
    ThresholdTable(StatisticKind kind, double arl0, std::size_t start_t,
                   std::vector<ThresholdEntry> entries);

    [[nodiscard]] StatisticKind kind() const noexcept { return kind_; }
    [[nodiscard]] double arl0() const noexcept { return arl0_; }
    [[nodiscard]] double gamma() const noexcept { return 1.0 / arl0_; }
    [[nodiscard]] std::size_t start_t() const noexcept { return start_t_; }
    [[nodiscard]] const std::vector<ThresholdEntry>& entries() const noexcept { return entries_; }

    /// Throws DomainError when t < start_t (monitoring has not begun).
    [[nodiscard]] double lookup(std::size_t t) const;

    /// UTF-8 CSV: `# key=value` comment lines (statistic, arl0, start_t, then
    /// `extra`), a `t,h` header and one row per entry.
    void write_csv(std::ostream& out, const std::map<std::string, std::string>& extra = {}) const;

    /// Inverse of write_csv. Unknown comment keys are ignored.
    /// Throws std::invalid_argument with the offending line on malformed input.
    static ThresholdTable read_csv(std::istream& in);

private:
    StatisticKind kind_;
    double arl0_;
    std::size_t start_t_;
    std::vector<ThresholdEntry> entries_;
};

/// Operational tables packaged with the library, used by shipped_config():
/// corrected Gaussian for ARL0 in {100, 200, 370, 500, 1000, 2000, 5000}
/// (the published values), corrected Exponential for the same ARL0 values
/// and HZ / raw Exponential for ARL0 = 500 (all calibrated with calibrate()).
/// Throws std::invalid_argument for a combination that is not shipped.
[[nodiscard]] const ThresholdTable& shipped_table(StatisticKind kind, double arl0);
/// Every operational table.
[[nodiscard]] const std::vector<ThresholdTable>& shipped_tables();

/// The published smoothed threshold tables for the corrected statistics,
/// transcribed verbatim. The Exponential ones are kept for reference only:
/// with M^c = M / E[M] they give in-control run lengths far below their
/// nominal ARL0.
[[nodiscard]] const ThresholdTable& published_table(StatisticKind kind, double arl0);
[[nodiscard]] const std::vector<ThresholdTable>& published_tables();

/// Closed-form approximation for the corrected Gaussian statistic:
///   h_t = 1.51 - 2.39 ln(gamma) + (3.65 + 0.76 ln(gamma)) / sqrt(t - 7).
/// Throws DomainError for t <= 7 or gamma outside (0, 1).
[[nodiscard]] double regression_h(double gamma, std::size_t t);

struct CalibrationPlan {
    std::size_t replications = 200'000;
    std::size_t t_max = 800;
    /// Per-step conditional false-alarm probability, 1/ARL0.
    double gamma = 0.002;
    std::uint64_t seed = 1;
    /// Weight of the new raw value in h~_t = (1-w) h~_{t-1} + w h_t.
    double smoothing_weight = 0.3;
    std::size_t start_t = kDefaultStartT;
    /// 0 selects default_thread_count().
    unsigned threads = 0;

    /// Human-readable problems that do not prevent calibration.
    [[nodiscard]] std::vector<std::string> warnings() const;
};

struct Calibration {
    ThresholdTable table;
    /// Unsmoothed conditional quantiles, one per t from start_t.
    std::vector<double> raw;
    /// Streams still alive when each raw value was taken.
    std::vector<std::size_t> survivors;
};

/// Simulates plan.replications null streams (N(0,1) or Exp(1)) in lockstep.
/// At each t >= start_t the raw threshold is the empirical (1 - gamma)
/// quantile of the statistic among streams that have not yet signalled
/// (order statistic of rank ceil((1-gamma) n); rank 0 means just below the
/// minimum), and streams above it are retired. The raw sequence is then
/// exponentially smoothed, seeded with its first value.
///
/// Deterministic in (plan, kind) regardless of thread count. Throws
/// CalibrationExhausted when fewer than 1/gamma streams survive at some t,
/// std::invalid_argument for an invalid plan.
[[nodiscard]] Calibration calibrate(const CalibrationPlan& plan, StatisticKind kind);

/// Exponential smoothing used by calibrate().
[[nodiscard]] std::vector<double> smooth_thresholds(const std::vector<double>& raw, double weight);

} // namespace cpmon
