#pragma once

#include "cpmon/bayes.hpp"
#include "cpmon/monitor.hpp"
#include "cpmon/statistic_kind.hpp"

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace cpmon {
class Xoshiro256;
}

/// Monte Carlo campaigns: null run lengths, conditional detection delays
/// and frequentist-vs-Bayes comparisons.
namespace cpmon::harness {

struct GaussianParams {
    double mean = 0.0;
    double sd = 1.0;
};

/// Rate parameterization: mean 1/rate.
struct ExponentialParams {
    double rate = 1.0;
};

using Regime = std::variant<GaussianParams, ExponentialParams>;

struct Scenario {
    Regime pre = GaussianParams{};
    Regime post = GaussianParams{};
    /// Last pre-change index; 0 means no change.
    std::size_t tau = 0;
    /// Streams are cut off after this many observations.
    std::size_t horizon = 10'000;
    /// When set, pre and post Exponential rates are drawn from this Gamma
    /// distribution independently for every replication.
    std::optional<bayes::GammaRatePrior> sampled_rates;

    [[nodiscard]] Family family() const;
    /// Throws std::invalid_argument for mixed families, bad parameters or
    /// horizon <= tau.
    void validate() const;
};

/// Draws observations one at a time for one replication.
class StreamSampler {
public:
    StreamSampler(const Scenario& scenario, Xoshiro256& rng);
    double next();

private:
    const Scenario* scenario_;
    Xoshiro256* rng_;
    std::size_t t_ = 0;
    Regime pre_;
    Regime post_;
    std::normal_distribution<double> normal_;
};

struct Estimate {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double se = std::numeric_limits<double>::quiet_NaN();
    std::size_t count = 0;

    /// True when se exceeds 2% of the mean (or the estimate is empty).
    [[nodiscard]] bool imprecise() const;
};

[[nodiscard]] Estimate estimate(const std::vector<double>& values);

struct CampaignResult {
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::size_t horizon = 0;
    std::size_t burn_in = 0;
    std::size_t tau = 0;
    /// Runs with no detection by the horizon. They enter the means below
    /// with T = horizon.
    std::size_t truncated = 0;
    /// Detections at T <= tau (only meaningful when tau > 0).
    std::size_t false_positives = 0;
    /// T - burn_in over all runs: the in-control run length counted from
    /// the first monitored observation.
    Estimate run_length;
    /// T over all runs.
    Estimate detection_time;
    /// T - tau over runs with T > tau.
    Estimate delay;

    [[nodiscard]] double truncation_fraction() const;
    [[nodiscard]] double false_positive_rate() const;
};

/// Per-replication detection times (nullopt = no detection by horizon),
/// summarized.
[[nodiscard]] CampaignResult summarize(const std::vector<std::optional<std::size_t>>& times,
                                       std::size_t horizon, std::size_t burn_in, std::size_t tau,
                                       std::uint64_t seed);

/// Nominal ARL0 implied by the threshold source; nullopt for fixed thresholds.
[[nodiscard]] std::optional<double> nominal_arl0(const DetectorConfig& config);

/// Null run lengths under N(0,1) or Exp(1) data. Streams are truncated at
/// burn_in + 20 x ARL0 by default (10'000 past burn-in for fixed
/// thresholds). Throws std::invalid_argument for fewer than 1000
/// replications. threads = 0 uses default_thread_count().
[[nodiscard]] CampaignResult estimate_arl0(const DetectorConfig& config, std::size_t replications,
                                           std::uint64_t seed, unsigned threads = 0,
                                           std::optional<std::size_t> horizon = std::nullopt);

/// Runs the detector on `replications` streams from the scenario.
/// Replication i uses substream(seed, i), so detectors given the same seed
/// see identical streams.
[[nodiscard]] CampaignResult run_campaign(const DetectorConfig& config, const Scenario& scenario,
                                          std::size_t replications, std::uint64_t seed,
                                          unsigned threads = 0);

enum class DelayGrid { mean, variance, exponential };

[[nodiscard]] const char* to_string(DelayGrid grid) noexcept;

/// Change magnitudes in the printed row order; 0 denotes the no-change row.
[[nodiscard]] std::vector<double> default_magnitudes(DelayGrid grid);

struct DelayCell {
    std::size_t tau = 0;
    double magnitude = 0.0;
    CampaignResult uncorrected;
    CampaignResult corrected;
};

struct DelayTableSpec {
    DelayGrid grid = DelayGrid::mean;
    std::vector<std::size_t> taus{25, 100};
    /// Empty selects default_magnitudes(grid).
    std::vector<double> magnitudes;
    double arl0 = 500.0;
    std::size_t replications = 20'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

/// Both statistics of the grid's family, with the shipped tables at
/// spec.arl0, on common random numbers per cell. The no-change row reports
/// E[T - tau | T > tau], i.e. roughly the ARL0.
[[nodiscard]] std::vector<DelayCell> delay_table(const DelayTableSpec& spec);

/// Scenario for one delay-table cell.
[[nodiscard]] Scenario delay_scenario(DelayGrid grid, std::size_t tau, double magnitude,
                                      std::size_t horizon);

struct BayesRow {
    /// "frequentist" for the corrected-statistic row.
    std::string method;
    std::optional<bayes::GammaRatePrior> prior;
    std::optional<double> c;
    CampaignResult result;
};

struct BayesComparisonSpec {
    Scenario scenario;
    std::vector<bayes::GammaRatePrior> priors;
    std::vector<double> levels{0.2, 0.4, 0.6, 0.8};
    double segment_mean = 200.0;
    double segment_sd = 200.0;
    /// ARL0 of the frequentist row's shipped corrected-exponential table.
    double frequentist_arl0 = 200.0;
    std::size_t replications = 10'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

/// Frequentist row first, then one row per (prior, c) in input order.
/// False positives are detections at T <= tau; delays are T - tau over
/// T > tau. A prior that never detects yields rows with an empty delay.
[[nodiscard]] std::vector<BayesRow> bayes_comparison(const BayesComparisonSpec& spec);

/// Exp(1) -> Exp(3) at tau = 50, priors Gamma(1,1), Gamma(0.1,0.1),
/// Gamma(0.01,0.01) and Jeffreys.
[[nodiscard]] BayesComparisonSpec bayes_example_x();
/// Exp(5) -> Exp(10) at tau = 50, priors Gamma(1,1), Gamma(0.01,0.01),
/// Gamma(22.5,3).
[[nodiscard]] BayesComparisonSpec bayes_example_y();
/// Rates drawn from Gamma(22.5,3), matched prior, tau = 50.
[[nodiscard]] BayesComparisonSpec prior_sampled_example();

void write_delay_csv(std::ostream& out, DelayGrid grid, const std::vector<DelayCell>& cells);
/// `delay` is E[T - tau | T > tau]; `time` is E[T | T > tau], the
/// observation count at detection.
void write_bayes_csv(std::ostream& out, const std::vector<BayesRow>& rows);

[[nodiscard]] nlohmann::json to_json(const Estimate& e);
[[nodiscard]] nlohmann::json to_json(const CampaignResult& r);
[[nodiscard]] nlohmann::json to_json(DelayGrid grid, const std::vector<DelayCell>& cells);
[[nodiscard]] nlohmann::json to_json(const std::vector<BayesRow>& rows);

} // namespace cpmon::harness
