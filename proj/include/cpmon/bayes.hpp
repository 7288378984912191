#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

/// Exact online filtering of the most recent change point for Exponential
/// data with conjugate Gamma rate priors, and the probability-threshold
/// detection rule built on it.
namespace cpmon::bayes {

/// Prior on segment lengths: a Negative Binomial N (failures before the
/// r-th success) matched to a mean and standard deviation. Segment lengths
/// are N conditioned on N >= 1, so the hazard of a segment ending at length
/// l >= 1 is g(l) / P(N > l - 1).
class SegmentLengthPrior {
public:
    /// Moment matching: p = mean / variance, r = mean p / (1 - p).
    /// Throws std::invalid_argument unless mean > 0 and sd^2 > mean.
    static SegmentLengthPrior negative_binomial(double mean, double sd);

    [[nodiscard]] double r() const noexcept { return r_; }
    [[nodiscard]] double p() const noexcept { return p_; }

    /// g(j) = P(N = j), j >= 0.
    [[nodiscard]] double pmf(std::size_t j) const;
    /// P(N > j).
    [[nodiscard]] double survivor(std::size_t j) const;
    /// g(l) / P(N > l-1) for l >= 1. Beyond the truncation horizon the
    /// hazard is held at its last tabulated value.
    [[nodiscard]] double hazard(std::size_t length) const;
    /// Index beyond which the remaining tail mass is below 1e-12.
    [[nodiscard]] std::size_t truncation_horizon() const noexcept { return horizon_; }

private:
    SegmentLengthPrior(double r, double p);

    double r_;
    double p_;
    std::size_t horizon_ = 0;
    std::vector<double> pmf_;
    std::vector<double> survivor_;
};

/// Gamma(alpha, beta) prior (shape, rate) on an Exponential rate. beta = 0
/// is representable (e.g. the Jeffreys limit Gamma(1/2, 0)) but improper.
struct GammaRatePrior {
    double alpha = 1.0;
    double beta = 1.0;

    [[nodiscard]] bool proper() const noexcept { return alpha > 0.0 && beta > 0.0; }
    [[nodiscard]] static GammaRatePrior jeffreys() noexcept { return {0.5, 0.0}; }
};

/// ln of  beta^alpha Gamma(alpha+m) / (Gamma(alpha) (beta+sum)^(alpha+m)),
/// the probability density of m Exponential observations totalling `sum`
/// with the rate integrated out. Throws std::invalid_argument for an
/// improper prior: segment marginals are then defined only up to a
/// constant, and comparisons between segmentations degenerate (Lindley's
/// paradox).
double log_marginal_likelihood(const GammaRatePrior& prior, std::size_t m, double sum);
double marginal_likelihood(const GammaRatePrior& prior, std::size_t m, double sum);

/// ln p(x | m previous observations summing to `sum`) in one segment.
double log_predictive(const GammaRatePrior& prior, std::size_t m, double sum, double x);

/// Posterior over C_t, the index of the most recent change point
/// (0 = no change yet), updated in O(t) per observation.
class BayesFilter {
public:
    BayesFilter(SegmentLengthPrior segments, GammaRatePrior rates);

    /// Throws InputError for a non-finite or non-positive x.
    void step(double x);

    [[nodiscard]] std::size_t t() const noexcept { return t_; }
    /// P(C_t = 0 | x_1..x_t); 1 before any data.
    [[nodiscard]] double prob_no_change() const;
    /// ln p(x_2..x_t | x_1). The density of x_1 is the same under every
    /// configuration and is left out (it is -inf for an improper prior).
    [[nodiscard]] double log_evidence() const noexcept { return log_evidence_; }
    /// (c, P(C_t = c)) for every support point with positive mass, c ascending.
    [[nodiscard]] std::vector<std::pair<std::size_t, double>> posterior() const;

private:
    SegmentLengthPrior segments_;
    GammaRatePrior rates_;
    std::size_t t_ = 0;
    double log_evidence_ = 0.0;
    std::vector<std::size_t> start_;
    std::vector<double> log_weight_;
    std::vector<double> sum_;
};

/// First t with P(C_t = 0 | x_1..x_t) < c, or nullopt if none.
/// Throws std::invalid_argument unless 0 < c < 1.
std::optional<std::size_t> detect(std::span<const double> stream, const SegmentLengthPrior& segments,
                                  const GammaRatePrior& rates, double c);

} // namespace cpmon::bayes
