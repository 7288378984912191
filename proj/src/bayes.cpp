#include "cpmon/bayes.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cpmon::bayes {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kTailMass = 1e-12;

void require_prior(const GammaRatePrior& prior) {
    if (!(prior.alpha > 0.0) || !(prior.beta >= 0.0) || !std::isfinite(prior.alpha) ||
        !std::isfinite(prior.beta)) {
        throw std::invalid_argument("gamma rate prior needs alpha > 0 and finite beta >= 0");
    }
}

} // namespace

SegmentLengthPrior SegmentLengthPrior::negative_binomial(double mean, double sd) {
    const double variance = sd * sd;
    if (!(mean > 0.0) || !(variance > mean) || !std::isfinite(variance)) {
        throw std::invalid_argument("negative binomial prior needs mean > 0 and sd^2 > mean");
    }
    const double p = mean / variance;
    return SegmentLengthPrior(mean * p / (1.0 - p), p);
}

SegmentLengthPrior::SegmentLengthPrior(double r, double p) : r_(r), p_(p) {
    // Forward pass until the tail estimated from the cdf is negligible.
    double prob = std::exp(r_ * std::log(p_));
    double cdf = 0.0;
    std::size_t j = 0;
    for (;; ++j) {
        pmf_.push_back(prob);
        cdf += prob;
        if (1.0 - cdf < kTailMass && j > 0) {
            break;
        }
        prob *= (static_cast<double>(j) + r_) / static_cast<double>(j + 1) * (1.0 - p_);
    }
    horizon_ = j;
    // Extend far enough that the backward sums below are accurate in
    // relative terms up to the horizon.
    const auto extra = static_cast<std::size_t>(std::ceil(45.0 / -std::log1p(-p_))) + 64;
    for (std::size_t i = 0; i < extra; ++i, ++j) {
        prob *= (static_cast<double>(j) + r_) / static_cast<double>(j + 1) * (1.0 - p_);
        pmf_.push_back(prob);
    }
    survivor_.assign(pmf_.size(), 0.0);
    double tail = 0.0;
    for (std::size_t i = pmf_.size(); i-- > 0;) {
        survivor_[i] = tail; // P(N > i)
        tail += pmf_[i];
    }
    pmf_.resize(horizon_ + 1);
    survivor_.resize(horizon_ + 1);
}

double SegmentLengthPrior::pmf(std::size_t j) const {
    if (j < pmf_.size()) {
        return pmf_[j];
    }
    return std::exp(log_gamma(static_cast<double>(j) + r_) - log_gamma(r_) -
                    log_gamma(static_cast<double>(j) + 1.0) + r_ * std::log(p_) +
                    static_cast<double>(j) * std::log1p(-p_));
}

double SegmentLengthPrior::survivor(std::size_t j) const {
    return j < survivor_.size() ? survivor_[j] : 0.0;
}

double SegmentLengthPrior::hazard(std::size_t length) const {
    if (length == 0) {
        throw DomainError("segment length hazard is defined for lengths >= 1");
    }
    const std::size_t l = std::min(length, horizon_);
    return pmf_[l] / survivor_[l - 1];
}

double log_marginal_likelihood(const GammaRatePrior& prior, std::size_t m, double sum) {
    require_prior(prior);
    if (!prior.proper()) {
        throw std::invalid_argument(
            "marginal likelihood is undefined under an improper rate prior: the segment "
            "normalizing constant is arbitrary, so segmentations cannot be compared (Lindley's "
            "paradox); use a proper Gamma(alpha, beta) prior with beta > 0");
    }
    if (m == 0 || !(sum > 0.0)) {
        throw DomainError("marginal likelihood needs m >= 1 and a positive sum");
    }
    const double a = prior.alpha;
    const double md = static_cast<double>(m);
    return a * std::log(prior.beta) + log_gamma(a + md) - log_gamma(a) -
           (a + md) * std::log(prior.beta + sum);
}

double marginal_likelihood(const GammaRatePrior& prior, std::size_t m, double sum) {
    return std::exp(log_marginal_likelihood(prior, m, sum));
}

double log_predictive(const GammaRatePrior& prior, std::size_t m, double sum, double x) {
    const double shape = prior.alpha + static_cast<double>(m);
    const double rate = prior.beta + sum;
    if (!(rate > 0.0)) {
        // Fresh segment under a rate-0 prior: density vanishes in the limit.
        return kNegInf;
    }
    return std::log(shape) + shape * std::log(rate) - (shape + 1.0) * std::log(rate + x);
}

BayesFilter::BayesFilter(SegmentLengthPrior segments, GammaRatePrior rates)
    : segments_(std::move(segments)), rates_(rates) {
    require_prior(rates_);
}

void BayesFilter::step(double x) {
    if (!std::isfinite(x) || !(x > 0.0)) {
        throw InputError("bayes filter: observations must be finite and positive");
    }
    if (t_ == 0) {
        // Every configuration puts x_1 in the first segment; its predictive
        // density is a common factor and is left out.
        start_ = {0};
        log_weight_ = {0.0};
        sum_ = {x};
        t_ = 1;
        log_evidence_ = 0.0;
        return;
    }
    const std::size_t n = start_.size();
    double max_prior = kNegInf;
    for (double w : log_weight_) max_prior = std::max(max_prior, w);

    double change_mass = 0.0; // relative to exp(max_prior)
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t length = t_ - start_[i];
        const double hz = segments_.hazard(length);
        change_mass += std::exp(log_weight_[i] - max_prior) * hz;
        log_weight_[i] += std::log1p(-hz) + log_predictive(rates_, length, sum_[i], x);
        sum_[i] += x;
    }
    const double new_weight =
        change_mass > 0.0 ? max_prior + std::log(change_mass) + log_predictive(rates_, 0, 0.0, x) : kNegInf;
    start_.push_back(t_);
    log_weight_.push_back(new_weight);
    sum_.push_back(x);
    ++t_;

    double top = kNegInf;
    for (double w : log_weight_) top = std::max(top, w);
    if (!std::isfinite(top)) {
        throw DomainError("bayes filter: posterior mass vanished");
    }
    double total = 0.0;
    for (double w : log_weight_) total += std::exp(w - top);
    const double log_norm = top + std::log(total);
    log_evidence_ += log_norm;
    std::size_t keep = 0;
    for (std::size_t i = 0; i < log_weight_.size(); ++i) {
        const double w = log_weight_[i] - log_norm;
        if (w == kNegInf) {
            continue;
        }
        start_[keep] = start_[i];
        log_weight_[keep] = w;
        sum_[keep] = sum_[i];
        ++keep;
    }
    start_.resize(keep);
    log_weight_.resize(keep);
    sum_.resize(keep);
}

double BayesFilter::prob_no_change() const {
    if (t_ == 0) {
        return 1.0;
    }
    return start_.front() == 0 ? std::exp(log_weight_.front()) : 0.0;
}

std::vector<std::pair<std::size_t, double>> BayesFilter::posterior() const {
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(start_.size());
    for (std::size_t i = 0; i < start_.size(); ++i) {
        out.emplace_back(start_[i], std::exp(log_weight_[i]));
    }
    return out;
}

std::optional<std::size_t> detect(std::span<const double> stream, const SegmentLengthPrior& segments,
                                  const GammaRatePrior& rates, double c) {
    if (!(c > 0.0 && c < 1.0)) {
        throw std::invalid_argument("detection level c must lie in (0, 1)");
    }
    BayesFilter filter(segments, rates);
    for (double x : stream) {
        filter.step(x);
        if (filter.prob_no_change() < c) {
            return filter.t();
        }
    }
    return std::nullopt;
}

} // namespace cpmon::bayes
