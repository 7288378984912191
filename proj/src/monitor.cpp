#include "cpmon/monitor.hpp"

#include "cpmon/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cpmon {

void DetectorConfig::validate() const {
    const std::size_t min_burn_in = 2 * min_segment(family());
    if (burn_in < min_burn_in) {
        throw std::invalid_argument("burn_in must be at least " + std::to_string(min_burn_in) +
                                    " for the " + std::string(to_string(family())) + " family");
    }
    if (window && *window < 8) {
        throw std::invalid_argument("window must be at least 8");
    }
    if (const auto* table = std::get_if<std::shared_ptr<const ThresholdTable>>(&threshold)) {
        if (!*table) {
            throw std::invalid_argument("threshold table is null");
        }
        if ((*table)->kind() != statistic) {
            throw std::invalid_argument("threshold table is for " + std::string(to_string((*table)->kind())) +
                                        " but the detector monitors " + std::string(to_string(statistic)));
        }
        if ((*table)->start_t() > burn_in + 1) {
            throw std::invalid_argument("threshold table starts at t=" + std::to_string((*table)->start_t()) +
                                        " but monitoring begins at t=" + std::to_string(burn_in + 1));
        }
    } else if (const auto* reg = std::get_if<RegressionThreshold>(&threshold)) {
        if (!(reg->gamma > 0.0 && reg->gamma < 1.0)) {
            throw std::invalid_argument("regression threshold gamma must lie in (0, 1)");
        }
        if (burn_in < 7) {
            throw std::invalid_argument("regression thresholds need burn_in >= 7");
        }
    } else if (std::get<FixedThreshold>(threshold).h < 0.0 || std::isnan(std::get<FixedThreshold>(threshold).h)) {
        throw std::invalid_argument("fixed threshold must be non-negative");
    }
}

DetectorConfig shipped_config(StatisticKind statistic, double arl0) {
    DetectorConfig config;
    config.statistic = statistic;
    config.threshold = std::shared_ptr<const ThresholdTable>(&shipped_table(statistic, arl0),
                                                             [](const ThresholdTable*) {});
    return config;
}

Detector::Detector(DetectorConfig config)
    : config_((config.validate(), std::move(config))),
      candidates_(min_segment(config_.family()), config_.window), evaluator_(config_.statistic) {}

double Detector::threshold_at(std::size_t t) const {
    return std::visit(
        [t](const auto& source) -> double {
            using T = std::decay_t<decltype(source)>;
            if constexpr (std::is_same_v<T, RegressionThreshold>) {
                return regression_h(source.gamma, t);
            } else if constexpr (std::is_same_v<T, FixedThreshold>) {
                return source.h;
            } else {
                return source->lookup(t);
            }
        },
        config_.threshold);
}

std::optional<DetectionReport> Detector::step(double x) {
    if (!std::isfinite(x)) {
        throw InputError("observation is not finite");
    }
    if (config_.family() == Family::exponential && !(x > 0.0)) {
        throw InputError("exponential observations must be strictly positive");
    }
    candidates_.push(x);
    const std::size_t t = candidates_.global().n;
    if (t <= config_.burn_in) {
        return std::nullopt;
    }
    const double h = threshold_at(t);
    if (std::isinf(h)) {
        return std::nullopt;
    }
    const SplitMaximum best = evaluator_.evaluate(candidates_);
    if (best.value > h) {
        return DetectionReport{t, best.k, best.value, h};
    }
    return std::nullopt;
}

void Detector::reset() {
    candidates_.reset();
}

StreamMonitor::StreamMonitor(DetectorConfig config)
    : detector_(std::move(config)),
      history_limit_(detector_.config().window
                         ? *detector_.config().window + 2 * min_segment(detector_.config().family())
                         : std::numeric_limits<std::size_t>::max()) {}

std::optional<DetectionReport> StreamMonitor::feed(double x) {
    auto report = detector_.step(x);
    history_.push_back(x);
    if (history_.size() > history_limit_) {
        history_.pop_front();
    }
    return report;
}

std::vector<DetectionReport> StreamMonitor::push(double x) {
    std::vector<DetectionReport> out;
    if (finished_) {
        return out;
    }
    std::deque<double> pending{x};
    bool live = true;
    while (!pending.empty()) {
        const double next = pending.front();
        auto report = feed(next);
        pending.pop_front();
        if (live) {
            ++position_;
            live = false;
        }
        if (!report) {
            continue;
        }
        const std::size_t local_t = report->detection_time;
        const std::size_t local_k = report->tau_hat;
        report->detection_time += offset_;
        report->tau_hat += offset_;
        out.push_back(*report);
        if (!detector_.config().multi_change) {
            finished_ = true;
            return out;
        }
        // Observations tau_hat+1..T, followed by anything not yet replayed.
        const std::size_t replay = local_t - local_k;
        std::deque<double> restart(history_.end() - static_cast<std::ptrdiff_t>(replay), history_.end());
        restart.insert(restart.end(), pending.begin(), pending.end());
        pending = std::move(restart);
        offset_ += local_k;
        detector_.reset();
        history_.clear();
    }
    return out;
}

std::vector<DetectionReport> run(std::span<const double> stream, const DetectorConfig& config) {
    StreamMonitor monitor(config);
    std::vector<DetectionReport> reports;
    for (std::size_t i = 0; i < stream.size(); ++i) {
        try {
            auto found = monitor.push(stream[i]);
            reports.insert(reports.end(), found.begin(), found.end());
        } catch (const InputError& e) {
            throw InputError("observation " + std::to_string(i + 1) + ": " + e.what());
        }
        if (monitor.finished()) {
            break;
        }
    }
    return reports;
}

} // namespace cpmon
