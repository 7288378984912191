#include "cpmon/harness.hpp"

#include "cpmon/parallel.hpp"
#include "cpmon/random.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cpmon::harness {
namespace {

Family family_of_regime(const Regime& r) {
    return std::holds_alternative<GaussianParams>(r) ? Family::gaussian : Family::exponential;
}

void check_regime(const Regime& r) {
    if (const auto* g = std::get_if<GaussianParams>(&r)) {
        if (!std::isfinite(g->mean) || !(g->sd > 0.0) || !std::isfinite(g->sd)) {
            throw std::invalid_argument("gaussian regime needs a finite mean and sd > 0");
        }
    } else if (!(std::get<ExponentialParams>(r).rate > 0.0) ||
               !std::isfinite(std::get<ExponentialParams>(r).rate)) {
        throw std::invalid_argument("exponential regime needs rate > 0");
    }
}

double draw(const Regime& r, Xoshiro256& rng, std::normal_distribution<double>& normal) {
    if (const auto* g = std::get_if<GaussianParams>(&r)) {
        return g->mean + g->sd * normal(rng);
    }
    double x = 0.0;
    do {
        x = std::exponential_distribution<double>(std::get<ExponentialParams>(r).rate)(rng);
    } while (!(x > 0.0));
    return x;
}

// Detection time of one replication, or nullopt at the horizon.
std::optional<std::size_t> run_once(Detector& detector, StreamSampler& sampler, std::size_t horizon) {
    detector.reset();
    for (std::size_t t = 1; t <= horizon; ++t) {
        if (auto report = detector.step(sampler.next())) {
            return report->detection_time;
        }
    }
    return std::nullopt;
}

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "";
    }
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

std::string prior_label(const bayes::GammaRatePrior& p) {
    std::ostringstream s;
    s << "Gamma(" << p.alpha << "," << p.beta << ")";
    return s.str();
}

} // namespace

Family Scenario::family() const {
    return family_of_regime(pre);
}

void Scenario::validate() const {
    check_regime(pre);
    check_regime(post);
    if (family_of_regime(pre) != family_of_regime(post)) {
        throw std::invalid_argument("scenario mixes distribution families");
    }
    if (horizon <= tau) {
        throw std::invalid_argument("scenario horizon must exceed tau");
    }
    if (sampled_rates) {
        if (family() != Family::exponential || !sampled_rates->proper()) {
            throw std::invalid_argument("sampled rates need the exponential family and a proper Gamma");
        }
    }
}

StreamSampler::StreamSampler(const Scenario& scenario, Xoshiro256& rng)
    : scenario_(&scenario), rng_(&rng), pre_(scenario.pre), post_(scenario.post) {
    if (scenario.sampled_rates) {
        std::gamma_distribution<double> gamma(scenario.sampled_rates->alpha, 1.0 / scenario.sampled_rates->beta);
        pre_ = ExponentialParams{gamma(rng)};
        post_ = ExponentialParams{gamma(rng)};
    }
}

double StreamSampler::next() {
    ++t_;
    const bool changed = scenario_->tau > 0 && t_ > scenario_->tau;
    return draw(changed ? post_ : pre_, *rng_, normal_);
}

bool Estimate::imprecise() const {
    return count == 0 || !(se <= 0.02 * std::abs(mean));
}

Estimate estimate(const std::vector<double>& values) {
    Estimate e;
    e.count = values.size();
    if (values.empty()) {
        return e;
    }
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - e.mean) * (v - e.mean);
        const double n = static_cast<double>(values.size());
        e.se = std::sqrt(ss / (n - 1.0) / n);
    }
    return e;
}

double CampaignResult::truncation_fraction() const {
    return replications ? static_cast<double>(truncated) / static_cast<double>(replications) : 0.0;
}

double CampaignResult::false_positive_rate() const {
    return replications ? static_cast<double>(false_positives) / static_cast<double>(replications) : 0.0;
}

CampaignResult summarize(const std::vector<std::optional<std::size_t>>& times, std::size_t horizon,
                         std::size_t burn_in, std::size_t tau, std::uint64_t seed) {
    CampaignResult r;
    r.replications = times.size();
    r.seed = seed;
    r.horizon = horizon;
    r.burn_in = burn_in;
    r.tau = tau;
    std::vector<double> run_length, detection, delay;
    run_length.reserve(times.size());
    detection.reserve(times.size());
    delay.reserve(times.size());
    for (const auto& t : times) {
        const std::size_t T = t.value_or(horizon);
        if (!t) {
            ++r.truncated;
        }
        detection.push_back(static_cast<double>(T));
        run_length.push_back(static_cast<double>(T) - static_cast<double>(burn_in));
        if (tau > 0 && t && T <= tau) {
            ++r.false_positives;
        }
        if (T > tau) {
            delay.push_back(static_cast<double>(T - tau));
        }
    }
    r.run_length = estimate(run_length);
    r.detection_time = estimate(detection);
    r.delay = estimate(delay);
    return r;
}

std::optional<double> nominal_arl0(const DetectorConfig& config) {
    if (const auto* table = std::get_if<std::shared_ptr<const ThresholdTable>>(&config.threshold)) {
        return (*table)->arl0();
    }
    if (const auto* reg = std::get_if<RegressionThreshold>(&config.threshold)) {
        return 1.0 / reg->gamma;
    }
    return std::nullopt;
}

CampaignResult run_campaign(const DetectorConfig& config, const Scenario& scenario,
                            std::size_t replications, std::uint64_t seed, unsigned threads) {
    config.validate();
    scenario.validate();
    if (config.family() != scenario.family()) {
        throw std::invalid_argument("detector and scenario families differ");
    }
    if (replications == 0) {
        throw std::invalid_argument("replications must be positive");
    }
    std::vector<std::optional<std::size_t>> times(replications);
    parallel_blocks(replications, threads ? threads : default_thread_count(),
                    [&](std::size_t, std::size_t begin, std::size_t end) {
                        Detector detector(config);
                        for (std::size_t i = begin; i < end; ++i) {
                            Xoshiro256 rng = substream(seed, i);
                            StreamSampler sampler(scenario, rng);
                            times[i] = run_once(detector, sampler, scenario.horizon);
                        }
                    });
    return summarize(times, scenario.horizon, config.burn_in, scenario.tau, seed);
}

CampaignResult estimate_arl0(const DetectorConfig& config, std::size_t replications, std::uint64_t seed,
                             unsigned threads, std::optional<std::size_t> horizon) {
    if (replications < 1000) {
        throw std::invalid_argument("estimate_arl0 needs at least 1000 replications");
    }
    Scenario null;
    if (config.family() == Family::exponential) {
        null.pre = null.post = ExponentialParams{};
    }
    const double arl0 = nominal_arl0(config).value_or(500.0);
    null.horizon = horizon.value_or(config.burn_in + static_cast<std::size_t>(std::ceil(20.0 * arl0)));
    return run_campaign(config, null, replications, seed, threads);
}

const char* to_string(DelayGrid grid) noexcept {
    switch (grid) {
    case DelayGrid::mean:
        return "mean";
    case DelayGrid::variance:
        return "var";
    case DelayGrid::exponential:
        return "exp";
    }
    return "?";
}

std::vector<double> default_magnitudes(DelayGrid grid) {
    if (grid == DelayGrid::mean) {
        return {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
    }
    return {0.0, 1.5, 2.0, 2.5, 3.0, 0.67, 0.5, 0.4, 0.33};
}

Scenario delay_scenario(DelayGrid grid, std::size_t tau, double magnitude, std::size_t horizon) {
    Scenario s;
    s.horizon = horizon;
    s.tau = tau;
    switch (grid) {
    case DelayGrid::mean:
        s.post = GaussianParams{magnitude, 1.0};
        break;
    case DelayGrid::variance:
        if (magnitude != 0.0) {
            s.post = GaussianParams{0.0, magnitude};
        }
        break;
    case DelayGrid::exponential:
        s.pre = s.post = ExponentialParams{1.0};
        if (magnitude != 0.0) {
            s.post = ExponentialParams{magnitude};
        }
        break;
    }
    return s;
}

std::vector<DelayCell> delay_table(const DelayTableSpec& spec) {
    if (spec.replications == 0) {
        throw std::invalid_argument("replications must be positive");
    }
    const bool gaussian = spec.grid != DelayGrid::exponential;
    const DetectorConfig uncorrected =
        shipped_config(gaussian ? StatisticKind::hz_gaussian : StatisticKind::raw_exponential, spec.arl0);
    const DetectorConfig corrected = shipped_config(
        gaussian ? StatisticKind::corrected_gaussian : StatisticKind::corrected_exponential, spec.arl0);
    const std::vector<double> magnitudes = spec.magnitudes.empty() ? default_magnitudes(spec.grid) : spec.magnitudes;

    std::vector<DelayCell> cells;
    std::uint64_t label = 0;
    for (std::size_t tau : spec.taus) {
        for (double magnitude : magnitudes) {
            const std::size_t horizon =
                tau + corrected.burn_in + static_cast<std::size_t>(std::ceil(20.0 * spec.arl0));
            Scenario scenario = delay_scenario(spec.grid, tau, magnitude, horizon);
            const std::uint64_t cell_seed = derive_seed(spec.seed, label++);
            DelayCell cell;
            cell.tau = tau;
            cell.magnitude = magnitude;
            cell.uncorrected = run_campaign(uncorrected, scenario, spec.replications, cell_seed, spec.threads);
            cell.corrected = run_campaign(corrected, scenario, spec.replications, cell_seed, spec.threads);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::vector<BayesRow> bayes_comparison(const BayesComparisonSpec& spec) {
    spec.scenario.validate();
    if (spec.scenario.family() != Family::exponential) {
        throw std::invalid_argument("bayes comparison needs an exponential scenario");
    }
    if (spec.replications == 0) {
        throw std::invalid_argument("replications must be positive");
    }
    if (spec.levels.empty()) {
        throw std::invalid_argument("at least one detection level is required");
    }
    for (double c : spec.levels) {
        if (!(c > 0.0 && c < 1.0)) {
            throw std::invalid_argument("detection levels must lie in (0, 1)");
        }
    }
    const auto segments = bayes::SegmentLengthPrior::negative_binomial(spec.segment_mean, spec.segment_sd);
    const unsigned threads = spec.threads ? spec.threads : default_thread_count();
    const Scenario& scenario = spec.scenario;
    const std::size_t n = spec.replications;

    std::vector<BayesRow> rows;
    BayesRow freq;
    freq.method = "frequentist";
    freq.result = run_campaign(shipped_config(StatisticKind::corrected_exponential, spec.frequentist_arl0),
                               scenario, n, spec.seed, threads);
    rows.push_back(std::move(freq));

    const double lowest = *std::min_element(spec.levels.begin(), spec.levels.end());
    for (const auto& prior : spec.priors) {
        // times[level][rep]
        std::vector<std::vector<std::optional<std::size_t>>> times(spec.levels.size(),
                                                                   std::vector<std::optional<std::size_t>>(n));
        parallel_blocks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                Xoshiro256 rng = substream(spec.seed, i);
                StreamSampler sampler(scenario, rng);
                bayes::BayesFilter filter(segments, prior);
                for (std::size_t t = 1; t <= scenario.horizon; ++t) {
                    filter.step(sampler.next());
                    const double p = filter.prob_no_change();
                    for (std::size_t l = 0; l < spec.levels.size(); ++l) {
                        if (!times[l][i] && p < spec.levels[l]) {
                            times[l][i] = t;
                        }
                    }
                    if (p < lowest) {
                        break;
                    }
                }
            }
        });
        for (std::size_t l = 0; l < spec.levels.size(); ++l) {
            BayesRow row;
            row.method = "bayes";
            row.prior = prior;
            row.c = spec.levels[l];
            row.result = summarize(times[l], scenario.horizon, 0, scenario.tau, spec.seed);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

BayesComparisonSpec bayes_example_x() {
    BayesComparisonSpec spec;
    spec.scenario.pre = ExponentialParams{1.0};
    spec.scenario.post = ExponentialParams{3.0};
    spec.scenario.tau = 50;
    spec.scenario.horizon = 2000;
    spec.priors = {{1.0, 1.0}, {0.1, 0.1}, {0.01, 0.01}, bayes::GammaRatePrior::jeffreys()};
    return spec;
}

BayesComparisonSpec bayes_example_y() {
    BayesComparisonSpec spec;
    spec.scenario.pre = ExponentialParams{5.0};
    spec.scenario.post = ExponentialParams{10.0};
    spec.scenario.tau = 50;
    spec.scenario.horizon = 2000;
    spec.priors = {{1.0, 1.0}, {0.01, 0.01}, {22.5, 3.0}};
    return spec;
}

BayesComparisonSpec prior_sampled_example() {
    BayesComparisonSpec spec;
    spec.scenario.pre = spec.scenario.post = ExponentialParams{7.5};
    spec.scenario.tau = 50;
    spec.scenario.horizon = 2000;
    spec.scenario.sampled_rates = bayes::GammaRatePrior{22.5, 3.0};
    spec.priors = {{22.5, 3.0}};
    return spec;
}

void write_delay_csv(std::ostream& out, DelayGrid grid, const std::vector<DelayCell>& cells) {
    const bool gaussian = grid != DelayGrid::exponential;
    const char* magnitude = grid == DelayGrid::mean ? "mu1" : grid == DelayGrid::variance ? "sigma1" : "delta";
    const char* unc = gaussian ? "H" : "M";
    const char* cor = grid == DelayGrid::mean ? "Dc" : grid == DelayGrid::variance ? "Hc" : "Mc";
    out << "tau," << magnitude << ',' << unc << ',' << unc << "_se," << cor << ',' << cor
        << "_se,replications,truncated_" << unc << ",truncated_" << cor << ",flagged\n";
    for (const auto& c : cells) {
        const bool flagged = c.uncorrected.delay.imprecise() || c.corrected.delay.imprecise();
        out << c.tau << ',' << format_number(c.magnitude) << ',' << format_number(c.uncorrected.delay.mean) << ','
            << format_number(c.uncorrected.delay.se) << ',' << format_number(c.corrected.delay.mean) << ','
            << format_number(c.corrected.delay.se) << ',' << c.corrected.replications << ','
            << c.uncorrected.truncated << ',' << c.corrected.truncated << ',' << (flagged ? 1 : 0) << '\n';
    }
}

void write_bayes_csv(std::ostream& out, const std::vector<BayesRow>& rows) {
    out << "method,prior,c,fps,fps_se,delay,delay_se,time,detections,truncated,replications\n";
    for (const auto& r : rows) {
        const double fp = r.result.false_positive_rate();
        const double fp_se = std::sqrt(fp * (1.0 - fp) / static_cast<double>(std::max<std::size_t>(1, r.result.replications)));
        // Runs that never signal carry no delay.
        const bool no_detections = r.result.truncated == r.result.replications;
        out << r.method << ',' << (r.prior ? prior_label(*r.prior) : "") << ','
            << (r.c ? format_number(*r.c) : "") << ',' << format_number(fp) << ',' << format_number(fp_se) << ','
            << (no_detections ? "" : format_number(r.result.delay.mean)) << ','
            << (no_detections ? "" : format_number(r.result.delay.se)) << ','
            << (no_detections ? "" : format_number(r.result.delay.mean + static_cast<double>(r.result.tau))) << ','
            << (r.result.replications - r.result.truncated) << ',' << r.result.truncated << ','
            << r.result.replications << '\n';
    }
}

nlohmann::json to_json(const Estimate& e) {
    nlohmann::json j;
    j["mean"] = std::isnan(e.mean) ? nlohmann::json() : nlohmann::json(e.mean);
    j["se"] = std::isnan(e.se) ? nlohmann::json() : nlohmann::json(e.se);
    j["count"] = e.count;
    return j;
}

nlohmann::json to_json(const CampaignResult& r) {
    return {{"replications", r.replications},
            {"seed", r.seed},
            {"horizon", r.horizon},
            {"burn_in", r.burn_in},
            {"tau", r.tau},
            {"truncated", r.truncated},
            {"truncation_fraction", r.truncation_fraction()},
            {"false_positives", r.false_positives},
            {"run_length", to_json(r.run_length)},
            {"detection_time", to_json(r.detection_time)},
            {"delay", to_json(r.delay)}};
}

nlohmann::json to_json(DelayGrid grid, const std::vector<DelayCell>& cells) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& c : cells) {
        out.push_back({{"grid", to_string(grid)},
                       {"tau", c.tau},
                       {"magnitude", c.magnitude},
                       {"flagged", c.uncorrected.delay.imprecise() || c.corrected.delay.imprecise()},
                       {"uncorrected", to_json(c.uncorrected)},
                       {"corrected", to_json(c.corrected)}});
    }
    return out;
}

nlohmann::json to_json(const std::vector<BayesRow>& rows) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& r : rows) {
        nlohmann::json j = {{"method", r.method}, {"result", to_json(r.result)}};
        j["prior"] = r.prior ? nlohmann::json{{"alpha", r.prior->alpha}, {"beta", r.prior->beta}} : nlohmann::json();
        j["c"] = r.c ? nlohmann::json(*r.c) : nlohmann::json();
        j["false_positive_rate"] = r.result.false_positive_rate();
        j["detections"] = r.result.replications - r.result.truncated;
        out.push_back(std::move(j));
    }
    return out;
}

} // namespace cpmon::harness
