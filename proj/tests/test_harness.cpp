#include "catch_amalgamated.hpp"

#include "cpmon/harness.hpp"
#include "cpmon/random.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::StartsWith;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using namespace cpmon;
using namespace cpmon::harness;

namespace {

std::string first_line(const std::string& s, std::size_t skip = 0) {
    std::istringstream in(s);
    std::string line;
    for (std::size_t i = 0; i <= skip; ++i) std::getline(in, line);
    return line;
}

} // namespace

TEST_CASE("estimate mean and standard error", "[harness]") {
    const auto e = estimate({1.0, 2.0, 3.0, 4.0});
    CHECK(e.count == 4);
    CHECK_THAT(e.mean, WithinAbs(2.5, 1e-15));
    CHECK_THAT(e.se, WithinRel(std::sqrt(5.0 / 3.0) / 2.0, 1e-14));
    CHECK(e.imprecise());
    CHECK(estimate({}).imprecise());
    CHECK_FALSE(estimate({100.0, 100.0, 101.0, 99.0}).imprecise());
}

TEST_CASE("summarize counts truncation and false positives", "[harness]") {
    const std::vector<std::optional<std::size_t>> times{30, 60, std::nullopt, 45, 51};
    const auto r = summarize(times, 100, 20, 50, 7);
    CHECK(r.replications == 5);
    CHECK(r.seed == 7);
    CHECK(r.truncated == 1);
    CHECK(r.false_positives == 2);
    CHECK_THAT(r.truncation_fraction(), WithinAbs(0.2, 1e-15));
    CHECK_THAT(r.false_positive_rate(), WithinAbs(0.4, 1e-15));
    CHECK_THAT(r.detection_time.mean, WithinAbs((30 + 60 + 100 + 45 + 51) / 5.0, 1e-12));
    CHECK_THAT(r.run_length.mean, WithinAbs((30 + 60 + 100 + 45 + 51) / 5.0 - 20.0, 1e-12));
    CHECK(r.delay.count == 3);
    CHECK_THAT(r.delay.mean, WithinAbs((10.0 + 50.0 + 1.0) / 3.0, 1e-12));
}

TEST_CASE("scenario validation", "[harness][edge]") {
    Scenario s;
    CHECK_NOTHROW(s.validate());
    s.post = ExponentialParams{1.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.pre = ExponentialParams{0.0};
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    s.pre = ExponentialParams{2.0};
    s.tau = 50;
    s.horizon = 50;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);
    Scenario g;
    g.pre = GaussianParams{0.0, -1.0};
    CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("sampler switches regime after tau", "[harness]") {
    Scenario s;
    s.pre = GaussianParams{0.0, 1e-9};
    s.post = GaussianParams{5.0, 1e-9};
    s.tau = 3;
    Xoshiro256 rng(1);
    StreamSampler sampler(s, rng);
    for (int i = 0; i < 3; ++i) CHECK_THAT(sampler.next(), WithinAbs(0.0, 1e-6));
    for (int i = 0; i < 3; ++i) CHECK_THAT(sampler.next(), WithinAbs(5.0, 1e-6));
}

TEST_CASE("campaigns are reproducible and thread independent", "[harness]") {
    const auto config = shipped_config(StatisticKind::corrected_gaussian, 100);
    const auto s = delay_scenario(DelayGrid::mean, 25, 1.0, 800);
    const auto a = run_campaign(config, s, 300, 11, 1);
    const auto b = run_campaign(config, s, 300, 11, 3);
    CHECK(to_json(a) == to_json(b));
    const auto c = run_campaign(config, s, 300, 12, 1);
    CHECK(to_json(a) != to_json(c));
}

TEST_CASE("infinite fixed threshold truncates every run", "[harness][edge]") {
    DetectorConfig config;
    config.threshold = FixedThreshold{std::numeric_limits<double>::infinity()};
    const auto r = estimate_arl0(config, 1000, 3, 0, 200);
    CHECK(r.truncated == 1000);
    CHECK(r.truncation_fraction() == 1.0);
    CHECK_THAT(r.detection_time.mean, WithinAbs(200.0, 0.0));
    CHECK(r.detection_time.se == 0.0);
}

TEST_CASE("estimate_arl0 requires enough replications", "[harness][edge]") {
    CHECK_THROWS_AS(estimate_arl0(shipped_config(StatisticKind::corrected_gaussian, 500), 999, 1),
                    std::invalid_argument);
}

TEST_CASE("nominal ARL0 follows the threshold source", "[harness]") {
    CHECK(nominal_arl0(shipped_config(StatisticKind::corrected_exponential, 370)) == 370.0);
    DetectorConfig reg;
    reg.threshold = RegressionThreshold{0.01};
    CHECK_THAT(*nominal_arl0(reg), WithinRel(100.0, 1e-12));
    DetectorConfig fixed;
    fixed.threshold = FixedThreshold{3.0};
    CHECK_FALSE(nominal_arl0(fixed).has_value());
}

TEST_CASE("delay scenarios", "[harness]") {
    const auto m = delay_scenario(DelayGrid::mean, 100, 1.5, 5000);
    CHECK(m.tau == 100);
    CHECK(std::get<GaussianParams>(m.post).mean == 1.5);
    const auto v = delay_scenario(DelayGrid::variance, 25, 2.0, 5000);
    CHECK(std::get<GaussianParams>(v.post).sd == 2.0);
    const auto e = delay_scenario(DelayGrid::exponential, 25, 3.0, 5000);
    CHECK(e.family() == Family::exponential);
    const auto none = delay_scenario(DelayGrid::exponential, 25, 0.0, 5000);
    CHECK(std::get<ExponentialParams>(none.post).rate == std::get<ExponentialParams>(none.pre).rate);
    CHECK(default_magnitudes(DelayGrid::mean).size() == 9);
    CHECK(default_magnitudes(DelayGrid::variance).front() == 0.0);
}

TEST_CASE("delay table output formats", "[harness]") {
    DelayTableSpec spec;
    spec.grid = DelayGrid::variance;
    spec.taus = {25};
    spec.magnitudes = {3.0};
    spec.replications = 200;
    spec.threads = 1;
    const auto cells = delay_table(spec);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0].corrected.replications == 200);
    // a large variance jump is found quickly by both statistics
    CHECK(cells[0].corrected.delay.mean < 40.0);
    CHECK(cells[0].uncorrected.delay.mean < 40.0);

    std::ostringstream csv;
    write_delay_csv(csv, spec.grid, cells);
    CHECK_THAT(first_line(csv.str()), StartsWith("tau,sigma1,H,H_se,Hc,Hc_se,replications"));
    CHECK_THAT(first_line(csv.str(), 1), StartsWith("25,3"));

    const auto j = to_json(spec.grid, cells);
    CHECK(j.dump().find("\"grid\"") != std::string::npos);
}

TEST_CASE("Bayes comparison rows", "[harness]") {
    auto spec = bayes_example_x();
    CHECK(spec.scenario.tau == 50);
    CHECK(spec.priors.size() == 4);
    spec.priors = {{1.0, 1.0}, bayes::GammaRatePrior::jeffreys()};
    spec.levels = {0.6};
    spec.replications = 100;
    spec.threads = 1;
    const auto rows = bayes_comparison(spec);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].method == "frequentist");
    CHECK(rows[1].c == 0.6);
    CHECK(rows[1].result.delay.count > 0);
    CHECK(rows[2].result.truncated == 100);
    CHECK(rows[2].result.false_positives == 0);

    std::ostringstream csv;
    write_bayes_csv(csv, rows);
    CHECK(first_line(csv.str()) == "method,prior,c,fps,fps_se,delay,delay_se,time,detections,truncated,replications");
    CHECK_THAT(first_line(csv.str(), 3), ContainsSubstring(",,,,0,"));
    CHECK(to_json(rows).size() == 3);
}
