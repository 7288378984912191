#include "cpmon/cli.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/harness.hpp"
#include "cpmon/monitor.hpp"
#include "cpmon/parallel.hpp"
#include "cpmon/thresholds.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

namespace cpmon::cli {
namespace {

using nlohmann::json;

constexpr const char* kVersion = "0.1.0";

// Flag errors detected after CLI11 parsing.
struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

StatisticKind resolve_kind(const std::string& family, const std::string& statistic) {
    if (family == "gaussian") {
        if (statistic == "corrected") return StatisticKind::corrected_gaussian;
        if (statistic == "hz") return StatisticKind::hz_gaussian;
        throw UsageError("--statistic " + statistic +
                         " is not available for the gaussian family (use corrected or hz)");
    }
    if (statistic == "corrected") return StatisticKind::corrected_exponential;
    if (statistic == "raw") return StatisticKind::raw_exponential;
    throw UsageError("--statistic " + statistic +
                     " is not available for the exponential family (use corrected or raw)");
}

// Opened output: a file or the caller's stream.
class Output {
public:
    Output(const std::string& path, std::ostream& fallback) {
        if (path == "-") {
            stream_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw UsageError("cannot open output file " + path);
            }
            stream_ = file_.get();
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

std::optional<double> parse_observation(std::string_view line) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return std::nullopt;
    }
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    if (!line.empty() && line.front() == '+') {
        line.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
        throw InputError("cannot parse '" + std::string(line) + "' as a number");
    }
    return value;
}

json report_json(const DetectionReport& r) {
    return {{"detection_time", r.detection_time},
            {"tau_hat", r.tau_hat},
            {"statistic", r.statistic},
            {"threshold", r.threshold}};
}

struct DetectOptions {
    std::string family = "gaussian";
    std::string statistic = "corrected";
    std::optional<double> arl0;
    std::string threshold_file;
    bool regression = false;
    std::optional<double> fixed_threshold;
    std::optional<std::size_t> window;
    std::size_t burn_in = 20;
    bool multi = false;
    std::string input = "-";
    std::string output = "-";
};

int cmd_detect(const DetectOptions& o, std::istream& in, std::ostream& out, std::ostream& err) {
    const StatisticKind kind = resolve_kind(o.family, o.statistic);
    DetectorConfig config;
    config.statistic = kind;
    config.window = o.window;
    config.burn_in = o.burn_in;
    config.multi_change = o.multi;
    json threshold;
    const int sources = (o.arl0 ? 1 : 0) + (!o.threshold_file.empty() ? 1 : 0) + (o.fixed_threshold ? 1 : 0);
    if (sources > 1) {
        throw UsageError("--arl0, --threshold-file and --fixed-threshold are mutually exclusive");
    }
    if (!o.threshold_file.empty()) {
        std::ifstream file(o.threshold_file);
        if (!file) {
            throw UsageError("cannot open threshold file " + o.threshold_file);
        }
        auto table = std::make_shared<const ThresholdTable>(ThresholdTable::read_csv(file));
        config.threshold = table;
        threshold = {{"file", o.threshold_file}, {"arl0", table->arl0()}};
    } else if (o.fixed_threshold) {
        err << "warning: a fixed threshold gives no control over the false alarm rate\n";
        config.threshold = FixedThreshold{*o.fixed_threshold};
        threshold = {{"fixed", *o.fixed_threshold}};
    } else {
        const double arl0 = o.arl0.value_or(500.0);
        if (o.regression) {
            if (kind != StatisticKind::corrected_gaussian) {
                throw UsageError("--regression applies to the corrected gaussian statistic only");
            }
            config.threshold = RegressionThreshold{1.0 / arl0};
            threshold = {{"regression", true}, {"arl0", arl0}};
        } else {
            const DetectorConfig shipped = shipped_config(kind, arl0);
            config.threshold = shipped.threshold;
            threshold = {{"shipped", true}, {"arl0", arl0}};
        }
    }
    config.validate();

    std::unique_ptr<std::ifstream> file;
    std::istream* input = &in;
    if (o.input != "-") {
        file = std::make_unique<std::ifstream>(o.input);
        if (!*file) {
            throw UsageError("cannot open input file " + o.input);
        }
        input = file.get();
    }
    Output output(o.output, out);
    std::ostream& sink = output.get();

    const json manifest = {{"subcommand", "detect"},
                           {"version", kVersion},
                           {"input", o.input},
                           {"output", o.output},
                           {"config",
                            {{"family", o.family},
                             {"statistic", to_string(kind)},
                             {"threshold", threshold},
                             {"window", o.window ? json(*o.window) : json()},
                             {"burn_in", o.burn_in},
                             {"multi", o.multi}}}};
    sink << "# " << manifest.dump() << '\n' << std::flush;

    StreamMonitor monitor(config);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(*input, line)) {
        ++line_number;
        try {
            const auto value = parse_observation(line);
            if (!value) {
                continue;
            }
            for (const auto& report : monitor.push(*value)) {
                sink << report_json(report).dump() << '\n' << std::flush;
            }
        } catch (const InputError& e) {
            err << "error: line " << line_number << ": " << e.what() << '\n';
            return kExitInput;
        }
        if (monitor.finished()) {
            break;
        }
    }
    return kExitOk;
}

struct CalibrateOptions {
    std::string family = "gaussian";
    std::string statistic = "corrected";
    double arl0 = 500.0;
    std::size_t reps = 200'000;
    std::size_t tmax = 800;
    std::uint64_t seed = 1;
    double smoothing = 0.3;
    unsigned threads = 0;
    std::string output = "-";
};

int cmd_calibrate(const CalibrateOptions& o, std::ostream& out, std::ostream& err) {
    const StatisticKind kind = resolve_kind(o.family, o.statistic);
    CalibrationPlan plan;
    plan.replications = o.reps;
    plan.t_max = o.tmax;
    plan.gamma = 1.0 / o.arl0;
    plan.seed = o.seed;
    plan.smoothing_weight = o.smoothing;
    plan.threads = o.threads;
    for (const auto& w : plan.warnings()) {
        err << "warning: " << w << '\n';
    }
    Calibration result = calibrate(plan, kind);
    const json manifest = {{"subcommand", "calibrate"},
                           {"version", kVersion},
                           {"output", o.output},
                           {"config",
                            {{"family", o.family},
                             {"statistic", to_string(kind)},
                             {"arl0", o.arl0},
                             {"replications", o.reps},
                             {"t_max", o.tmax},
                             {"smoothing_weight", o.smoothing}}},
                           {"seed", o.seed}};
    Output output(o.output, out);
    result.table.write_csv(output.get(), {{"manifest", manifest.dump()}});
    return kExitOk;
}

struct BenchmarkOptions {
    std::string table;
    std::size_t reps = 20'000;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    double arl0 = 500.0;
    std::vector<std::size_t> taus;
    std::vector<double> magnitudes;
    std::string scenario = "x";
    std::string format = "csv";
    std::string output = "-";
};

int cmd_benchmark(const BenchmarkOptions& o, std::ostream& out) {
    json manifest = {{"subcommand", "benchmark"},
                     {"version", kVersion},
                     {"output", o.output},
                     {"config", {{"table", o.table}, {"replications", o.reps}}},
                     {"seed", o.seed}};
    json results;
    std::ostringstream csv;
    if (o.table == "mean" || o.table == "var" || o.table == "exp") {
        harness::DelayTableSpec spec;
        spec.grid = o.table == "mean"  ? harness::DelayGrid::mean
                    : o.table == "var" ? harness::DelayGrid::variance
                                       : harness::DelayGrid::exponential;
        if (!o.taus.empty()) spec.taus = o.taus;
        spec.magnitudes = o.magnitudes;
        spec.arl0 = o.arl0;
        spec.replications = o.reps;
        spec.seed = o.seed;
        spec.threads = o.threads;
        manifest["config"]["arl0"] = o.arl0;
        manifest["config"]["taus"] = spec.taus;
        const auto cells = harness::delay_table(spec);
        harness::write_delay_csv(csv, spec.grid, cells);
        results = harness::to_json(spec.grid, cells);
    } else {
        harness::BayesComparisonSpec spec;
        if (o.table == "prior-sampled") {
            spec = harness::prior_sampled_example();
        } else if (o.scenario == "x") {
            spec = harness::bayes_example_x();
        } else if (o.scenario == "y") {
            spec = harness::bayes_example_y();
        } else {
            throw UsageError("--scenario must be x or y");
        }
        if (o.table == "bayes") {
            manifest["config"]["scenario"] = o.scenario;
        }
        spec.replications = o.reps;
        spec.seed = o.seed;
        spec.threads = o.threads;
        const auto rows = harness::bayes_comparison(spec);
        harness::write_bayes_csv(csv, rows);
        results = harness::to_json(rows);
    }
    Output output(o.output, out);
    if (o.format == "json") {
        output.get() << json{{"manifest", manifest}, {"results", results}}.dump(2) << '\n';
    } else {
        output.get() << "# manifest=" << manifest.dump() << '\n' << csv.str();
    }
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Sequential change point monitoring with finite-sample corrected GLR statistics", "cpmon"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    const std::vector<std::string> families{"gaussian", "exponential"};
    const std::vector<std::string> statistics{"corrected", "hz", "raw"};

    DetectOptions d;
    auto* detect = app.add_subcommand("detect", "Monitor a stream of observations, one per line");
    detect->add_option("--family", d.family, "Distribution family")->check(CLI::IsMember(families));
    detect->add_option("--statistic", d.statistic, "corrected, hz (gaussian) or raw (exponential)")
        ->check(CLI::IsMember(statistics));
    detect->add_option("--arl0", d.arl0, "Target in-control ARL0 of a shipped table (default 500)")
        ->check(CLI::PositiveNumber);
    detect->add_option("--threshold-file", d.threshold_file, "Threshold CSV written by `calibrate`");
    detect->add_flag("--regression", d.regression, "Closed-form thresholds for the corrected gaussian statistic");
    detect->add_option("--fixed-threshold", d.fixed_threshold, "Constant threshold (no ARL0 guarantee)")
        ->check(CLI::NonNegativeNumber);
    detect->add_option("--window", d.window, "Keep only the W most recent split points")
        ->check(CLI::Range(std::size_t{8}, std::numeric_limits<std::size_t>::max()));
    detect->add_option("--burn-in", d.burn_in, "Observations before the first decision");
    detect->add_flag("--multi", d.multi, "Restart after each detection");
    detect->add_option("--input", d.input, "Input file, or - for stdin");
    detect->add_option("--output", d.output, "Output file, or - for stdout");

    CalibrateOptions c;
    auto* cal = app.add_subcommand("calibrate", "Simulate a threshold table");
    cal->add_option("--family", c.family, "Distribution family")->check(CLI::IsMember(families));
    cal->add_option("--statistic", c.statistic, "Statistic")->check(CLI::IsMember(statistics));
    cal->add_option("--arl0", c.arl0, "Target ARL0")->check(CLI::Range(1.0, 1e12));
    cal->add_option("--reps", c.reps, "Replications")->check(CLI::PositiveNumber);
    cal->add_option("--tmax", c.tmax, "Last tabulated time step")->check(CLI::PositiveNumber);
    cal->add_option("--seed", c.seed, "Random seed");
    cal->add_option("--smoothing", c.smoothing, "Exponential smoothing weight")->check(CLI::Range(0.0, 1.0));
    cal->add_option("--threads", c.threads, "Worker threads (default CPMON_THREADS or all cores)");
    cal->add_option("--output", c.output, "Output CSV, or - for stdout");

    BenchmarkOptions b;
    auto* bench = app.add_subcommand("benchmark", "Reproduce delay and false-positive tables");
    bench->add_option("--table", b.table, "mean, var, exp, bayes or prior-sampled")
        ->required()
        ->check(CLI::IsMember({"mean", "var", "exp", "bayes", "prior-sampled"}));
    bench->add_option("--reps", b.reps, "Replications per cell")->check(CLI::PositiveNumber);
    bench->add_option("--seed", b.seed, "Random seed");
    bench->add_option("--threads", b.threads, "Worker threads (default CPMON_THREADS or all cores)");
    bench->add_option("--arl0", b.arl0, "ARL0 of the shipped tables (delay tables)");
    bench->add_option("--tau", b.taus, "Change locations (delay tables)");
    bench->add_option("--magnitude", b.magnitudes, "Change magnitudes (delay tables)");
    bench->add_option("--scenario", b.scenario, "x: Exp(1)->Exp(3), y: Exp(5)->Exp(10) (bayes table)")
        ->check(CLI::IsMember({"x", "y"}));
    bench->add_option("--format", b.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    bench->add_option("--output", b.output, "Output file, or - for stdout");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    try {
        if (detect->parsed()) {
            return cmd_detect(d, in, out, err);
        }
        if (cal->parsed()) {
            return cmd_calibrate(c, out, err);
        }
        return cmd_benchmark(b, out);
    } catch (const CalibrationExhausted& e) {
        err << "error: " << e.what() << '\n';
        return kExitExhausted;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

} // namespace cpmon::cli
