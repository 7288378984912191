#include "cpmon/thresholds.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/parallel.hpp"
#include "cpmon/random.hpp"
#include "cpmon/statistic_eval.hpp"
#include "cpmon/stream_stats.hpp"
#include "shipped_tables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string_view>

namespace cpmon {
namespace {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <class T>
bool parse_number(std::string_view text, T& out) {
    text = trim(text);
    const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

[[noreturn]] void malformed(std::size_t line_no, const std::string& what) {
    throw std::invalid_argument("threshold table line " + std::to_string(line_no) + ": " + what);
}

} // namespace

ThresholdTable::ThresholdTable(StatisticKind kind, double arl0, std::size_t start_t,
                               std::vector<ThresholdEntry> entries)
    : kind_(kind), arl0_(arl0), start_t_(start_t), entries_(std::move(entries)) {
    if (!(arl0_ >= 1.0) || !std::isfinite(arl0_)) {
        throw std::invalid_argument("threshold table: arl0 must be finite and >= 1");
    }
    if (entries_.empty()) {
        throw std::invalid_argument("threshold table: no entries");
    }
    if (entries_.front().t != start_t_) {
        throw std::invalid_argument("threshold table: first entry t=" +
                                    std::to_string(entries_.front().t) + " differs from start_t=" +
                                    std::to_string(start_t_));
    }
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (!(entries_[i].h > 0.0)) {
            throw std::invalid_argument("threshold table: h must be positive at t=" +
                                        std::to_string(entries_[i].t));
        }
        if (i > 0 && entries_[i].t <= entries_[i - 1].t) {
            throw std::invalid_argument("threshold table: t must be strictly increasing");
        }
    }
}

double ThresholdTable::lookup(std::size_t t) const {
    if (t < start_t_) {
        throw DomainError("threshold lookup at t=" + std::to_string(t) +
                          " before monitoring starts at t=" + std::to_string(start_t_));
    }
    auto it = std::upper_bound(entries_.begin(), entries_.end(), t,
                               [](std::size_t value, const ThresholdEntry& e) { return value < e.t; });
    return std::prev(it)->h;
}

void ThresholdTable::write_csv(std::ostream& out, const std::map<std::string, std::string>& extra) const {
    out << "# statistic=" << to_string(kind_) << '\n';
    out << "# arl0=" << format_double(arl0_) << '\n';
    out << "# start_t=" << start_t_ << '\n';
    for (const auto& [key, value] : extra) {
        out << "# " << key << '=' << value << '\n';
    }
    out << "t,h\n";
    for (const auto& e : entries_) {
        out << e.t << ',' << format_double(e.h) << '\n';
    }
}

ThresholdTable ThresholdTable::read_csv(std::istream& in) {
    std::optional<StatisticKind> kind;
    std::optional<double> arl0;
    std::optional<std::size_t> start_t;
    std::vector<ThresholdEntry> entries;
    bool header_seen = false;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty()) {
            continue;
        }
        if (view.front() == '#') {
            view = trim(view.substr(1));
            const auto eq = view.find('=');
            if (eq == std::string_view::npos) {
                continue;
            }
            const std::string_view key = trim(view.substr(0, eq));
            const std::string_view value = trim(view.substr(eq + 1));
            if (key == "statistic") {
                try {
                    kind = parse_statistic_kind(value);
                } catch (const std::invalid_argument& e) {
                    malformed(line_no, e.what());
                }
            } else if (key == "arl0") {
                double v = 0.0;
                if (!parse_number(value, v)) malformed(line_no, "arl0 is not a number");
                arl0 = v;
            } else if (key == "start_t") {
                std::size_t v = 0;
                if (!parse_number(value, v)) malformed(line_no, "start_t is not an integer");
                start_t = v;
            }
            continue;
        }
        if (!header_seen) {
            if (view != "t,h") malformed(line_no, "expected header 't,h'");
            header_seen = true;
            continue;
        }
        const auto comma = view.find(',');
        if (comma == std::string_view::npos) malformed(line_no, "expected 't,h'");
        ThresholdEntry e;
        if (!parse_number(view.substr(0, comma), e.t)) malformed(line_no, "t is not an integer");
        if (!parse_number(view.substr(comma + 1), e.h)) malformed(line_no, "h is not a number");
        entries.push_back(e);
    }
    if (!kind) throw std::invalid_argument("threshold table: missing '# statistic=' line");
    if (!arl0) throw std::invalid_argument("threshold table: missing '# arl0=' line");
    if (entries.empty()) throw std::invalid_argument("threshold table: no rows");
    return ThresholdTable(*kind, *arl0, start_t.value_or(entries.front().t), std::move(entries));
}

namespace {

std::vector<ThresholdTable> load_embedded(std::string_view prefix) {
    std::vector<ThresholdTable> out;
    for (const auto& csv : detail::shipped_table_sources()) {
        if (csv.name.starts_with(prefix)) {
            std::istringstream in{std::string(csv.content)};
            out.push_back(ThresholdTable::read_csv(in));
        }
    }
    return out;
}

const ThresholdTable& find_table(const std::vector<ThresholdTable>& tables, const char* what,
                                 StatisticKind kind, double arl0) {
    for (const auto& table : tables) {
        if (table.kind() == kind && std::abs(table.arl0() - arl0) < 1e-9) {
            return table;
        }
    }
    std::string available;
    for (const auto& table : tables) {
        if (table.kind() == kind) {
            available += (available.empty() ? "" : ", ") + format_double(table.arl0());
        }
    }
    throw std::invalid_argument("no " + std::string(what) + " " + std::string(to_string(kind)) +
                                " table for arl0=" + format_double(arl0) +
                                (available.empty() ? "" : " (available: " + available + ")"));
}

} // namespace

const std::vector<ThresholdTable>& shipped_tables() {
    static const std::vector<ThresholdTable> tables = load_embedded("thresholds/");
    return tables;
}

const ThresholdTable& shipped_table(StatisticKind kind, double arl0) {
    return find_table(shipped_tables(), "shipped", kind, arl0);
}

const std::vector<ThresholdTable>& published_tables() {
    static const std::vector<ThresholdTable> tables = load_embedded("published/");
    return tables;
}

const ThresholdTable& published_table(StatisticKind kind, double arl0) {
    return find_table(published_tables(), "published", kind, arl0);
}

double regression_h(double gamma, std::size_t t) {
    if (t <= 7) {
        throw DomainError("regression_h: t must exceed 7");
    }
    if (!(gamma > 0.0 && gamma < 1.0)) {
        throw DomainError("regression_h: gamma must lie in (0, 1)");
    }
    const double lg = std::log(gamma);
    return 1.51 - 2.39 * lg + (3.65 + 0.76 * lg) / std::sqrt(static_cast<double>(t - 7));
}

std::vector<std::string> CalibrationPlan::warnings() const {
    std::vector<std::string> out;
    if (gamma > 0.0 && static_cast<double>(replications) < 10.0 / gamma) {
        out.push_back("replications (" + std::to_string(replications) +
                      ") below the recommended 10 x ARL0 (" + format_double(10.0 / gamma) + ")");
    }
    return out;
}

std::vector<double> smooth_thresholds(const std::vector<double>& raw, double weight) {
    std::vector<double> out;
    out.reserve(raw.size());
    for (double h : raw) {
        out.push_back(out.empty() ? h : (1.0 - weight) * out.back() + weight * h);
    }
    return out;
}

namespace {

struct NullStream {
    Xoshiro256 rng;
    CandidateSet candidates;
    std::normal_distribution<double> normal{0.0, 1.0};
};

void validate_plan(const CalibrationPlan& plan, StatisticKind kind) {
    if (!(plan.gamma > 0.0 && plan.gamma <= 1.0)) {
        throw std::invalid_argument("calibration: gamma must lie in (0, 1]");
    }
    if (plan.replications == 0) {
        throw std::invalid_argument("calibration: replications must be positive");
    }
    if (!(plan.smoothing_weight > 0.0 && plan.smoothing_weight <= 1.0)) {
        throw std::invalid_argument("calibration: smoothing weight must lie in (0, 1]");
    }
    const std::size_t earliest = 2 * min_segment(family_of(kind));
    if (plan.start_t < earliest) {
        throw std::invalid_argument("calibration: start_t must be at least " + std::to_string(earliest));
    }
    if (plan.t_max < plan.start_t) {
        throw std::invalid_argument("calibration: t_max must be >= start_t");
    }
}

} // namespace

Calibration calibrate(const CalibrationPlan& plan, StatisticKind kind) {
    validate_plan(plan, kind);
    const Family family = family_of(kind);
    const unsigned threads = plan.threads == 0 ? default_thread_count() : plan.threads;
    const double needed = 1.0 / plan.gamma;

    StatisticEvaluator evaluator(kind);
    evaluator.reserve(plan.t_max);

    std::vector<NullStream> alive;
    alive.reserve(plan.replications);
    for (std::size_t i = 0; i < plan.replications; ++i) {
        alive.push_back({substream(plan.seed, i), CandidateSet(min_segment(family)), {}});
    }
    std::vector<double> values;
    std::vector<double> scratch;
    std::vector<double> raw;
    std::vector<std::size_t> survivors;

    for (std::size_t t = 1; t <= plan.t_max; ++t) {
        const bool monitored = t >= plan.start_t;
        values.assign(alive.size(), 0.0);
        parallel_blocks(alive.size(), threads, [&](std::size_t, std::size_t begin, std::size_t end) {
            std::exponential_distribution<double> exponential(1.0);
            for (std::size_t i = begin; i < end; ++i) {
                NullStream& s = alive[i];
                const double x = family == Family::gaussian ? s.normal(s.rng) : exponential(s.rng);
                s.candidates.push(x);
                if (monitored) {
                    values[i] = evaluator(s.candidates).value;
                }
            }
        });
        if (!monitored) {
            continue;
        }
        if (static_cast<double>(alive.size()) < needed) {
            throw CalibrationExhausted(
                "calibration exhausted at t=" + std::to_string(t) + ": " +
                std::to_string(alive.size()) + " surviving streams, need at least " +
                format_double(needed) + "; increase the number of replications");
        }
        const auto n = alive.size();
        const auto rank = static_cast<std::size_t>(
            std::ceil((1.0 - plan.gamma) * static_cast<double>(n) - 1e-9));
        scratch = values;
        double h;
        if (rank == 0) {
            h = *std::min_element(scratch.begin(), scratch.end());
            h = std::nextafter(h, 0.0);
        } else {
            std::nth_element(scratch.begin(), scratch.begin() + (rank - 1), scratch.end());
            h = scratch[rank - 1];
        }
        raw.push_back(h);
        survivors.push_back(n);

        std::size_t keep = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(values[i] > h)) {
                if (keep != i) {
                    alive[keep] = std::move(alive[i]);
                }
                ++keep;
            }
        }
        alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(keep), alive.end());
        if (alive.empty()) {
            break;
        }
    }

    const std::vector<double> smoothed = smooth_thresholds(raw, plan.smoothing_weight);
    std::vector<ThresholdEntry> entries;
    entries.reserve(smoothed.size());
    for (std::size_t i = 0; i < smoothed.size(); ++i) {
        entries.push_back({plan.start_t + i, smoothed[i]});
    }
    return {ThresholdTable(kind, 1.0 / plan.gamma, plan.start_t, std::move(entries)), std::move(raw),
            std::move(survivors)};
}

} // namespace cpmon
