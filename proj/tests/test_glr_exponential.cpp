#include "catch_amalgamated.hpp"

#include "cpmon/errors.hpp"
#include "cpmon/glr_exponential.hpp"
#include "cpmon/random.hpp"

#include "oracles.hpp"

#include <cmath>
#include <random>
#include <vector>

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using cpmon::CandidateSet;
namespace e = cpmon::exponential;

namespace {

CandidateSet fill(const std::vector<double>& x) {
    CandidateSet set(e::kMinSegment);
    for (double v : x) set.push(v);
    return set;
}

std::vector<double> exponentials(std::size_t n, std::uint64_t seed, double rate = 1.0) {
    cpmon::Xoshiro256 rng(seed);
    std::exponential_distribution<double> d(rate);
    std::vector<double> x(n);
    for (auto& v : x) v = d(rng);
    return x;
}

} // namespace

TEST_CASE("m_stat hand-evaluated cases", "[exponential]") {
    CHECK_THAT(e::m_stat(2.0, 2, 4.0, 4), WithinAbs(0.0, 1e-12));
    const double want = -2.0 * (4.0 * std::log(4.0 / 6.0) - 2.0 * std::log(1.0) - 2.0 * std::log(2.0 / 4.0));
    CHECK_THAT(e::m_stat(2.0, 2, 6.0, 4), WithinAbs(want, 1e-12));
    CHECK_THAT(e::m_stat(2.0, 2, 6.0, 4), WithinAbs(0.471132142625534, 1e-12));
}

TEST_CASE("m_stat domain", "[exponential][edge]") {
    CHECK_THROWS_AS(e::m_stat(0.0, 1, 3.0, 3), cpmon::DomainError);
    CHECK_THROWS_AS(e::m_stat(1.0, 1, -3.0, 3), cpmon::DomainError);
    CHECK_THROWS_AS(e::m_stat(1.0, 0, 3.0, 3), cpmon::DomainError);
    CHECK_THROWS_AS(e::m_stat(1.0, 3, 3.0, 3), cpmon::DomainError);
}

TEST_CASE("expected_m values and symmetry", "[exponential]") {
    const std::vector<std::pair<std::size_t, double>> t50{
        {1, 1.15449934868565}, {5, 1.03357276084536}, {10, 1.01748328484856},
        {25, 1.00999800159729}, {45, 1.03357276084536}, {49, 1.15449934868565}};
    for (const auto& [k, v] : t50) CHECK_THAT(e::expected_m(k, 50), WithinAbs(v, 1e-10));
    // -2k(psi(k) - ln k) at k = 1 is twice the Euler-Mascheroni constant
    CHECK_THAT(e::expected_m(1, 1'000'000), WithinAbs(1.1544313298, 1e-6));
    for (std::size_t t : {2u, 3u, 50u, 777u}) {
        for (std::size_t k = 1; k < t; ++k) CHECK(e::expected_m(k, t) == e::expected_m(t - k, t));
    }
    CHECK_THROWS_AS(e::expected_m(0, 5), cpmon::DomainError);
    CHECK_THROWS_AS(e::expected_m(5, 5), cpmon::DomainError);

    e::ExpectationTable table(300);
    for (std::size_t k = 1; k < 300; k += 7) CHECK_THAT(table.expected(k, 300), WithinAbs(e::expected_m(k, 300), 1e-12));
}

TEST_CASE("scores match the raw-data oracle", "[exponential]") {
    const auto x = exponentials(50, 3, 2.5);
    const auto set = fill(x);
    const auto scores = e::corrected_scores(set);
    REQUIRE(scores.records.size() == 49);
    for (const auto& r : scores.records) {
        CHECK_THAT(r.m, WithinAbs(oracle::m_stat(x, r.k, 50), 1e-9));
        CHECK_THAT(r.mc, WithinAbs(r.m / e::expected_m(r.k, 50), 1e-12));
    }
    const e::ExpectationTable table(50);
    for (auto which : {e::Statistic::raw, e::Statistic::corrected}) {
        const auto slow = e::max_score(scores, which);
        const auto fast = e::max_statistic(set, which, table);
        CHECK(fast.k == slow.k);
        CHECK_THAT(fast.value, WithinAbs(slow.value, 1e-9));
    }
}

TEST_CASE("non-positive observations are rejected", "[exponential][edge]") {
    CHECK_THROWS_AS(e::corrected_scores(fill({1.0, 0.0, 2.0})), cpmon::InputError);
    CHECK_THROWS_AS(e::corrected_scores(fill({1.0, -2.0, 2.0})), cpmon::InputError);
}

TEST_CASE("max_score ties", "[exponential]") {
    e::SplitScores s{12, {}};
    for (std::size_t k = 1; k <= 11; ++k) s.records.push_back({k, 0.0, 0.0});
    s.records[4].m = 3.0;
    s.records[8].m = 3.0;
    CHECK(e::max_score(s, e::Statistic::raw).k == 5);
    CHECK_THROWS_AS(e::max_score(e::SplitScores{}, e::Statistic::raw), cpmon::DomainError);
}

TEST_CASE("scale invariance", "[exponential][property]") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = exponentials(70, seed);
        std::vector<double> y(x);
        const double a = seed % 2 ? 1e-3 : 250.0;
        for (double& v : y) v *= a;
        const auto sx = e::corrected_scores(fill(x));
        const auto sy = e::corrected_scores(fill(y));
        for (std::size_t i = 0; i < sx.records.size(); ++i) {
            CHECK_THAT(sy.records[i].m, WithinAbs(sx.records[i].m, 1e-9));
            CHECK_THAT(sy.records[i].mc, WithinAbs(sx.records[i].mc, 1e-9));
        }
        CHECK(e::max_score(sx, e::Statistic::corrected).k == e::max_score(sy, e::Statistic::corrected).k);
    }
}

TEST_CASE("M is nonnegative", "[exponential][property]") {
    cpmon::Xoshiro256 rng(8);
    std::exponential_distribution<double> d;
    std::uniform_int_distribution<int> len(2, 60);
    for (int rep = 0; rep < 10'000; ++rep) {
        CandidateSet set(1);
        const int n = len(rng);
        for (int i = 0; i < n; ++i) set.push(d(rng) * (1.0 + i % 4));
        for (const auto& r : e::corrected_scores(set).records) CHECK(r.m >= -1e-9);
    }
}
