#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "ripe/coverage.hpp"
#include "ripe/error.hpp"

using namespace ripe;

namespace {

const Method kGroups[] = {Method::PredictiveCriterion, Method::IntrinsicD2, Method::IntrinsicD3};

// Coverage by summing binomial probabilities with log-space pmf terms.
double enumerate(int n, const std::vector<Interval>& regions, double theta)
{
    double c = 0.0;
    for (int r = 0; r <= n; ++r) {
        if (regions[r].contains(theta)) {
            c += std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0) +
                          r * std::log(theta) + (n - r) * std::log1p(-theta));
        }
    }
    return c;
}

}  // namespace

TEST_CASE("coverage: default grid")
{
    const auto g = default_theta_grid();
    REQUIRE(g.size() == 1001);
    CHECK(g.front() == doctest::Approx(0.0005).epsilon(1e-14));
    CHECK(g.back() == doctest::Approx(0.9995).epsilon(1e-14));
    CHECK(std::is_sorted(g.begin(), g.end()));
}

TEST_CASE("coverage: regions match single-outcome regions")
{
    const auto regions = binomial_regions(10, Method::IntrinsicD3, 0.95);
    REQUIRE(regions.size() == 11);
    for (int r : {0, 4, 10}) {
        const auto single = lpl_region(BinomialModel({10, r}), Method::IntrinsicD3, 0.95);
        CHECK(regions[r].lo == single.intervals[0].lo);
        CHECK(regions[r].hi == single.intervals[0].hi);
    }
}

TEST_CASE("coverage: exact profile against direct enumeration")
{
    for (Method m : kGroups) {
        const auto prof = binomial_coverage_exact(10, m, 0.95);
        CHECK(prof.weighting == "uniform");
        for (std::size_t i = 0; i < prof.theta.size(); i += 37) {
            CHECK(std::abs(prof.coverage[i] - enumerate(10, prof.regions, prof.theta[i])) < 1e-12);
            CHECK(prof.coverage[i] >= 0.0);
            CHECK(prof.coverage[i] <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("coverage: exact profile against simulation")
{
    const auto prof = binomial_coverage_exact(10, Method::IntrinsicD3, 0.95);
    const int reps = 100000;
    std::uint64_t id = 0;
    for (std::size_t i : {50u, 200u, 333u, 500u, 871u}) {
        const double theta = prof.theta[i];
        RngEngine e({2024, id++});
        int hits = 0;
        for (int k = 0; k < reps; ++k) {
            int r = 0;
            for (int j = 0; j < 10; ++j) {
                r += e.uniform() < theta ? 1 : 0;
            }
            hits += prof.regions[r].contains(theta) ? 1 : 0;
        }
        const double p = prof.coverage[i];
        const double se = std::sqrt(std::max(p * (1.0 - p), 1e-6) / reps);
        CHECK(std::abs(static_cast<double>(hits) / reps - p) <= 3.0 * se);
    }
}

TEST_CASE("coverage: predictive and directed profiles coincide")
{
    const auto a = binomial_coverage_exact(10, Method::PredictiveCriterion, 0.95);
    const auto b = binomial_coverage_exact(10, Method::IntrinsicD1, 0.95);
    for (std::size_t i = 0; i < a.coverage.size(); ++i) {
        CHECK(std::abs(a.coverage[i] - b.coverage[i]) < 1e-6);
    }
}

TEST_CASE("coverage: breakpoints are the sorted region endpoints")
{
    const auto prof = binomial_coverage_exact(12, Method::IntrinsicD2, 0.9);
    CHECK(std::is_sorted(prof.breakpoints.begin(), prof.breakpoints.end()));
    CHECK(prof.breakpoints.size() <= 2u * 13u);
    CHECK(std::adjacent_find(prof.breakpoints.begin(), prof.breakpoints.end()) == prof.breakpoints.end());
    for (const auto& iv : prof.regions) {
        for (double x : {iv.lo, iv.hi}) {
            CHECK(std::binary_search(prof.breakpoints.begin(), prof.breakpoints.end(), x));
        }
    }
}

TEST_CASE("coverage: average against a fine grid")
{
    for (Method m : kGroups) {
        for (int n : {10, 40}) {
            const auto regions = binomial_regions(n, m, 0.95);
            const double exact = binomial_average_coverage(regions);
            // midpoint rule on 2000 cells
            double grid = 0.0;
            for (int i = 0; i < 2000; ++i) {
                grid += enumerate(n, regions, (i + 0.5) / 2000.0);
            }
            grid /= 2000.0;
            CHECK(std::abs(exact - grid) < 2e-3);
            CHECK(exact >= 0.0);
            CHECK(exact <= 1.0);
        }
    }
}

TEST_CASE("coverage: average converges toward the level")
{
    for (Method m : kGroups) {
        const auto avg = average_coverage({10, 20, 50, 100, 200}, m, 0.95);
        REQUIRE(avg.size() == 5);
        CHECK(std::abs(avg.back().second - 0.95) <= 0.01);
        CHECK(std::abs(avg.back().second - 0.95) <= std::abs(avg.front().second - 0.95));
    }
}

TEST_CASE("coverage: bitwise determinism")
{
    const auto a = binomial_coverage_exact(15, Method::IntrinsicD3, 0.9);
    const auto b = binomial_coverage_exact(15, Method::IntrinsicD3, 0.9);
    CHECK(a.coverage == b.coverage);
    CHECK(a.average_coverage == b.average_coverage);

    const auto x = mc_coverage(FamilyKind::Exponential, {1.5}, 10, Method::IntrinsicD2, 0.8, 300, {5, 0});
    const auto y = mc_coverage(FamilyKind::Exponential, {1.5}, 10, Method::IntrinsicD2, 0.8, 300, {5, 0});
    CHECK(x.coverage == y.coverage);
    const auto z = mc_coverage(FamilyKind::Exponential, {1.5}, 10, Method::IntrinsicD2, 0.8, 300, {6, 0});
    CHECK(z.replications == 300);
}

TEST_CASE("coverage: continuous families are exact")
{
    struct Job {
        FamilyKind family;
        ParamPoint truth;
        int n;
        Method method;
        double q;
        std::size_t reps;
    };
    const std::vector<Job> jobs = {
        {FamilyKind::Exponential, {1.5}, 10, Method::PredictiveCriterion, 0.95, 4000},
        {FamilyKind::Exponential, {0.5}, 10, Method::IntrinsicD3, 0.5, 2000},
        {FamilyKind::UniformScale, {2.0}, 10, Method::IntrinsicD3, 0.9, 2000},
        {FamilyKind::NormalMeanVar, {0.0, 1.0}, 25, Method::IntrinsicD2, 0.5, 1000},
        {FamilyKind::NormalMeanOnly, {0.0, 1.0}, 25, Method::PredictiveCriterion, 0.9, 1000},
    };
    std::uint64_t seed = 70;
    for (const auto& j : jobs) {
        CAPTURE(family_name(j.family));
        const auto c = mc_coverage(j.family, j.truth, j.n, j.method, j.q, j.reps, {seed++, 0});
        const double se = std::sqrt(j.q * (1.0 - j.q) / static_cast<double>(j.reps));
        CHECK(std::abs(c.coverage - j.q) <= 3.0 * se);
    }
}

TEST_CASE("coverage: near-full level")
{
    const auto c = mc_coverage(FamilyKind::Exponential, {0.7}, 10, Method::IntrinsicD2, 0.999, 2000, {9, 0});
    CHECK(c.coverage >= 0.99);
}

TEST_CASE("coverage: invalid input")
{
    CHECK_THROWS_AS(binomial_coverage_exact(0, Method::IntrinsicD2, 0.95), Error);
    CHECK_THROWS_AS(binomial_coverage_exact(10, Method::IntrinsicD2, 1.5), Error);
    CHECK_THROWS_AS(mc_coverage(FamilyKind::Exponential, {1.0}, 10, Method::IntrinsicD2, 0.9, 50, {1, 0}), Error);
    CHECK_THROWS_AS(mc_coverage(FamilyKind::Exponential, {1.0, 2.0}, 10, Method::IntrinsicD2, 0.9, 500, {1, 0}),
                    Error);
    CHECK_THROWS_AS(mc_coverage(FamilyKind::TwoLevelNormal, {1.0, 2.0}, 8, Method::IntrinsicD2, 0.9, 500, {1, 0}),
                    Error);
    CHECK_THROWS_AS(mc_coverage(FamilyKind::UniformScale, {1.0}, 10, Method::IntrinsicD2, 0.9, 500, {1, 0}), Error);
}
