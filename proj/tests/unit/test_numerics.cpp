#include <cmath>
#include <vector>

#include "doctest.h"
#include "ripe/error.hpp"
#include "ripe/numerics.hpp"
#include "ripe/rng.hpp"
#include "ripe/special.hpp"

using namespace ripe;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("integrate_1d: constant and normal density")
{
    auto one = integrate_1d([](double) { return 1.0; }, Interval{0.0, 1.0});
    CHECK(one.value == doctest::Approx(1.0).epsilon(1e-12));

    auto phi = [](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); };
    QuadratureSpec spec;
    spec.domain = {-kInf, kInf};
    auto r = integrate_1d(phi, spec);
    CHECK(std::abs(r.value - 1.0) < 1e-9);
    CHECK(r.err_est <= std::max(spec.abs_tol, spec.rel_tol * std::abs(r.value)));
}

TEST_CASE("integrate_1d: exponential cross entropy")
{
    // Ex(1) density against log Ex(2): E[log 2 - 2y] = log 2 - 2
    QuadratureSpec spec;
    spec.domain = {0.0, kInf};
    auto r = integrate_1d([](double y) { return std::exp(-y) * (std::log(2.0) - 2.0 * y); }, spec);
    CHECK(std::abs(r.value - (std::log(2.0) - 2.0)) < 1e-9);

    spec.domain = {-kInf, 0.0};
    auto left = integrate_1d([](double y) { return std::exp(y); }, spec);
    CHECK(std::abs(left.value - 1.0) < 1e-9);
}

TEST_CASE("integrate_1d: breakpoints and endpoint singularities")
{
    QuadratureSpec spec;
    spec.domain = {-1.0, 2.0};
    spec.breakpoints = {0.0};
    auto kink = integrate_1d([](double x) { return std::abs(x); }, spec);
    CHECK(std::abs(kink.value - 2.5) < 1e-10);

    spec = {};
    spec.domain = {0.0, 1.0};
    auto sing = integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, spec);
    CHECK(std::abs(sing.value - 2.0) < 1e-8);
}

TEST_CASE("integrate_1d: errors")
{
    CHECK_THROWS_AS(integrate_1d([](double) { return 1.0; }, Interval{1.0, 0.0}), Error);
    try {
        integrate_1d([](double x) { return x > 0.5 ? std::nan("") : 1.0; }, Interval{0.0, 1.0});
        FAIL("expected NonFiniteIntegrand");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteIntegrand);
    }
    QuadratureSpec spec;
    spec.max_subdivisions = 2;
    spec.domain = {0.0, 1.0};
    try {
        integrate_1d([](double x) { return std::sin(1.0 / (x + 1e-3)); }, spec);
        FAIL("expected NonConvergence");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
    }
}

TEST_CASE("minimize_1d: examples")
{
    auto q = minimize_1d([](double x) { return (x - 2.0) * (x - 2.0); }, {0.0, 5.0});
    CHECK(std::abs(q.argmin[0] - 2.0) < 1e-8);
    CHECK(q.converged);

    auto f = [](double x) { return 6.08 * x / 9.0 - std::log(x); };
    auto df = [](double x) { return 6.08 / 9.0 - 1.0 / x; };
    auto e = minimize_1d(f, {0.1, 10.0}, 1e-8, df);
    CHECK(std::abs(e.argmin[0] - 9.0 / 6.08) < 1e-12);
    CHECK(e.min_value == f(e.argmin[0]));

    auto a = minimize_1d([](double x) { return std::abs(x - 1.0); }, {0.0, 3.0});
    CHECK(std::abs(a.argmin[0] - 1.0) < 1e-6);

    CHECK_THROWS_AS(minimize_1d([](double x) { return x; }, {1.0, 1.0}), Error);
}

TEST_CASE("minimize_1d_scan: kinked objective and ties")
{
    auto f = [](double x) { return std::min(std::abs(x - 0.3) + 0.1, std::abs(x - 0.7)); };
    auto r = minimize_1d_scan(f, {0.0, 1.0});
    CHECK(std::abs(r.argmin[0] - 0.7) < 1e-6);

    // flat objective: tie resolves toward the left end
    auto flat = minimize_1d_scan([](double) { return 1.0; }, {2.0, 3.0});
    CHECK(flat.argmin[0] < 2.1);
}

TEST_CASE("minimize_1d: monotone reparameterization")
{
    auto f = [](double x) { return x - 3.0 * std::log(x); };
    auto r = minimize_1d(f, {0.1, 20.0}, 1e-8);
    auto g = [&](double u) { return f(std::exp(u)); };
    auto ru = minimize_1d(g, {std::log(0.1), std::log(20.0)}, 1e-8);
    CHECK(std::abs(std::exp(ru.argmin[0]) - r.argmin[0]) < 10.0 * 1e-8 * 3.0 + 1e-7);
}

TEST_CASE("minimize_nd: bowl and Rosenbrock")
{
    const std::vector<double> scale = {1.0, 1.0};
    std::vector<double> start = {1.0, 1.0};
    auto bowl = minimize_nd([](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; }, start,
                            scale);
    CHECK(std::abs(bowl.argmin[0]) < 1e-6);
    CHECK(std::abs(bowl.argmin[1]) < 1e-6);

    start = {-1.2, 1.0};
    auto rosen = minimize_nd(
        [](std::span<const double> x) {
            const double a = 1.0 - x[0];
            const double b = x[1] - x[0] * x[0];
            return a * a + 100.0 * b * b;
        },
        start, scale, {1e-10, 20000, 2});
    CHECK(std::abs(rosen.argmin[0] - 1.0) < 1e-4);
    CHECK(std::abs(rosen.argmin[1] - 1.0) < 1e-4);

    try {
        minimize_nd([](std::span<const double>) { return std::nan(""); }, start, scale);
        FAIL("expected NonFiniteObjective");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonFiniteObjective);
    }
}

TEST_CASE("find_root and find_threshold")
{
    CHECK(std::abs(find_root([](double x) { return x * x - 2.0; }, {0.0, 2.0}) - std::sqrt(2.0)) < 1e-14);
    CHECK_THROWS_AS(find_root([](double x) { return x * x + 1.0; }, {0.0, 2.0}), Error);

    CHECK(std::abs(find_threshold([](double l) { return l; }, 0.5, {0.0, 1.0}) - 0.5) < 1e-10);
    const double z = find_threshold(normal_cdf, 0.975, {-10.0, 10.0}, 1e-12);
    CHECK(std::abs(z - 1.959963984540054) < 1e-9);

    // idempotence: re-solving with the result as an endpoint
    const double again = find_threshold(normal_cdf, 0.975, {z, 10.0}, 1e-12);
    CHECK(std::abs(again - z) < 1e-10);

    try {
        find_threshold([](double l) { return l; }, 2.0, {0.0, 1.0});
        FAIL("expected TargetNotBracketed");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TargetNotBracketed);
    }
}

TEST_CASE("philox known answers")
{
    auto zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);

    auto pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("rng determinism and moments")
{
    RngEngine a({42, 0});
    RngEngine b({42, 0});
    CHECK(a.uniform() == b.uniform());
    CHECK(a.uniform() == b.uniform());

    RngEngine c({42, 1});
    RngEngine d({42, 0});
    CHECK(c.next_u64() != d.next_u64());

    const RngStream base{7, 3};
    CHECK(base.substream(5).stream_id == base.substream(5).stream_id);
    CHECK(base.substream(5).stream_id != base.substream(6).stream_id);

    const int n = 1000000;
    RngEngine u({2024, 0});
    double su = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng_uniform(u);
        REQUIRE(x >= 0.0);
        REQUIRE(x < 1.0);
        su += x;
    }
    CHECK(std::abs(su / n - 0.5) < 0.002);

    RngEngine g({2024, 1});
    double sg = 0.0;
    for (int i = 0; i < n; ++i) {
        sg += rng_gamma(g, 2.0, 1.0);
    }
    CHECK(std::abs(sg / n - 2.0) < 0.005);

    RngEngine z({2024, 2});
    double s1 = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng_normal(z);
        s1 += x;
        s2 += x * x;
    }
    CHECK(std::abs(s1 / n) < 0.005);
    CHECK(std::abs(s2 / n - 1.0) < 0.01);

    RngEngine small({5, 5});
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        ss += small.gamma(0.5, 2.0);
    }
    CHECK(std::abs(ss / n - 0.25) < 0.003);
}
