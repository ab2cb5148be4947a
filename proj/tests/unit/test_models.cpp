#include <cmath>
#include <vector>

#include "doctest.h"
#include "ripe/error.hpp"
#include "ripe/models.hpp"
#include "ripe/numerics.hpp"

using namespace ripe;

namespace {

const HierarchicalStats kSchools{{28, 8, -3, 7, -1, 1, 18, 12}, {15, 10, 16, 11, 9, 11, 10, 18}};

double quad(const ScalarFunction& f, Interval dom, std::vector<double> bp = {})
{
    QuadratureSpec spec;
    spec.domain = dom;
    spec.abs_tol = 1e-12;
    spec.rel_tol = 1e-11;
    spec.max_subdivisions = 2000;
    spec.breakpoints = std::move(bp);
    return integrate_1d(f, spec).value;
}

}  // namespace

TEST_CASE("sufficient statistics and family parsing")
{
    const std::vector<double> y = {1.0, 2.0, 4.0};
    const auto s = std::get<NormalStats>(sufficient_stats(FamilyKind::NormalMeanVar, y));
    CHECK(s.n == 3);
    CHECK(s.ybar == doctest::Approx(7.0 / 3.0));
    CHECK(s.msd == doctest::Approx(((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) +
                                    (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 3.0));
    const auto e = std::get<ExponentialStats>(sufficient_stats(FamilyKind::Exponential, y));
    CHECK(e.t == doctest::Approx(7.0));
    const auto u = std::get<UniformStats>(sufficient_stats(FamilyKind::UniformScale, y));
    CHECK(u.t == 4.0);
    const std::vector<double> bits = {0, 1, 1, 0, 0};
    const auto b = std::get<BinomialStats>(sufficient_stats(FamilyKind::Binomial, bits));
    CHECK(b.n == 5);
    CHECK(b.r == 2);

    CHECK(parse_family("binomial") == FamilyKind::Binomial);
    CHECK(parse_family("two-level") == FamilyKind::TwoLevelNormal);
    CHECK_THROWS_AS(parse_family("poisson"), Error);
    CHECK_THROWS_AS(sufficient_stats(FamilyKind::Binomial, std::vector<double>{}), Error);
    CHECK_THROWS_AS(sufficient_stats(FamilyKind::Binomial, std::vector<double>{0.5}), Error);
    CHECK_THROWS_AS(sufficient_stats(FamilyKind::Exponential, std::vector<double>{-1.0}), Error);
}

TEST_CASE("binomial KL matches the direct Bernoulli sum")
{
    const BinomialModel m({10, 3});
    for (double a : {0.05, 0.3, 0.9}) {
        for (double b : {0.1, 0.5, 0.97}) {
            const double direct = a * std::log(a / b) + (1 - a) * std::log((1 - a) / (1 - b));
            CHECK(m.kl({a}, {b}) == doctest::Approx(direct).epsilon(1e-13));
        }
    }
    CHECK(m.kl({0.0}, {0.2}) == doctest::Approx(-std::log(0.8)));
    CHECK(std::isinf(m.kl({0.2}, {0.0})));
    CHECK_THROWS_AS(m.validate_point({1.2}), Error);
}

TEST_CASE("exponential and normal KL match numeric integration")
{
    const ExponentialModel e({10, 6.08});
    const double a = 1.3, b = 2.1;
    const double num = quad([&](double y) {
        const double lp = std::log(a) - a * y;
        const double lq = std::log(b) - b * y;
        return std::exp(lp) * (lp - lq);
    }, {0.0, kInf});
    CHECK(e.kl({a}, {b}) == doctest::Approx(num).epsilon(1e-9));

    const NormalModel n({25, 0.024, 1.077}, false);
    const ParamPoint p{0.1, 0.8}, q{-0.4, 1.7};
    const double num2 = quad([&](double y) {
        auto logn = [](double x, double m, double s) {
            return -0.5 * std::log(2 * M_PI * s * s) - (x - m) * (x - m) / (2 * s * s);
        };
        const double lp = logn(y, p[0], p[1]);
        return std::exp(lp) * (lp - logn(y, q[0], q[1]));
    }, {-kInf, kInf}, {p[0]});
    CHECK(n.kl(p, q) == doctest::Approx(num2).epsilon(1e-9));
}

TEST_CASE("uniform KL is infinite when the support shrinks")
{
    const UniformModel u({10, 1.897});
    CHECK(u.kl({2.0}, {3.0}) == doctest::Approx(std::log(1.5)));
    CHECK(std::isinf(u.kl({3.0}, {2.0})));
}

TEST_CASE("predictive densities integrate to one")
{
    const ExponentialModel e({10, 6.08});
    CHECK(quad([&](double y) { return std::exp(e.log_pred_full(y)); }, {0.0, kInf}) == doctest::Approx(1.0));
    const NormalModel nm({25, 0.024, 1.077}, true);
    CHECK(quad([&](double y) { return std::exp(nm.log_pred_full(y)); }, {-kInf, kInf}) == doctest::Approx(1.0));
    CHECK(quad([&](double y) { return std::exp(nm.log_pred_restricted({0.5}, y).value); }, {-kInf, kInf}) ==
          doctest::Approx(1.0));
    const TwoLevelNormalModel h(kSchools);
    CHECK(quad([&](double y) { return std::exp(h.log_pred_full(y, 0)); }, {-kInf, kInf}, {20.0}) ==
          doctest::Approx(1.0).epsilon(1e-8));
    const UniformModel u({10, 1.897});
    CHECK(quad([&](double y) { return std::exp(u.log_pred_full(y)); }, {0.0, kInf}, {1.897}) ==
          doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("restricted normal predictive matches sigma integrated over its conditional posterior")
{
    for (auto prior : {NormalPrior::VarianceMeasure, NormalPrior::SigmaMeasure}) {
        ModelConfig cfg;
        cfg.normal_prior = prior;
        const NormalModel m({12, 0.4, 0.9}, true, cfg);
        const double mu = -0.2, y = 0.7;
        // p(sigma^2 | mu) ∝ sigma^-(n + 2 + extra) exp(-(S + n d^2) / (2 sigma^2))
        const double extra = prior == NormalPrior::VarianceMeasure ? 0.0 : 1.0;
        const double q = m.sum_sq() + m.n() * (m.ybar() - mu) * (m.ybar() - mu);
        auto post = [&](double v) { return std::pow(v, -(m.n() + 2.0 + extra) / 2.0) * std::exp(-q / (2 * v)); };
        const double z = quad(post, {0.0, kInf}, {q / m.n()});
        const double num = quad([&](double v) {
            return post(v) * std::exp(-(y - mu) * (y - mu) / (2 * v)) / std::sqrt(2 * M_PI * v);
        }, {0.0, kInf}, {q / m.n()}) / z;
        CHECK(std::exp(m.log_pred_restricted({mu}, y).value) == doctest::Approx(num).epsilon(1e-8));
    }
}

TEST_CASE("nuisance projection: closed form agrees with numeric minimization")
{
    const NormalModel m({25, 0.024, 1.077}, true);
    const ParamPoint full{0.3, 0.9};
    for (auto dir : {KlDirection::FullToRestricted, KlDirection::RestrictedToFull, KlDirection::Symmetric}) {
        const auto a = m.project_nuisance({-0.5}, full, dir);
        const auto b = m.project_nuisance_numeric({-0.5}, full, dir);
        CHECK(a[1] == doctest::Approx(b[1]).epsilon(1e-6));
    }
    const auto r = m.project_nuisance({-0.5}, full, KlDirection::FullToRestricted);
    CHECK(m.kl(full, r) == doctest::Approx(0.5 * std::log1p(0.64 / 0.81)));
    const NormalModel joint({25, 0.024, 1.077}, false);
    CHECK_THROWS_AS(joint.project_nuisance({0.0, 1.0}, {0.0, 1.0}, KlDirection::Symmetric), Error);
}

TEST_CASE("posterior sampling reproduces posterior means")
{
    RngEngine eng(RngStream{42, 0});
    const BinomialModel b({10, 0});
    const ExponentialModel e({10, 6.08});
    const NormalModel n({25, 0.024, 1.077}, false);
    const int draws = 100000;
    double sb = 0, se = 0, sm = 0, sv = 0;
    for (int i = 0; i < draws; ++i) {
        sb += b.sample_posterior(eng)[0];
        se += e.sample_posterior(eng)[0];
        const auto p = n.sample_posterior(eng);
        sm += p[0];
        sv += p[1] * p[1];
    }
    CHECK(sb / draws == doctest::Approx(0.5 / 11).epsilon(0.01));
    CHECK(se / draws == doctest::Approx(10 / 6.08).epsilon(0.005));
    CHECK(sm / draws == doctest::Approx(0.024).epsilon(0.02).scale(1.0));
    CHECK(sv / draws == doctest::Approx(25 * 1.077 / 22).epsilon(0.005));
}

TEST_CASE("two-level grid posterior matches direct integration of p(tau | y)")
{
    const TwoLevelNormalModel m(kSchools);
    const auto& post = m.grid_posterior();
    auto log_marg = [&](double tau) {
        double w = 0, wy = 0;
        for (std::size_t j = 0; j < 8; ++j) {
            const double v = kSchools.sigma[j] * kSchools.sigma[j] + tau * tau;
            w += 1 / v;
            wy += kSchools.ybar[j] / v;
        }
        const double mh = wy / w;
        double l = -0.5 * std::log(w);
        for (std::size_t j = 0; j < 8; ++j) {
            const double v = kSchools.sigma[j] * kSchools.sigma[j] + tau * tau;
            l -= 0.5 * (std::log(v) + (kSchools.ybar[j] - mh) * (kSchools.ybar[j] - mh) / v);
        }
        return l;
    };
    const double top = m.config().tau_grid_max;
    const double z = quad([&](double t) { return std::exp(log_marg(t)); }, {0.0, top});
    const double mean_tau = quad([&](double t) { return t * std::exp(log_marg(t)); }, {0.0, top}) / z;
    CHECK(post.mean_tau() == doctest::Approx(mean_tau).epsilon(2e-3));
    double total = 0;
    for (double w : post.weight) {
        total += w;
    }
    CHECK(total == doctest::Approx(1.0));
    CHECK(post.mean_mu() == doctest::Approx(7.9).epsilon(0.05));
}

TEST_CASE("invalid model input is rejected")
{
    CHECK_THROWS_AS(BinomialModel({10, 11}), Error);
    CHECK_THROWS_AS(ExponentialModel({0, 1.0}), Error);
    CHECK_THROWS_AS(UniformModel({5, -1.0}), Error);
    CHECK_THROWS_AS(NormalModel({1, 0.0, 1.0}, false), Error);
    CHECK_THROWS_AS(TwoLevelNormalModel({{1.0}, {1.0}}), Error);
    try {
        NormalModel({10, 0.0, 0.0}, false);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidArgument);
    }
}
