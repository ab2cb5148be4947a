#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "ripe/estimate.hpp"
#include "ripe/models.hpp"
#include "ripe/regions.hpp"
#include "ripe/rng.hpp"

namespace ripe {

struct CoverageProfile {
    FamilyKind family = FamilyKind::Binomial;
    Method method = Method::PredictiveCriterion;
    double level = 0.0;
    int n = 0;
    std::vector<double> theta;
    std::vector<double> coverage;
    /// Average of coverage(theta) over theta ~ Uniform(0, 1), integrated exactly.
    double average_coverage = 0.0;
    std::string weighting = "uniform";
    /// Sorted distinct region endpoints, where coverage(theta) jumps.
    std::vector<double> breakpoints;
    /// Region for each success count r = 0..n.
    std::vector<Interval> regions;
};

/// 1001 equispaced points on [0.0005, 0.9995].
std::vector<double> default_theta_grid();

/// LPL intervals for every possible binomial outcome r = 0..n.
std::vector<Interval> binomial_regions(int n, Method method, double q);

/// Exact frequentist coverage of the binomial intervals by enumeration over r.
CoverageProfile binomial_coverage_exact(int n, Method method, double q,
                                        const std::vector<double>& theta_grid = default_theta_grid());

/// Uniform average of coverage(theta), integrated exactly between region endpoints.
double binomial_average_coverage(const std::vector<Interval>& regions);

std::vector<std::pair<int, double>> average_coverage(const std::vector<int>& n_list, Method method, double q);

struct McCoverage {
    double coverage = 0.0;
    double std_error = 0.0;
    std::size_t replications = 0;
};

/// Fraction of simulated data sets whose region contains theta_true. For
/// NormalMeanOnly, theta_true is (mu, sigma) and membership is tested on mu.
/// Replicate i draws from stream.substream(i).
McCoverage mc_coverage(FamilyKind family, const ParamPoint& theta_true, int n, Method method, double q,
                       std::size_t replications, RngStream stream, ModelConfig config = {});

}  // namespace ripe
