#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ripe/distributions.hpp"
#include "ripe/rng.hpp"

namespace ripe {

enum class FamilyKind {
    NormalMeanVar,
    NormalMeanOnly,  // sigma is a nuisance parameter
    Binomial,
    Exponential,
    UniformScale,
    TwoLevelNormal,
};

std::string_view family_name(FamilyKind kind);

/// Parses "normal", "normal-mean", "binomial", "exponential", "uniform",
/// "two-level" (and the enum spellings). Throws InvalidArgument.
FamilyKind parse_family(std::string_view name);

/// Reading of the 1/sigma^2 reference prior for the Normal families.
enum class NormalPrior {
    VarianceMeasure,  // p(mu, sigma^2) ∝ 1/sigma^2; sigma^2 posterior has n-1 dof
    SigmaMeasure,     // p(mu, sigma) ∝ 1/sigma^2; sigma^2 posterior has n dof
};

struct ModelConfig {
    NormalPrior normal_prior = NormalPrior::VarianceMeasure;
    int tau_grid_points = 2048;
    double tau_grid_max = 40.0;
};

struct NormalStats {
    int n = 0;
    double ybar = 0.0;
    double msd = 0.0;  // (1/n) sum (y_i - ybar)^2
};

struct BinomialStats {
    int n = 0;
    int r = 0;
};

struct ExponentialStats {
    int n = 0;
    double t = 0.0;  // sum of observations
};

struct UniformStats {
    int n = 0;
    double t = 0.0;  // maximum observation
};

struct HierarchicalStats {
    std::vector<double> ybar;
    std::vector<double> sigma;
};

using SufficientStats =
    std::variant<NormalStats, BinomialStats, ExponentialStats, UniformStats, HierarchicalStats>;

/// Throws EmptyData or InvalidObservation. TwoLevelNormal takes group
/// summaries directly and is rejected here with InvalidArgument.
SufficientStats sufficient_stats(FamilyKind kind, std::span<const double> data);

/// Coordinates in the order given by Model::parameter_names().
using ParamPoint = std::vector<double>;

enum class KlDirection {
    FullToRestricted,  // delta_1
    RestrictedToFull,  // delta_2
    Symmetric,         // delta_3
};

struct LogPredictive {
    double value = 0.0;
    bool out_of_support = false;  // value is -inf because y lies outside the restricted support
};

/// sigma^2 ~ ScaledInvChiSq and mu | sigma^2 ~ N(ybar, sigma^2 / n).
struct NormalPosterior {
    double ybar = 0.0;
    int n = 0;
    Distribution sigma2;

    double mean_sigma2() const { return sigma2.mean(); }
    double mean_inv_sigma2() const { return 1.0 / sigma2.p2; }
    double mean_log_sigma2() const;
};

/// Grid posterior of the group-level scale tau, with mu | tau normal and the
/// group effects alpha_j | mu, tau, y normal.
struct HierarchicalPosterior {
    std::vector<double> tau;
    std::vector<double> weight;  // sums to one
    std::vector<double> mu_hat;
    std::vector<double> mu_var;
    std::vector<double> ybar;
    std::vector<double> sigma;

    /// Mean and variance of alpha_j | mu, tau, y.
    std::pair<double, double> alpha_conditional(std::size_t j, double mu, double tau) const;
    double mean_mu() const;
    double mean_tau() const;
};

using Posterior = std::variant<Distribution, NormalPosterior, HierarchicalPosterior>;

class Model {
public:
    virtual ~Model() = default;

    FamilyKind kind() const { return kind_; }
    const SufficientStats& stats() const { return stats_; }
    const ModelConfig& config() const { return config_; }

    /// Names of the estimable coordinates.
    virtual std::vector<std::string> parameter_names() const = 0;

    /// Names of the full-model coordinates (adds nuisance coordinates, if any).
    virtual std::vector<std::string> full_parameter_names() const { return parameter_names(); }

    /// Throws InvalidParam unless the point lies in the parameter space.
    virtual void validate_point(const ParamPoint& p, bool full = false) const = 0;

    /// Per-observation KL divergence of p_to from p_from; may be +inf.
    virtual double kl(const ParamPoint& from, const ParamPoint& to) const = 0;

    virtual double log_pred_full(double y, std::size_t group = 0) const = 0;
    virtual LogPredictive log_pred_restricted(const ParamPoint& tilde, double y,
                                              std::size_t group = 0) const = 0;

    virtual Posterior posterior() const = 0;

    /// One draw of the full-model parameters.
    virtual ParamPoint sample_posterior(RngEngine& engine) const = 0;

    /// Nuisance value of the restricted model closest in KL to `full`.
    /// Returns the complete restricted point. Throws NoNuisance by default.
    virtual ParamPoint project_nuisance(const ParamPoint& tilde, const ParamPoint& full,
                                        KlDirection direction) const;

protected:
    Model(FamilyKind kind, SufficientStats stats, ModelConfig config)
        : kind_(kind), stats_(std::move(stats)), config_(config)
    {
    }

private:
    FamilyKind kind_;
    SufficientStats stats_;
    ModelConfig config_;
};

class BinomialModel final : public Model {
public:
    explicit BinomialModel(BinomialStats stats, ModelConfig config = {});

    std::vector<std::string> parameter_names() const override { return {"theta"}; }
    void validate_point(const ParamPoint& p, bool full = false) const override;
    double kl(const ParamPoint& from, const ParamPoint& to) const override;
    double log_pred_full(double y, std::size_t group = 0) const override;
    LogPredictive log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group = 0) const override;
    Posterior posterior() const override { return Distribution::beta(a_, b_); }
    ParamPoint sample_posterior(RngEngine& engine) const override;

    int n() const { return n_; }
    int r() const { return r_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double posterior_mean() const { return a_ / (a_ + b_); }

private:
    int n_;
    int r_;
    double a_;
    double b_;
};

class ExponentialModel final : public Model {
public:
    explicit ExponentialModel(ExponentialStats stats, ModelConfig config = {});

    std::vector<std::string> parameter_names() const override { return {"theta"}; }
    void validate_point(const ParamPoint& p, bool full = false) const override;
    double kl(const ParamPoint& from, const ParamPoint& to) const override;
    double log_pred_full(double y, std::size_t group = 0) const override;
    LogPredictive log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group = 0) const override;
    Posterior posterior() const override { return Distribution::gamma(n_, t_); }
    ParamPoint sample_posterior(RngEngine& engine) const override;

    int n() const { return n_; }
    double t() const { return t_; }

private:
    int n_;
    double t_;
};

class UniformModel final : public Model {
public:
    explicit UniformModel(UniformStats stats, ModelConfig config = {});

    std::vector<std::string> parameter_names() const override { return {"theta"}; }
    void validate_point(const ParamPoint& p, bool full = false) const override;
    double kl(const ParamPoint& from, const ParamPoint& to) const override;
    double log_pred_full(double y, std::size_t group = 0) const override;
    LogPredictive log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group = 0) const override;
    Posterior posterior() const override { return Distribution::pareto(n_, t_); }
    ParamPoint sample_posterior(RngEngine& engine) const override;

    int n() const { return n_; }
    double t() const { return t_; }

private:
    int n_;
    double t_;
};

/// Normal data with unknown mean and variance. With mean_only set, sigma is
/// a nuisance parameter: points are (mu) for estimation and (mu, sigma) for
/// the full model.
class NormalModel final : public Model {
public:
    NormalModel(NormalStats stats, bool mean_only, ModelConfig config = {});

    std::vector<std::string> parameter_names() const override;
    std::vector<std::string> full_parameter_names() const override { return {"mu", "sigma"}; }
    void validate_point(const ParamPoint& p, bool full = false) const override;
    double kl(const ParamPoint& from, const ParamPoint& to) const override;
    double log_pred_full(double y, std::size_t group = 0) const override;
    LogPredictive log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group = 0) const override;
    Posterior posterior() const override { return post_; }
    ParamPoint sample_posterior(RngEngine& engine) const override;
    ParamPoint project_nuisance(const ParamPoint& tilde, const ParamPoint& full,
                                KlDirection direction) const override;

    /// Nuisance projection by direct numeric minimization over sigma.
    ParamPoint project_nuisance_numeric(const ParamPoint& tilde, const ParamPoint& full,
                                        KlDirection direction) const;

    bool mean_only() const { return mean_only_; }
    int n() const { return normal_.n; }
    double ybar() const { return normal_.ybar; }
    double sum_sq() const { return normal_.n * normal_.msd; }

    /// Degrees of freedom of the sigma^2 posterior.
    double nu() const { return post_.sigma2.p1; }
    const NormalPosterior& normal_posterior() const { return post_; }

    /// Full-model predictive t_nu(ybar, (1 + 1/n) S / nu).
    Distribution full_predictive() const;

    /// Predictive of the restricted model mu = mu_tilde with sigma integrated
    /// over its conditional posterior.
    Distribution restricted_predictive(double mu_tilde) const;

private:
    NormalStats normal_;
    bool mean_only_;
    NormalPosterior post_;
};

/// Group means ybar_j with known standard errors sigma_j, alpha_j ~ N(mu, tau^2),
/// uniform priors on mu and tau. Estimable point (mu, tau).
///
/// Discrepancies compare the replicate-group-mean predictives given the
/// hyperparameters and the observed data: ybar_j,rep ~ N(theta_hat_j, sigma_j^2 + V_j)
/// with theta_hat_j, V_j the conditional posterior moments of alpha_j.
class TwoLevelNormalModel final : public Model {
public:
    explicit TwoLevelNormalModel(HierarchicalStats stats, ModelConfig config = {});

    std::vector<std::string> parameter_names() const override { return {"mu", "sigma_alpha"}; }
    void validate_point(const ParamPoint& p, bool full = false) const override;
    double kl(const ParamPoint& from, const ParamPoint& to) const override;
    double log_pred_full(double y, std::size_t group = 0) const override;
    LogPredictive log_pred_restricted(const ParamPoint& tilde, double y, std::size_t group = 0) const override;
    Posterior posterior() const override { return post_; }
    ParamPoint sample_posterior(RngEngine& engine) const override;

    std::size_t groups() const { return data_.ybar.size(); }
    const HierarchicalStats& data() const { return data_; }
    const HierarchicalPosterior& grid_posterior() const { return post_; }

    /// Predictive mean and variance of group j given (mu, tau): mean = a + b*mu.
    struct GroupPredictive {
        double a = 0.0;
        double b = 0.0;
        double var = 0.0;
    };
    GroupPredictive group_predictive(std::size_t j, double tau) const;

private:
    HierarchicalStats data_;
    HierarchicalPosterior post_;
    std::vector<double> cumulative_;
};

std::unique_ptr<Model> make_model(FamilyKind kind, const SufficientStats& stats, ModelConfig config = {});

}  // namespace ripe
