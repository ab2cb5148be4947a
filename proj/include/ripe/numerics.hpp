#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace ripe {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval; either endpoint may be infinite.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool valid() const { return lo < hi; }
    bool finite() const { return lo > -kInf && hi < kInf; }
    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }
};

using ScalarFunction = std::function<double(double)>;
using VectorFunction = std::function<double(std::span<const double>)>;

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

struct QuadratureSpec {
    double abs_tol = 1e-10;
    double rel_tol = 1e-8;
    int max_subdivisions = 400;
    Interval domain{0.0, 1.0};
    /// Interior points where the integrand has kinks or jumps. Each one
    /// starts a separate panel so no Kronrod rule straddles it.
    std::vector<double> breakpoints;
};

struct QuadratureResult {
    double value = 0.0;
    double err_est = 0.0;
    int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (G10/K21) integration.
///
/// Infinite endpoints are mapped onto a finite panel: x = a + t/(1-t) on a
/// half line and x = t/(1-t^2) on the whole line. Nodes are strictly interior,
/// so integrable endpoint singularities are never evaluated.
///
/// Throws NonConvergence when the subdivision budget runs out before the
/// error estimate reaches max(abs_tol, rel_tol*|value|), and
/// NonFiniteIntegrand when f returns NaN or an infinity at a node.
QuadratureResult integrate_1d(const ScalarFunction& f, const QuadratureSpec& spec);

/// Convenience overload with default tolerances.
QuadratureResult integrate_1d(const ScalarFunction& f, Interval domain);

// ---------------------------------------------------------------------------
// Minimization
// ---------------------------------------------------------------------------

struct MinimizeResult {
    std::vector<double> argmin;
    double min_value = 0.0;
    int evaluations = 0;
    bool converged = false;
};

/// Brent's golden-section/parabolic minimizer on a bracket. `tol` is relative
/// to |x| (with a small absolute floor). If `derivative` is supplied the
/// result is polished by solving f'(x) = 0, which resolves the minimizer
/// below the sqrt(epsilon) limit of pure function comparisons.
MinimizeResult minimize_1d(const ScalarFunction& f, Interval bracket, double tol = 1e-8,
                           const ScalarFunction& derivative = {});

/// Scans `scan_points` equally spaced points first, then polishes with
/// minimize_1d around the best one. For kinked or possibly multimodal
/// objectives. Ties resolve toward the smaller parameter value.
MinimizeResult minimize_1d_scan(const ScalarFunction& f, Interval bracket, double tol = 1e-8,
                                const ScalarFunction& derivative = {}, int scan_points = 64);

struct NelderMeadOptions {
    double tol = 1e-8;
    int max_evaluations = 20000;
    int restarts = 2;
};

/// Nelder-Mead simplex. Terminates when the simplex diameter, measured in
/// units of `scale`, is at most tol.
MinimizeResult minimize_nd(const VectorFunction& f, std::span<const double> start,
                           std::span<const double> scale, const NelderMeadOptions& options = {});

// ---------------------------------------------------------------------------
// Root and threshold search
// ---------------------------------------------------------------------------

/// Brent's root finder. Requires a sign change on the bracket.
double find_root(const ScalarFunction& f, Interval bracket, double xtol = 1e-14,
                 int max_iterations = 200);

/// Solves g(l) = target for nondecreasing g with g(lo) <= target <= g(hi).
/// Returns l with |g(l) - target| <= tol.
double find_threshold(const ScalarFunction& g, double target, Interval bracket, double tol = 1e-10);

}  // namespace ripe
