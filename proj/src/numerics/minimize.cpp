#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ripe/error.hpp"
#include "ripe/numerics.hpp"

namespace ripe {
namespace {

constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt 5) / 2
constexpr double kEps = std::numeric_limits<double>::epsilon();

double copy_sign(double magnitude, double sign_of) { return sign_of >= 0.0 ? std::abs(magnitude) : -std::abs(magnitude); }

double checked(double v)
{
    if (std::isnan(v)) {
        throw Error(ErrorCode::NonFiniteObjective, "objective returned NaN");
    }
    return v;
}

// Brent's zeroin with an optional early exit on |f| <= ftol.
double zeroin(const ScalarFunction& f, double a, double b, double fa, double fb, double xtol,
              double ftol, int max_iterations, bool& converged)
{
    converged = false;
    if (fa == 0.0) {
        converged = true;
        return a;
    }
    if (fb == 0.0) {
        converged = true;
        return b;
    }
    double c = a;
    double fc = fa;
    double d = b - a;
    double e = d;
    for (int iter = 0; iter < max_iterations; ++iter) {
        if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * kEps * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(fb) <= ftol) {
            converged = true;
            return b;
        }
        if (std::abs(xm) <= tol1 || fb == 0.0) {
            converged = ftol <= 0.0 || std::abs(fb) <= ftol;
            return b;
        }
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            const double s = fb / fa;
            double p = 0.0;
            double q = 0.0;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) {
                q = -q;
            }
            p = std::abs(p);
            const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
            const double min2 = std::abs(e * q);
            if (2.0 * p < std::min(min1, min2)) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += std::abs(d) > tol1 ? d : copy_sign(tol1, xm);
        fb = checked(f(b));
    }
    return b;
}

// Solve f'(x) = 0 near x0 when the derivative changes sign around it.
bool polish_with_derivative(const ScalarFunction& df, Interval bracket, double x0, double tol,
                            double& root)
{
    double step = std::max(tol * std::abs(x0), 1e-12 * bracket.width());
    for (int i = 0; i < 60; ++i) {
        const double lo = std::max(bracket.lo, x0 - step);
        const double hi = std::min(bracket.hi, x0 + step);
        const double dlo = df(lo);
        const double dhi = df(hi);
        if (std::isfinite(dlo) && std::isfinite(dhi) && dlo <= 0.0 && dhi >= 0.0) {
            bool ok = false;
            root = zeroin(df, lo, hi, dlo, dhi, 4.0 * kEps * std::abs(x0), 0.0, 200, ok);
            return true;
        }
        if (lo == bracket.lo && hi == bracket.hi) {
            return false;
        }
        step *= 4.0;
    }
    return false;
}

}  // namespace

MinimizeResult minimize_1d(const ScalarFunction& f, Interval bracket, double tol,
                           const ScalarFunction& derivative)
{
    if (!(bracket.lo < bracket.hi) || !bracket.finite()) {
        throw Error(ErrorCode::BracketInvalid, "minimization bracket is empty, reversed or infinite");
    }
    const double abs_floor = 1e-12 * bracket.width();
    double a = bracket.lo;
    double b = bracket.hi;
    double x = a + kGolden * (b - a);
    double w = x;
    double v = x;
    int evals = 0;
    auto eval = [&](double at) {
        ++evals;
        return checked(f(at));
    };
    double fx = eval(x);
    double fw = fx;
    double fv = fx;
    double d = 0.0;
    double e = 0.0;
    bool converged = false;

    for (int iter = 0; iter < 500; ++iter) {
        const double m = 0.5 * (a + b);
        const double tol1 = tol * std::abs(x) + abs_floor;
        const double tol2 = 2.0 * tol1;
        if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) {
            converged = true;
            break;
        }
        bool golden = true;
        if (std::abs(e) > tol1) {
            double r = (x - w) * (fx - fv);
            double q = (x - v) * (fx - fw);
            double p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if (q > 0.0) {
                p = -p;
            } else {
                q = -q;
            }
            const double etemp = e;
            e = d;
            if (!(std::abs(p) >= std::abs(0.5 * q * etemp) || p <= q * (a - x) || p >= q * (b - x))) {
                d = p / q;
                const double u = x + d;
                if (u - a < tol2 || b - u < tol2) {
                    d = copy_sign(tol1, m - x);
                }
                golden = false;
            }
        }
        if (golden) {
            e = (x >= m) ? a - x : b - x;
            d = kGolden * e;
        }
        const double u = std::abs(d) >= tol1 ? x + d : x + copy_sign(tol1, d);
        const double fu = eval(u);
        if (fu <= fx) {
            if (u >= x) {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if (u < x) {
                a = u;
            } else {
                b = u;
            }
            if (fu <= fw || w == x) {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if (fu <= fv || v == x || v == w) {
                v = u;
                fv = fu;
            }
        }
    }

    if (derivative) {
        double root = x;
        if (polish_with_derivative(derivative, bracket, x, tol, root)) {
            const double froot = eval(root);
            if (froot <= fx + 64.0 * kEps * (1.0 + std::abs(fx))) {
                x = root;
                fx = froot;
            }
        }
    }

    MinimizeResult result;
    result.argmin = {x};
    result.min_value = fx;
    result.evaluations = evals;
    result.converged = converged;
    return result;
}

MinimizeResult minimize_1d_scan(const ScalarFunction& f, Interval bracket, double tol,
                                const ScalarFunction& derivative, int scan_points)
{
    if (!(bracket.lo < bracket.hi) || !bracket.finite()) {
        throw Error(ErrorCode::BracketInvalid, "minimization bracket is empty, reversed or infinite");
    }
    scan_points = std::max(scan_points, 3);
    const double h = bracket.width() / (scan_points - 1);
    std::vector<double> xs(static_cast<std::size_t>(scan_points));
    std::vector<double> fs(xs.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        xs[i] = i + 1 == xs.size() ? bracket.hi : bracket.lo + h * static_cast<double>(i);
        fs[i] = checked(f(xs[i]));
        if (fs[i] < fs[best]) {  // strict: ties keep the smaller x
            best = i;
        }
    }
    const std::size_t lo_i = best == 0 ? 0 : best - 1;
    const std::size_t hi_i = std::min(best + 1, xs.size() - 1);
    MinimizeResult r = minimize_1d(f, {xs[lo_i], xs[hi_i]}, tol, derivative);
    r.evaluations += scan_points;
    if (fs[best] < r.min_value) {
        r.argmin = {xs[best]};
        r.min_value = fs[best];
    }
    return r;
}

MinimizeResult minimize_nd(const VectorFunction& f, std::span<const double> start,
                           std::span<const double> scale, const NelderMeadOptions& options)
{
    const std::size_t dim = start.size();
    if (dim == 0 || scale.size() != dim) {
        throw Error(ErrorCode::InvalidArgument, "minimize_nd needs matching nonempty start and scale");
    }
    for (double s : scale) {
        if (!(s > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "minimize_nd scale entries must be positive");
        }
    }

    int evals = 0;
    auto eval = [&](const std::vector<double>& x) {
        ++evals;
        const double v = f(std::span<const double>(x));
        if (std::isnan(v)) {
            throw Error(ErrorCode::NonFiniteObjective, "objective returned NaN");
        }
        return v;
    };

    std::vector<double> best(start.begin(), start.end());
    double best_value = eval(best);
    bool converged = false;

    for (int round = 0; round <= options.restarts; ++round) {
        const double step_factor = round == 0 ? 1.0 : 0.05;
        std::vector<std::vector<double>> simplex(dim + 1, best);
        std::vector<double> values(dim + 1, best_value);
        for (std::size_t i = 0; i < dim; ++i) {
            simplex[i + 1][i] += step_factor * scale[i];
            values[i + 1] = eval(simplex[i + 1]);
        }

        converged = false;
        std::vector<std::size_t> order(dim + 1);
        std::vector<double> centroid(dim);
        std::vector<double> trial(dim);
        std::vector<double> trial2(dim);
        while (evals < options.max_evaluations) {
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t l, std::size_t r) { return values[l] < values[r]; });
            const std::size_t lo = order.front();
            const std::size_t hi = order.back();
            const std::size_t second = order[dim - 1];

            double diameter = 0.0;
            for (std::size_t v = 0; v <= dim; ++v) {
                for (std::size_t k = 0; k < dim; ++k) {
                    diameter = std::max(diameter, std::abs(simplex[v][k] - simplex[lo][k]) / scale[k]);
                }
            }
            if (diameter <= options.tol) {
                converged = true;
                break;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t v = 0; v <= dim; ++v) {
                if (v == hi) {
                    continue;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    centroid[k] += simplex[v][k] / static_cast<double>(dim);
                }
            }
            for (std::size_t k = 0; k < dim; ++k) {
                trial[k] = centroid[k] + (centroid[k] - simplex[hi][k]);
            }
            const double fr = eval(trial);
            if (fr < values[lo]) {
                for (std::size_t k = 0; k < dim; ++k) {
                    trial2[k] = centroid[k] + 2.0 * (centroid[k] - simplex[hi][k]);
                }
                const double fe = eval(trial2);
                if (fe < fr) {
                    simplex[hi] = trial2;
                    values[hi] = fe;
                } else {
                    simplex[hi] = trial;
                    values[hi] = fr;
                }
                continue;
            }
            if (fr < values[second]) {
                simplex[hi] = trial;
                values[hi] = fr;
                continue;
            }
            const bool outside = fr < values[hi];
            for (std::size_t k = 0; k < dim; ++k) {
                trial2[k] = outside ? centroid[k] + 0.5 * (trial[k] - centroid[k])
                                    : centroid[k] + 0.5 * (simplex[hi][k] - centroid[k]);
            }
            const double fc = eval(trial2);
            if (fc < std::min(fr, values[hi])) {
                simplex[hi] = trial2;
                values[hi] = fc;
                continue;
            }
            for (std::size_t v = 0; v <= dim; ++v) {
                if (v == lo) {
                    continue;
                }
                for (std::size_t k = 0; k < dim; ++k) {
                    simplex[v][k] = simplex[lo][k] + 0.5 * (simplex[v][k] - simplex[lo][k]);
                }
                values[v] = eval(simplex[v]);
            }
        }

        const auto it = std::min_element(values.begin(), values.end());
        const std::size_t idx = static_cast<std::size_t>(it - values.begin());
        const bool improved = values[idx] < best_value;
        if (values[idx] <= best_value) {
            best = simplex[idx];
            best_value = values[idx];
        }
        if (!converged) {
            break;
        }
        if (round > 0 && !improved) {
            break;
        }
    }

    if (!converged) {
        throw Error(ErrorCode::NonConvergence,
                    "Nelder-Mead did not converge within " + std::to_string(options.max_evaluations) +
                        " evaluations");
    }

    MinimizeResult result;
    result.min_value = eval(best);
    result.argmin = std::move(best);
    result.evaluations = evals;
    result.converged = true;
    return result;
}

double find_root(const ScalarFunction& f, Interval bracket, double xtol, int max_iterations)
{
    if (!(bracket.lo <= bracket.hi)) {
        throw Error(ErrorCode::BracketInvalid, "root bracket is reversed");
    }
    const double fa = checked(f(bracket.lo));
    const double fb = checked(f(bracket.hi));
    if ((fa > 0.0 && fb > 0.0) || (fa < 0.0 && fb < 0.0)) {
        throw Error(ErrorCode::TargetNotBracketed, "root is not bracketed");
    }
    bool ok = false;
    return zeroin(f, bracket.lo, bracket.hi, fa, fb, xtol, 0.0, max_iterations, ok);
}

double find_threshold(const ScalarFunction& g, double target, Interval bracket, double tol)
{
    if (!(bracket.lo <= bracket.hi)) {
        throw Error(ErrorCode::BracketInvalid, "threshold bracket is reversed");
    }
    const double glo = checked(g(bracket.lo)) - target;
    if (std::abs(glo) <= tol) {
        return bracket.lo;
    }
    const double ghi = checked(g(bracket.hi)) - target;
    if (std::abs(ghi) <= tol) {
        return bracket.hi;
    }
    if (glo > 0.0 || ghi < 0.0) {
        throw Error(ErrorCode::TargetNotBracketed, "threshold target is not bracketed");
    }
    auto h = [&](double l) { return g(l) - target; };
    bool ok = false;
    const double l = zeroin(h, bracket.lo, bracket.hi, glo, ghi, 0.0, tol, 400, ok);
    if (!ok) {
        throw Error(ErrorCode::NonConvergence, "threshold search stalled before reaching tolerance");
    }
    return l;
}

}  // namespace ripe
