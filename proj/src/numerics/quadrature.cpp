#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "ripe/error.hpp"
#include "ripe/numerics.hpp"

namespace ripe {
namespace {

// Kronrod 21-point abscissae; odd indices are the embedded 10-point Gauss nodes.
constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
};

constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208980161336, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
};

constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
};

enum class MapKind { Finite, UpperTail, LowerTail, WholeLine };

// One panel of the original domain, expressed on a finite t-interval.
struct Panel {
    MapKind kind = MapKind::Finite;
    double anchor = 0.0;
};

struct Segment {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double error = 0.0;
    std::size_t panel = 0;
};

class Integrator {
public:
    Integrator(const ScalarFunction& f, std::vector<Panel> panels)
        : f_(f), panels_(std::move(panels))
    {
    }

    Segment evaluate(std::size_t panel, double a, double b)
    {
        const double centre = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        const double abs_half = std::abs(half);

        const double fc = eval(panel, centre);
        double resg = 0.0;
        double resk = kWgk[10] * fc;
        double resabs = std::abs(resk);
        std::array<double, 10> f1{};
        std::array<double, 10> f2{};
        for (int j = 0; j < 5; ++j) {
            const int jtw = 2 * j + 1;
            const double dx = half * kXgk[jtw];
            const double v1 = eval(panel, centre - dx);
            const double v2 = eval(panel, centre + dx);
            f1[jtw] = v1;
            f2[jtw] = v2;
            resg += kWg[j] * (v1 + v2);
            resk += kWgk[jtw] * (v1 + v2);
            resabs += kWgk[jtw] * (std::abs(v1) + std::abs(v2));
        }
        for (int j = 0; j < 5; ++j) {
            const int jtwm1 = 2 * j;
            const double dx = half * kXgk[jtwm1];
            const double v1 = eval(panel, centre - dx);
            const double v2 = eval(panel, centre + dx);
            f1[jtwm1] = v1;
            f2[jtwm1] = v2;
            resk += kWgk[jtwm1] * (v1 + v2);
            resabs += kWgk[jtwm1] * (std::abs(v1) + std::abs(v2));
        }
        const double reskh = 0.5 * resk;
        double resasc = kWgk[10] * std::abs(fc - reskh);
        for (int j = 0; j < 10; ++j) {
            resasc += kWgk[j] * (std::abs(f1[j] - reskh) + std::abs(f2[j] - reskh));
        }

        Segment s;
        s.a = a;
        s.b = b;
        s.panel = panel;
        s.value = resk * half;
        resabs *= abs_half;
        resasc *= abs_half;
        double err = std::abs((resk - resg) * half);
        if (resasc != 0.0 && err != 0.0) {
            err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
        }
        constexpr double eps = std::numeric_limits<double>::epsilon();
        if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
            err = std::max(50.0 * eps * resabs, err);
        }
        s.error = err;
        return s;
    }

    int evaluations() const { return evaluations_; }

private:
    double eval(std::size_t panel, double t)
    {
        const Panel& p = panels_[panel];
        double x = t;
        double jac = 1.0;
        switch (p.kind) {
        case MapKind::Finite:
            break;
        case MapKind::UpperTail: {
            const double u = 1.0 - t;
            x = p.anchor + t / u;
            jac = 1.0 / (u * u);
            break;
        }
        case MapKind::LowerTail: {
            const double u = 1.0 - t;
            x = p.anchor - t / u;
            jac = 1.0 / (u * u);
            break;
        }
        case MapKind::WholeLine: {
            const double u = 1.0 - t * t;
            x = t / u;
            jac = (1.0 + t * t) / (u * u);
            break;
        }
        }
        ++evaluations_;
        const double v = f_(x);
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFiniteIntegrand,
                        "integrand is not finite at x = " + std::to_string(x));
        }
        return v * jac;
    }

    const ScalarFunction& f_;
    std::vector<Panel> panels_;
    int evaluations_ = 0;
};

}  // namespace

QuadratureResult integrate_1d(const ScalarFunction& f, const QuadratureSpec& spec)
{
    const Interval dom = spec.domain;
    if (!(dom.lo < dom.hi) || !(spec.abs_tol > 0.0) || !(spec.rel_tol > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "invalid quadrature domain or tolerances");
    }

    std::vector<double> cuts;
    cuts.push_back(dom.lo);
    for (double bp : spec.breakpoints) {
        if (bp > dom.lo && bp < dom.hi && std::isfinite(bp)) {
            cuts.push_back(bp);
        }
    }
    cuts.push_back(dom.hi);
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::vector<Panel> panels;
    struct Range {
        double a;
        double b;
    };
    std::vector<Range> ranges;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double a = cuts[i];
        const double b = cuts[i + 1];
        if (std::isinf(a) && std::isinf(b)) {
            panels.push_back({MapKind::WholeLine, 0.0});
            ranges.push_back({-1.0, 1.0});
        } else if (std::isinf(b)) {
            panels.push_back({MapKind::UpperTail, a});
            ranges.push_back({0.0, 1.0});
        } else if (std::isinf(a)) {
            panels.push_back({MapKind::LowerTail, b});
            ranges.push_back({0.0, 1.0});
        } else {
            panels.push_back({MapKind::Finite, 0.0});
            ranges.push_back({a, b});
        }
    }

    Integrator integrator(f, panels);
    std::vector<Segment> heap;
    heap.reserve(static_cast<std::size_t>(spec.max_subdivisions) + panels.size() + 2);
    const auto by_error = [](const Segment& l, const Segment& r) { return l.error < r.error; };
    for (std::size_t i = 0; i < panels.size(); ++i) {
        heap.push_back(integrator.evaluate(i, ranges[i].a, ranges[i].b));
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    int subdivisions = 0;
    while (true) {
        double total = 0.0;
        double err = 0.0;
        for (const Segment& s : heap) {
            total += s.value;
            err += s.error;
        }
        if (err <= std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
            return {total, err, integrator.evaluations()};
        }
        if (subdivisions >= spec.max_subdivisions) {
            throw Error(ErrorCode::NonConvergence,
                        "quadrature subdivision budget exhausted (error estimate " +
                            std::to_string(err) + ")");
        }
        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            throw Error(ErrorCode::NonConvergence, "quadrature segment cannot be bisected further");
        }
        heap.push_back(integrator.evaluate(worst.panel, worst.a, mid));
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(integrator.evaluate(worst.panel, mid, worst.b));
        std::push_heap(heap.begin(), heap.end(), by_error);
        ++subdivisions;
    }
}

QuadratureResult integrate_1d(const ScalarFunction& f, Interval domain)
{
    QuadratureSpec spec;
    spec.domain = domain;
    return integrate_1d(f, spec);
}

}  // namespace ripe
