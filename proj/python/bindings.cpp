#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ripe/coverage.hpp"
#include "ripe/error.hpp"
#include "ripe/estimate.hpp"
#include "ripe/models.hpp"
#include "ripe/regions.hpp"

namespace py = pybind11;
using namespace ripe;

namespace {

PyObject* g_error_type = nullptr;

EstimateOptions options(const std::string& evaluation, std::size_t mc_samples, std::uint64_t seed)
{
    EstimateOptions o;
    o.mc_samples = mc_samples;
    o.stream = {seed, 0};
    if (evaluation == "mc") {
        o.evaluation = Evaluation::MonteCarlo;
    } else if (evaluation != "exact") {
        throw Error(ErrorCode::InvalidArgument, "evaluation must be 'exact' or 'mc'", "evaluation");
    }
    return o;
}

py::dict named(const Model& m, const ParamPoint& p)
{
    py::dict d;
    const auto names = m.parameter_names();
    for (std::size_t i = 0; i < names.size() && i < p.size(); ++i) {
        d[py::str(names[i])] = p[i];
    }
    return d;
}

std::shared_ptr<Model> build(const std::string& family, std::optional<std::vector<double>> data,
                             std::optional<int> n, std::optional<int> r, std::optional<double> t,
                             std::optional<double> ybar, std::optional<double> msd,
                             std::optional<std::vector<double>> group_means,
                             std::optional<std::vector<double>> group_sigmas, const std::string& prior)
{
    const FamilyKind kind = parse_family(family);
    ModelConfig config;
    if (prior == "sigma") {
        config.normal_prior = NormalPrior::SigmaMeasure;
    } else if (prior != "variance") {
        throw Error(ErrorCode::InvalidArgument, "prior must be 'variance' or 'sigma'", "prior");
    }
    auto need = [](const auto& v, const char* field) {
        if (!v) {
            throw Error(ErrorCode::InvalidArgument, std::string(field) + " is required", field);
        }
        return *v;
    };
    if (kind == FamilyKind::TwoLevelNormal) {
        return make_model(kind, HierarchicalStats{need(group_means, "group_means"), need(group_sigmas, "group_sigmas")},
                          config);
    }
    if (data) {
        return make_model(kind, sufficient_stats(kind, *data), config);
    }
    switch (kind) {
    case FamilyKind::Binomial: return make_model(kind, BinomialStats{need(n, "n"), need(r, "r")}, config);
    case FamilyKind::Exponential: return make_model(kind, ExponentialStats{need(n, "n"), need(t, "t")}, config);
    case FamilyKind::UniformScale: return make_model(kind, UniformStats{need(n, "n"), need(t, "t")}, config);
    default: return make_model(kind, NormalStats{need(n, "n"), need(ybar, "ybar"), need(msd, "msd")}, config);
    }
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bayesian point estimates and lowest posterior loss regions";

    static py::exception<Error> error_type(m, "RipeError", PyExc_ValueError);
    g_error_type = error_type.ptr();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) {
                std::rethrow_exception(p);
            }
        } catch (const Error& e) {
            py::object exc = py::reinterpret_borrow<py::object>(g_error_type)(e.what());
            exc.attr("code") = std::string(error_code_name(e.code()));
            exc.attr("field") = e.field().empty() ? py::none() : py::object(py::str(e.field()));
            PyErr_SetObject(g_error_type, exc.ptr());
        }
    });

    py::class_<Model, std::shared_ptr<Model>>(m, "Model")
        .def(py::init(&build), py::arg("family"), py::kw_only(), py::arg("data") = py::none(),
             py::arg("n") = py::none(), py::arg("r") = py::none(), py::arg("t") = py::none(),
             py::arg("ybar") = py::none(), py::arg("msd") = py::none(), py::arg("group_means") = py::none(),
             py::arg("group_sigmas") = py::none(), py::arg("prior") = "variance")
        .def_property_readonly("family", [](const Model& self) { return std::string(family_name(self.kind())); })
        .def_property_readonly("parameter_names", &Model::parameter_names)
        .def("kl", &Model::kl, py::arg("a"), py::arg("b"),
             "Per-observation KL divergence of the model at b from the model at a.");

    m.def(
        "estimate",
        [](const Model& model, const std::string& method, const std::string& evaluation, std::size_t mc_samples,
           std::uint64_t seed) {
            const auto r = point_estimate(model, parse_method(method), options(evaluation, mc_samples, seed));
            py::dict d;
            d["method"] = std::string(method_name(r.method));
            d["point"] = named(model, r.point);
            d["expected_loss"] = r.expected_loss;
            d["closed_form_used"] = r.diagnostics.closed_form_used;
            d["mc_stderr"] = r.diagnostics.mc_stderr;
            d["evaluations"] = r.diagnostics.evaluations;
            return d;
        },
        py::arg("model"), py::arg("method") = "pc", py::arg("evaluation") = "exact", py::arg("mc_samples") = 200000,
        py::arg("seed") = 0);

    m.def(
        "expected_loss",
        [](const Model& model, const std::string& method, const std::vector<double>& point) {
            return make_loss(model, parse_method(method))->value(point);
        },
        py::arg("model"), py::arg("method"), py::arg("point"));

    m.def(
        "loss_curve",
        [](const Model& model, const std::string& method, const std::vector<std::vector<double>>& grid) {
            const auto c = loss_curve(model, parse_method(method), grid);
            return py::make_tuple(c.values, c.flags);
        },
        py::arg("model"), py::arg("method"), py::arg("grid"));

    m.def(
        "region",
        [](const Model& model, const std::string& method, double level) {
            const auto r = lpl_region(model, parse_method(method), level);
            py::dict d;
            d["method"] = std::string(method_name(r.method));
            d["level"] = r.level;
            d["threshold"] = r.threshold;
            d["mass"] = r.mass;
            d["estimate"] = named(model, r.estimate);
            if (r.mask) {
                std::vector<std::tuple<double, double, double>> runs;
                for (const auto& run : r.mask->runs()) {
                    runs.emplace_back(run.y, run.x_lo, run.x_hi);
                }
                d["runs"] = runs;
                d["cells"] = r.mask->count();
            } else {
                std::vector<std::pair<double, double>> iv;
                for (const auto& i : r.intervals) {
                    iv.emplace_back(i.lo, i.hi);
                }
                d["intervals"] = iv;
            }
            return d;
        },
        py::arg("model"), py::arg("method"), py::arg("level") = 0.95);

    m.def(
        "binomial_coverage",
        [](int n, const std::string& method, double level) {
            const auto p = binomial_coverage_exact(n, parse_method(method), level);
            py::dict d;
            d["theta"] = p.theta;
            d["coverage"] = p.coverage;
            d["average_coverage"] = p.average_coverage;
            d["weighting"] = p.weighting;
            return d;
        },
        py::arg("n"), py::arg("method"), py::arg("level") = 0.95);

    m.def(
        "mc_coverage",
        [](const std::string& family, const std::vector<double>& theta, int n, const std::string& method, double level,
           std::size_t replications, std::uint64_t seed) {
            const auto c = mc_coverage(parse_family(family), theta, n, parse_method(method), level, replications,
                                       {seed, 0});
            return py::make_tuple(c.coverage, c.std_error);
        },
        py::arg("family"), py::arg("theta"), py::arg("n"), py::arg("method"), py::arg("level") = 0.95,
        py::arg("replications") = 1000, py::arg("seed") = 0);
}
