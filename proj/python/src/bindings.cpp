#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jdan/copula.hpp"
#include "jdan/metrics.hpp"
#include "jdan/miso.hpp"
#include "jdan/model_io.hpp"
#include "jdan/verify.hpp"

namespace py = pybind11;
using namespace jdan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

//! Applies f to each row of a (n, dim) or (dim,) array.
template <class F>
py::object map_rows(const Array& y, std::size_t dim, F f)
{
    if (y.ndim() == 1) {
        if (static_cast<std::size_t>(y.shape(0)) != dim)
            throw ContractError("expected a point of dimension " + std::to_string(dim));
        return py::float_(f(std::span<const double>(y.data(), dim)));
    }
    if (y.ndim() != 2 || static_cast<std::size_t>(y.shape(1)) != dim)
        throw ContractError("expected an array of shape (n, " + std::to_string(dim) + ")");
    const auto n = static_cast<std::size_t>(y.shape(0));
    py::array_t<double> out(static_cast<py::ssize_t>(n));
    auto o = out.mutable_unchecked<1>();
    for (std::size_t i = 0; i < n; ++i)
        o(static_cast<py::ssize_t>(i)) = f(std::span<const double>(y.data() + i * dim, dim));
    return out;
}

py::array_t<double> to_array(const Matrix& m)
{
    py::array_t<double> out({static_cast<py::ssize_t>(m.rows), static_cast<py::ssize_t>(m.cols)});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

std::vector<double> to_vector(const Array& x)
{
    if (x.ndim() != 1)
        throw ContractError("expected a one-dimensional array");
    return {x.data(), x.data() + x.shape(0)};
}

Dataset dataset_from(const Array& features, const Array& targets)
{
    if (features.ndim() != 2 || targets.ndim() != 2)
        throw ContractError("features and targets must be two-dimensional");
    Matrix f(static_cast<std::size_t>(features.shape(0)), static_cast<std::size_t>(features.shape(1)));
    Matrix t(static_cast<std::size_t>(targets.shape(0)), static_cast<std::size_t>(targets.shape(1)));
    std::copy_n(features.data(), f.data.size(), f.data.begin());
    std::copy_n(targets.data(), t.data.size(), t.data.begin());
    return Dataset::from_arrays(std::move(f), std::move(t));
}

py::dict report_dict(const VerifyReport& r)
{
    py::list checks;
    for (const auto& c : r.checks)
        checks.append(py::dict(py::arg("name") = c.name, py::arg("passed") = c.passed,
                               py::arg("evaluated") = c.evaluated, py::arg("detail") = c.detail));
    return py::dict(py::arg("ok") = r.ok(), py::arg("checks") = checks);
}

VerifyLevel parse_level(const std::string& level)
{
    if (level == "quick")
        return VerifyLevel::Quick;
    if (level == "full")
        return VerifyLevel::Full;
    throw ConfigError("verify level must be 'quick' or 'full'");
}

} // namespace

PYBIND11_MODULE(_jdan, m)
{
    m.doc() = "Joint density networks: monotone marginals coupled by an FGM copula.";

    auto error = py::register_exception<Error>(m, "JdanError", PyExc_RuntimeError);
    py::register_exception<ContractError>(m, "ContractError", error.ptr());
    py::register_exception<DomainError>(m, "DomainError", error.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", error.ptr());
    py::register_exception<DataError>(m, "DataError", error.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", error.ptr());

    py::class_<Bounds>(m, "Bounds")
        .def(py::init<double, double>(), py::arg("lower"), py::arg("upper"))
        .def_readonly("lower", &Bounds::lower)
        .def_readonly("upper", &Bounds::upper)
        .def("__repr__", [](const Bounds& b) {
            return "Bounds(" + std::to_string(b.lower) + ", " + std::to_string(b.upper) + ")";
        });

    py::class_<JdanModel>(m, "JointModel")
        .def_static(
            "from_json", [](const std::string& text) { return model_from_json(nlohmann::json::parse(text)); },
            py::arg("text"))
        .def("to_json", [](const JdanModel& model) { return to_json(model).dump(); })
        .def_property_readonly("dim", &JdanModel::dim)
        .def_property_readonly("bounds", [](const JdanModel& model) { return model.layout().bounds; })
        .def_property_readonly("correlations", [](const JdanModel& model) {
            const auto c = model.correlations();
            return std::vector<double>(c.begin(), c.end());
        })
        .def("cdf",
             [](const JdanModel& model, const Array& y) {
                 return map_rows(y, model.dim(), [&](std::span<const double> p) { return joint_cdf(model, p); });
             },
             py::arg("y"), "Joint CDF at a point or at each row of an (n, D) array.")
        .def("pdf",
             [](const JdanModel& model, const Array& y) {
                 return map_rows(y, model.dim(), [&](std::span<const double> p) { return joint_pdf(model, p); });
             },
             py::arg("y"), "Joint density at a point or at each row of an (n, D) array.")
        .def("sample", [](const JdanModel& model, std::size_t n, std::uint64_t seed) { return to_array(sample(model, n, seed)); },
             py::arg("n"), py::arg("seed") = 0)
        .def("verify",
             [](const JdanModel& model, const std::string& level, std::uint64_t seed) {
                 return report_dict(verify_model(model, parse_level(level), seed));
             },
             py::arg("level") = "quick", py::arg("seed") = 0);

    py::class_<Forecaster>(m, "Forecaster")
        .def(py::init<JdanModel>(), py::arg("model"), "Unconditional forecaster around one fixed model.")
        .def_property_readonly("dim", &Forecaster::dim)
        .def_property_readonly("feature_dim", &Forecaster::feature_dim)
        .def_property_readonly("conditional", &Forecaster::conditional)
        .def_property_readonly("bounds", &Forecaster::bounds)
        .def(
            "model_for", [](const Forecaster& f, const Array& x) { return f.model_for(to_vector(x)); },
            py::arg("x") = Array(0), "Joint model for one raw feature vector.")
        .def(
            "evaluate",
            [](const Forecaster& f, const Array& features, const Array& targets, std::size_t samples,
               std::uint64_t seed) {
                const auto r = evaluate(f, dataset_from(features, targets), samples, seed);
                return py::dict(py::arg("log_score") = r.log_score, py::arg("crps") = r.crps,
                                py::arg("pit_ks") = r.pit_ks, py::arg("energy_score") = r.energy_score,
                                py::arg("n_evaluated") = r.n_evaluated,
                                py::arg("n_excluded_log_score") = r.n_excluded_log_score);
            },
            py::arg("features"), py::arg("targets"), py::arg("samples") = 200, py::arg("seed") = 0)
        .def(
            "verify",
            [](const Forecaster& f, const std::string& level, std::uint64_t seed) {
                return report_dict(verify_forecaster(f, parse_level(level), seed));
            },
            py::arg("level") = "quick", py::arg("seed") = 0);

    m.def(
        "load_model", [](const std::string& path) { return load_model(path).forecaster; }, py::arg("path"),
        "Reads a model file written by `jdan train`.");

    m.def(
        "copula_cdf",
        [](std::size_t dim, const std::vector<double>& raw, const Array& u) {
            const CorrelationParams corr{dim, raw};
            return map_rows(u, dim, [&](std::span<const double> p) { return copula_cdf(corr, p); });
        },
        py::arg("dim"), py::arg("raw"), py::arg("u"), "FGM copula CDF for unconstrained pair parameters.");
    m.def(
        "copula_density",
        [](std::size_t dim, const std::vector<double>& raw, const Array& u) {
            const CorrelationParams corr{dim, raw};
            return map_rows(u, dim, [&](std::span<const double> p) { return copula_density(corr, p); });
        },
        py::arg("dim"), py::arg("raw"), py::arg("u"));

    m.def(
        "find_negative_witness",
        [](const std::string& activation, std::size_t dim, std::size_t hidden, std::uint64_t seed,
           std::size_t max_trials) -> py::dict {
            const auto r = find_negative_witness({parse_activation(activation), dim, hidden, seed, max_trials});
            py::dict out(py::arg("trials_run") = r.trials_run, py::arg("skipped_nonfinite") = r.skipped_nonfinite);
            if (r.witness) {
                out["witness"] = py::dict(py::arg("trial") = r.witness->trial, py::arg("y") = r.witness->y,
                                          py::arg("p") = r.witness->p, py::arg("q") = r.witness->q,
                                          py::arg("value") = r.witness->value);
            } else {
                out["witness"] = py::none();
            }
            return out;
        },
        py::arg("activation"), py::arg("dim") = 2, py::arg("hidden") = 8, py::arg("seed") = 0,
        py::arg("max_trials") = 10000, "Random search for a negative mixed partial of a multi-input network.");
}
