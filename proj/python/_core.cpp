// Python bindings for the glil engines. Structured reports cross the
// boundary as plain dicts built from their JSON form.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "glil/control_dual.hpp"
#include "glil/error.hpp"
#include "glil/gheat.hpp"
#include "glil/lil.hpp"
#include "glil/payoff.hpp"
#include "glil/strategy.hpp"
#include "glil/sublinear.hpp"

namespace py = pybind11;

namespace {

py::object to_python(const nlohmann::json& j)
{
    return py::module_::import("json").attr("loads")(j.dump());
}

glil::AdversaryStrategy strategy_arg(const std::string& text) { return glil::AdversaryStrategy::parse(text); }

std::vector<glil::AdversaryStrategy> strategy_list(const std::vector<std::string>& texts)
{
    std::vector<glil::AdversaryStrategy> out;
    for (const auto& t : texts) out.push_back(strategy_arg(t));
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Sublinear expectations, G-heat solver, control dual and LIL laboratory";
    m.attr("__version__") = GLIL_VERSION;

    auto error = py::register_exception<glil::Error>(m, "GlilError", PyExc_RuntimeError);
    py::register_exception<glil::InputError>(m, "InputError", error.ptr());
    py::register_exception<glil::ModelError>(m, "ModelError", error.ptr());
    py::register_exception<glil::ConfigError>(m, "ConfigError", error.ptr());
    py::register_exception<glil::NumericError>(m, "NumericError", error.ptr());
    py::register_exception<glil::StrategyViolation>(m, "StrategyViolation", error.ptr());

    py::class_<glil::ExpectationPair>(m, "ExpectationPair")
        .def_readonly("upper", &glil::ExpectationPair::upper)
        .def_readonly("lower", &glil::ExpectationPair::lower)
        .def("__repr__", [](const glil::ExpectationPair& p) {
            return "ExpectationPair(upper=" + std::to_string(p.upper) + ", lower=" + std::to_string(p.lower) + ")";
        });
    py::class_<glil::CapacityPair>(m, "CapacityPair")
        .def_readonly("v_upper", &glil::CapacityPair::v_upper)
        .def_readonly("v_lower", &glil::CapacityPair::v_lower);

    // sublinear core
    py::class_<glil::FinitePriorModel>(m, "FinitePriorModel")
        .def(py::init<std::vector<std::string>, std::vector<std::vector<double>>>(), py::arg("atoms"),
             py::arg("priors"))
        .def_property_readonly("atoms", &glil::FinitePriorModel::atoms)
        .def_property_readonly("priors", &glil::FinitePriorModel::priors)
        .def("event", [](const glil::FinitePriorModel& model, const std::vector<std::string>& names) {
            return model.event(names);
        });
    m.def("upper_expectation", [](const glil::FinitePriorModel& model, const std::vector<double>& rv) {
        return glil::upper_expectation(model, rv);
    });
    m.def("lower_expectation", [](const glil::FinitePriorModel& model, const std::vector<double>& rv) {
        return glil::lower_expectation(model, rv);
    });
    m.def("capacity_pair", [](const glil::FinitePriorModel& model, const std::vector<std::string>& names) {
        return glil::capacity_pair(model, model.event(names));
    });
    m.def("verify_duality", [](const glil::FinitePriorModel& model, const std::vector<std::string>& names) {
        return to_python(glil::to_json(glil::verify_duality(model, model.event(names))));
    });
    m.def("verify_sublinear_axioms",
          [](const glil::FinitePriorModel& model, const std::vector<std::vector<double>>& rvs) {
              return to_python(glil::to_json(glil::verify_sublinear_axioms(model, rvs)));
          });

    py::class_<glil::ProductCoinModel>(m, "ProductCoinModel")
        .def(py::init<double, double, std::size_t>(), py::arg("p_lo"), py::arg("p_hi"), py::arg("horizon"))
        .def(py::init<std::vector<double>, std::vector<double>>(), py::arg("p_lo"), py::arg("p_hi"))
        .def_property_readonly("horizon", &glil::ProductCoinModel::horizon);
    m.def("bc_convergent_check", [](const glil::ProductCoinModel& coin, std::size_t n, std::size_t horizon) {
        return to_python(glil::to_json(glil::bc_convergent_check(coin, n, horizon)));
    });
    m.def("bc_divergent_check", [](const glil::ProductCoinModel& coin, std::size_t n, std::size_t horizon) {
        return to_python(glil::to_json(glil::bc_divergent_check(coin, n, horizon)));
    });

    // G-heat solver
    py::class_<glil::VolatilityBand>(m, "VolatilityBand")
        .def(py::init<double, double>(), py::arg("lo"), py::arg("hi"))
        .def_property_readonly("lo", &glil::VolatilityBand::lo)
        .def_property_readonly("hi", &glil::VolatilityBand::hi);
    py::class_<glil::PayoffSpec>(m, "PayoffSpec")
        .def(py::init<std::vector<double>, std::vector<double>, std::string>(), py::arg("xs"), py::arg("values"),
             py::arg("name") = "custom")
        .def_static("parse", &glil::parse_payoff, py::arg("descriptor"))
        .def("__call__", &glil::PayoffSpec::operator())
        .def_property_readonly("name", &glil::PayoffSpec::name)
        .def_property_readonly("xs", &glil::PayoffSpec::xs)
        .def_property_readonly("values", &glil::PayoffSpec::values);
    m.def("g_eval", &glil::g_eval, py::arg("band"), py::arg("x"));
    m.def(
        "gnormal_pair",
        [](const glil::PayoffSpec& payoff, const glil::VolatilityBand& band, double t) {
            return glil::gnormal_pair(payoff, band, glil::SpaceTimeGrid::standard(band, t));
        },
        py::arg("payoff"), py::arg("band"), py::arg("t") = 1.0);
    m.def(
        "solve_gheat",
        [](const glil::PayoffSpec& payoff, const glil::VolatilityBand& band, double t) {
            const auto sol = glil::solve_gheat(payoff, band, glil::SpaceTimeGrid::standard(band, t));
            return py::make_tuple(sol.xs, sol.values);
        },
        py::arg("payoff"), py::arg("band"), py::arg("t") = 1.0);
    m.def(
        "convex_reference",
        [](const glil::PayoffSpec& payoff, double sigma) { return glil::convex_reference(payoff, sigma).value; },
        py::arg("payoff"), py::arg("sigma"));

    // control dual
    m.def(
        "dp_upper_value",
        [](const glil::PayoffSpec& p, const glil::VolatilityBand& b, std::size_t n) {
            return glil::dp_upper_value(p, b, n);
        },
        py::arg("payoff"), py::arg("band"), py::arg("n_steps"));
    m.def(
        "dp_lower_value",
        [](const glil::PayoffSpec& p, const glil::VolatilityBand& b, std::size_t n) {
            return glil::dp_lower_value(p, b, n);
        },
        py::arg("payoff"), py::arg("band"), py::arg("n_steps"));
    m.def(
        "mc_strategy_value",
        [](const glil::PayoffSpec& p, const glil::VolatilityBand& b, const std::string& strategy, std::size_t n,
           std::size_t paths, std::uint64_t seed) {
            const auto v = glil::mc_strategy_value(p, b, strategy_arg(strategy), n, paths, seed);
            return py::make_tuple(v.estimate, v.std_error);
        },
        py::arg("payoff"), py::arg("band"), py::arg("strategy"), py::arg("n_steps"), py::arg("paths"),
        py::arg("seed"));
    m.def(
        "clt_convergence",
        [](const glil::PayoffSpec& p, const glil::VolatilityBand& b, const std::vector<std::size_t>& ns) {
            return to_python(glil::to_json(glil::clt_convergence(p, b, ns)));
        },
        py::arg("payoff"), py::arg("band"), py::arg("n_list"));
    m.def(
        "shift_inequality_check",
        [](const glil::PayoffSpec& p, double shift, const glil::VolatilityBand& b, std::size_t n) {
            return to_python(glil::to_json(
                glil::shift_inequality_check(p, shift, b, glil::ControlLattice::standard(b, n))));
        },
        py::arg("payoff"), py::arg("b"), py::arg("band"), py::arg("n_steps") = 200);

    // LIL laboratory
    m.def("lil_statistic", &glil::lil_statistic, py::arg("sum"), py::arg("n"));
    m.def(
        "sample_trajectory",
        [](const std::string& strategy, const glil::VolatilityBand& band, std::size_t horizon, std::uint64_t seed) {
            const auto t = glil::sample_trajectory(strategy_arg(strategy), band, horizon, seed);
            py::dict d;
            d["n"] = t.n;
            d["S_n"] = t.sums;
            d["R_n"] = t.stats;
            d["max_abs_increment"] = t.max_abs_increment;
            return d;
        },
        py::arg("strategy"), py::arg("band"), py::arg("N"), py::arg("seed"));
    m.def(
        "theorem1_experiment",
        [](const glil::VolatilityBand& band, const std::vector<std::string>& strategies, std::size_t horizon,
           const std::vector<std::uint64_t>& seeds, std::uint64_t master) {
            return to_python(glil::to_json(
                glil::theorem1_experiment(band, strategy_list(strategies), horizon, seeds, master)));
        },
        py::arg("band"), py::arg("strategies"), py::arg("N"), py::arg("seeds"), py::arg("master_seed"));
    m.def(
        "cluster_experiment",
        [](const glil::VolatilityBand& band, const std::vector<double>& bs, std::size_t horizon,
           const std::vector<std::uint64_t>& seeds, std::uint64_t master) {
            return to_python(glil::to_json(glil::cluster_experiment(band, bs, horizon, seeds, master)));
        },
        py::arg("band"), py::arg("b_list"), py::arg("N"), py::arg("seeds"), py::arg("master_seed"));
    m.def(
        "moment_ratio_check",
        [](const glil::VolatilityBand& band, const std::string& strategy, double r,
           const std::vector<std::size_t>& ns, const std::vector<std::size_t>& ms, std::size_t paths,
           std::uint64_t seed) {
            return to_python(
                glil::to_json(glil::moment_ratio_check(band, strategy_arg(strategy), r, ns, ms, paths, seed)));
        },
        py::arg("band"), py::arg("strategy"), py::arg("r"), py::arg("n_list"), py::arg("m_list"),
        py::arg("paths"), py::arg("seed"));
}
