#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "gsbr/cli.hpp"
#include "gsbr/error.hpp"
#include "gsbr/renorm.hpp"
#include "gsbr/resolvent.hpp"

namespace py = pybind11;
using namespace gsbr;

namespace {

modes::Dispersion dispersion(const std::string& name, double mass) {
    if (name == "relativistic") return modes::Dispersion::relativistic(mass);
    if (name == "linear") return modes::Dispersion::linear();
    if (name == "constant") return modes::Dispersion::constant(mass);
    throw PreconditionError("unknown dispersion '" + name + "'");
}

std::vector<double> as_vector(std::span<const double> s) { return {s.begin(), s.end()}; }

// Models carry their own resolvent context so repeated Krein evaluations share the spectral data.
struct PyModel {
    model::ModelSpec spec;
    std::optional<resolvent::ResolventContext> ctx;

    const resolvent::ResolventContext& context() {
        if (!ctx) ctx = resolvent::make_context(spec, resolvent::suggest_z0(spec));
        return *ctx;
    }
};

py::dict assumption_dict(const model::AssumptionReport& r) {
    py::dict d;
    d["verdict"] = r.verdict;
    d["normal_residual"] = r.normal_residual;
    d["commuting"] = r.commuting;
    d["stacked_min_singular"] = r.stacked_min_singular;
    d["joint_kernel_trivial"] = r.joint_kernel_trivial;
    d["failures"] = r.failures();
    return d;
}

} // namespace

PYBIND11_MODULE(_gsbr, m) {
    m.doc() = "Generalized spin-boson models on truncated Fock spaces";

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    auto numerical = py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    py::register_exception<SingularFormula>(m, "SingularFormula", numerical.ptr());
    py::register_exception<ClassificationConflict>(m, "ClassificationConflict", PyExc_RuntimeError);
    py::register_exception<cli::ConfigError>(m, "ConfigError", PyExc_ValueError);

    py::class_<modes::ModeGrid>(m, "ModeGrid")
        .def(py::init<std::vector<double>, std::vector<double>, std::vector<double>, double>(), py::arg("nodes"),
             py::arg("weights"), py::arg("omega"), py::arg("mass_floor"))
        .def_static(
            "uniform",
            [](double k_min, double k_max, std::size_t count, const std::string& disp, double mass) {
                return modes::ModeGrid::uniform(k_min, k_max, count, dispersion(disp, mass));
            },
            py::arg("k_min"), py::arg("k_max"), py::arg("count"), py::arg("dispersion") = "relativistic",
            py::arg("mass") = 1.0)
        .def_static(
            "geometric",
            [](double k_min, double k_max, std::size_t count, const std::string& disp, double mass) {
                return modes::ModeGrid::geometric(k_min, k_max, count, dispersion(disp, mass));
            },
            py::arg("k_min"), py::arg("k_max"), py::arg("count"), py::arg("dispersion") = "relativistic",
            py::arg("mass") = 1.0)
        .def("__len__", &modes::ModeGrid::size)
        .def_property_readonly("nodes", [](const modes::ModeGrid& g) { return as_vector(g.nodes()); })
        .def_property_readonly("weights", [](const modes::ModeGrid& g) { return as_vector(g.weights()); })
        .def_property_readonly("omega", [](const modes::ModeGrid& g) { return as_vector(g.omega()); })
        .def_property_readonly("mass_floor", &modes::ModeGrid::mass_floor)
        .def("prefix", &modes::ModeGrid::prefix);

    py::class_<modes::FormFactor>(m, "FormFactor")
        .def(py::init([](CVector values, double f_exponent, double omega_exponent) {
                 return modes::FormFactor{std::move(values), {f_exponent, omega_exponent}, "custom"};
             }),
             py::arg("values"), py::arg("f_exponent") = 0.0, py::arg("omega_exponent") = 1.0)
        .def_static(
            "k_power",
            [](const modes::ModeGrid& g, double p, cplx c) { return modes::FormFactor::k_power(g, p, g.omega_growth(), c); },
            py::arg("grid"), py::arg("power"), py::arg("coupling") = cplx(1.0))
        .def_static(
            "omega_power",
            [](const modes::ModeGrid& g, double p, cplx c) {
                return modes::FormFactor::omega_power(g, p, g.omega_growth(), c);
            },
            py::arg("grid"), py::arg("power"), py::arg("coupling") = cplx(1.0))
        .def_readwrite("values", &modes::FormFactor::values)
        .def_property_readonly("tail", [](const modes::FormFactor& f) {
            return std::pair{f.tail.f_exponent, f.tail.omega_exponent};
        });

    m.def("scale_norm", &modes::scale_norm, py::arg("f"), py::arg("s"), py::arg("grid"));
    m.def("pairing", &modes::pairing, py::arg("f"), py::arg("g"), py::arg("grid"));
    m.def(
        "classify_divergence",
        [](const modes::FormFactor& f, const modes::ModeGrid& g) {
            return std::string(modes::to_string(modes::classify_divergence(f, g)));
        },
        py::arg("f"), py::arg("grid"));
    m.def("truncate", &modes::truncate, py::arg("f"), py::arg("cutoff"), py::arg("grid"));

    py::class_<PyModel>(m, "Model")
        .def(py::init([](const std::string& preset, const modes::ModeGrid& grid, std::size_t n_max, std::size_t atoms,
                         std::vector<double> eta, double coupling, double factor_exponent) {
                 model::PresetParams p;
                 p.atoms = atoms;
                 p.eta = std::move(eta);
                 p.coupling = coupling;
                 p.factor_exponent = factor_exponent;
                 return PyModel{model::make_preset(preset, p, grid, fock::build_basis(grid.size(), n_max)), {}};
             }),
             py::arg("preset"), py::arg("grid"), py::arg("n_max"), py::arg("atoms") = 1,
             py::arg("eta") = std::vector<double>{}, py::arg("coupling") = 1.0, py::arg("factor_exponent") = -0.25)
        .def_property_readonly("dim", [](const PyModel& pm) { return pm.spec.total_dim(); })
        .def_property_readonly("fock_dim", [](const PyModel& pm) { return pm.spec.basis.size(); })
        .def_property_readonly("factors", [](const PyModel& pm) { return pm.spec.factors; })
        .def_property_readonly("grid", [](const PyModel& pm) { return pm.spec.grid; })
        .def("hamiltonian", [](const PyModel& pm) { return model::assemble_hamiltonian(pm.spec).matrix; })
        .def("free_hamiltonian", [](const PyModel& pm) { return model::assemble_free(pm.spec).matrix; })
        .def("interaction", [](const PyModel& pm) { return model::assemble_A(pm.spec).matrix; })
        .def("validate", [](const PyModel& pm) { return assumption_dict(model::validate_interaction(pm.spec.spin)); })
        .def_property_readonly("z0", [](PyModel& pm) { return pm.context().z0; })
        .def("krein_resolvent", [](PyModel& pm, cplx z) { return resolvent::krein_resolvent(pm.context(), z); },
             py::arg("z"))
        .def("t_min", [](PyModel& pm) { return resolvent::t_min(pm.context()); })
        .def("invertibility_margin",
             [](PyModel& pm, cplx z) {
                 const auto mg = resolvent::invertibility_margin(pm.context(), z);
                 return std::pair{mg.value, mg.certified};
             },
             py::arg("z"))
        .def("cut", [](const PyModel& pm, double cutoff) { return PyModel{renorm::cut_spec(pm.spec, cutoff), {}}; },
             py::arg("cutoff"));

    m.def("resolvent_direct", &resolvent::resolvent_direct, py::arg("h"), py::arg("z"));
    m.def("norm_resolvent_distance", &renorm::norm_resolvent_distance, py::arg("ha"), py::arg("hb"), py::arg("z"));
    m.def("self_energy", &renorm::self_energy, py::arg("f"), py::arg("grid"));

    m.def(
        "van_hove_dressing",
        [](const PyModel& pm) {
            const auto r = renorm::van_hove_dressing(pm.spec);
            py::dict d;
            d["self_energy"] = r.self_energy;
            d["ground_energy"] = r.ground_energy;
            d["unitarity_residual"] = r.unitarity_residual;
            d["conjugation_residual"] = r.conjugation_residual;
            d["spectral_distance"] = r.spectral_distance;
            return d;
        },
        py::arg("model"));

    m.def(
        "convergence_study",
        [](const PyModel& pm, std::vector<double> cutoffs, std::optional<std::vector<cplx>> zs) {
            const auto z = zs.value_or(renorm::default_z_set());
            const auto r = renorm::convergence_study(pm.spec, cutoffs, z);
            py::list rungs;
            for (const auto& rung : r.rungs) {
                py::dict d;
                d["cutoff"] = rung.cutoff;
                d["h_minus1_dist"] = rung.h_minus1_dist;
                d["resolvent_dist"] = rung.resolvent_dist;
                d["t_dist"] = rung.t_dist;
                rungs.append(d);
            }
            py::dict d;
            d["zs"] = r.zs;
            d["reference_cutoff"] = r.reference_cutoff;
            d["reference_krein_error"] = r.reference_krein_error;
            d["rungs"] = rungs;
            d["fitted_constant"] = r.fitted_constant;
            d["ratio_spread"] = r.ratio_spread;
            d["strictly_decreasing"] = r.strictly_decreasing;
            d["verdict"] = r.verdict;
            return d;
        },
        py::arg("model"), py::arg("cutoffs"), py::arg("zs") = py::none());

    m.def(
        "run_config",
        [](const std::string& json_text) {
            const auto r = cli::run(cli::parse_config(json_text));
            py::list studies;
            for (const auto& s : r.studies) {
                py::dict d;
                d["study"] = s.study;
                d["pass"] = s.pass;
                d["failures"] = s.failures;
                studies.append(d);
            }
            return py::make_tuple(r.exit_code, studies, r.message);
        },
        py::arg("config_json"), "Runs a JSON configuration; returns (exit_code, studies, message).");
    m.def("report_schema", &cli::report_schema);
    m.def("study_names", &cli::study_names);
    m.def("preset_names", &model::preset_names);
}
