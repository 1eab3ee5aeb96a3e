// Python bindings: potential evaluation, the cosine-basis operator
// toolbox on numpy arrays, and a Simulation driver wrapping the config,
// stepper and diagnostics machinery.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nschs/diagnostics.hpp"
#include "nschs/runner.hpp"
#include "nschs/snapshot.hpp"

namespace py = pybind11;
using namespace nschs;

namespace {

ScalarField field_from_array(const py::array_t<double>& arr, double Lx, double Ly) {
    if (arr.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    const int ny = static_cast<int>(arr.shape(0));
    const int nx = static_cast<int>(arr.shape(1));
    ScalarField f(Grid2D(nx, ny, Lx, Ly));
    auto r = arr.unchecked<2>();
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) f(i, j) = r(j, i);
    return f;
}

py::array_t<double> array_from_field(const ScalarField& f) {
    const Grid2D& g = f.grid();
    py::array_t<double> out({g.ny, g.nx});
    auto w = out.mutable_unchecked<2>();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) w(j, i) = f(i, j);
    return out;
}

py::dict dict_from_energy(const EnergyReport& e) {
    py::dict d;
    d["kinetic"] = e.kinetic;
    d["grad_phi"] = e.grad_phi;
    d["laplace_phi"] = e.laplace_phi;
    d["s_phi_bulk"] = e.s_phi_bulk;
    d["grad_rho"] = e.grad_rho;
    d["s_rho_bulk"] = e.s_rho_bulk;
    d["coupling"] = e.coupling;
    d["penalty"] = e.penalty;
    d["total"] = e.total;
    return d;
}

/// Owns one configured simulation: state, resolved stepping, bookkeeping.
class Simulation {
public:
    explicit Simulation(const RunConfig& cfg)
        : cfg_(cfg), params_(cfg.model_params()), state_(build_initial_state(cfg)) {
        step_cfg_ = resolve_stabilization(cfg.step_config(), state_, params_);
        mode_ = energy_mode_for(cfg);
    }

    static Simulation from_file(const std::string& path) {
        return Simulation(parse_config(path));
    }
    static Simulation from_text(const std::string& text) {
        return Simulation(parse_config_text(text));
    }

    void run_steps(int n) {
        for (int k = 0; k < n; ++k) {
            StepInfo info;
            state_ = step(state_, params_, step_cfg_, &info);
            clamp_events_ += info.clamp_events;
        }
    }

    double t() const { return state_.t; }
    py::array_t<double> phi() const { return array_from_field(state_.phi); }
    py::array_t<double> rho() const { return array_from_field(state_.rho); }
    py::array_t<double> pressure() const { return array_from_field(state_.p); }
    py::array_t<double> mu() const { return array_from_field(state_.mu); }
    py::array_t<double> psi() const { return array_from_field(state_.psi); }
    double mass_phi() const { return mean(state_.phi); }
    double mass_rho() const { return mean(state_.rho); }
    py::dict energy_report() const { return dict_from_energy(energy(state_, params_, mode_)); }
    double dt() const { return step_cfg_.dt; }
    double suggested_dt() const { return suggest_dt(state_, params_, step_cfg_); }
    long clamp_events() const { return clamp_events_; }

    py::dict diagnostics() const {
        const DiagnosticsRecord rec = sample(state_, params_, mode_);
        py::dict d;
        d["t"] = rec.t;
        d["mass_phi"] = rec.mass_phi;
        d["mass_rho"] = rec.mass_rho;
        d["dissipation"] = rec.dissipation;
        d["rho_min"] = rec.rho_min;
        d["rho_max"] = rec.rho_max;
        d["eta"] = rec.separation_eta;
        d["max_u"] = rec.max_velocity;
        d["adsorption"] = adsorption_statistic(state_);
        d["energy"] = dict_from_energy(rec.energy);
        return d;
    }

    void save_snapshot(const std::string& path) const { write_snapshot(state_, path); }
    void load_snapshot(const std::string& path) {
        state_ = read_snapshot(path);
        refresh_potentials(state_, params_, step_cfg_.potential_mode,
                           step_cfg_.potential_mode == PotentialMode::singular
                               ? std::optional<double>(step_cfg_.rho_clip)
                               : std::nullopt);
    }

private:
    RunConfig cfg_;
    ModelParams params_;
    StepConfig step_cfg_;
    EnergyMode mode_ = EnergyMode::approx;
    SimState state_{Grid2D(4, 4, 1.0, 1.0)};
    long clamp_events_ = 0;
};

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "2-D incompressible two-phase flow with surfactant";

    m.def("s_phi", &eval_s_phi, py::arg("s"), py::arg("order") = 0,
          "Double-well potential (s^2-1)^2/4 or a derivative");
    m.def(
        "s_rho",
        [](double s, int order, double theta1, double theta2) {
            return eval_s_rho_singular(FloryHugginsPotential{theta1, theta2, 0.25}, s, order);
        },
        py::arg("s"), py::arg("order") = 0, py::arg("theta1") = 2.0, py::arg("theta2") = 0.0,
        "Singular mixture potential (entropy plus enthalpy) or a derivative");
    m.def(
        "s_rho_eps",
        [](double s, int order, double eps, double theta1, double theta2) {
            return eval_s_rho_eps(
                RegularizedPotential{FloryHugginsPotential{theta1, theta2, 0.25}, eps}, s,
                order);
        },
        py::arg("s"), py::arg("order") = 0, py::arg("eps") = 0.05, py::arg("theta1") = 2.0,
        py::arg("theta2") = 0.0, "Quadratic-tail regularization of the mixture potential");
    m.def(
        "convexity_certificate",
        [](double eps, double theta1, double theta2) {
            const ConvexityCertificate c =
                convexity_certificate({FloryHugginsPotential{theta1, theta2, 0.25}, eps});
            return py::make_tuple(c.gamma1, c.gamma2, c.gamma3);
        },
        py::arg("eps") = 0.05, py::arg("theta1") = 2.0, py::arg("theta2") = 0.0,
        "(gamma1, gamma2, gamma3) bounds of the regularized potential");

    m.def(
        "laplacian",
        [](const py::array_t<double>& f, double Lx, double Ly) {
            return array_from_field(laplacian(field_from_array(f, Lx, Ly)));
        },
        py::arg("f"), py::arg("Lx") = 1.0, py::arg("Ly") = 1.0,
        "Five-point Laplacian with zero-flux ghost cells");
    m.def(
        "helmholtz_solve",
        [](double a, double b, double c, double d, const py::array_t<double>& rhs, double Lx,
           double Ly) {
            return array_from_field(
                helmholtz_solve({a, b, c, d}, field_from_array(rhs, Lx, Ly)));
        },
        py::arg("a"), py::arg("b"), py::arg("c"), py::arg("d"), py::arg("rhs"),
        py::arg("Lx") = 1.0, py::arg("Ly") = 1.0,
        "Solve (a + b Lap + c Lap^2 + d Lap^3) f = rhs in the cosine basis");
    m.def(
        "inv_neumann_laplacian",
        [](const py::array_t<double>& f, double Lx, double Ly) {
            return array_from_field(inv_neumann_laplacian(field_from_array(f, Lx, Ly)));
        },
        py::arg("f"), py::arg("Lx") = 1.0, py::arg("Ly") = 1.0,
        "Zero-mean solution of -Lap u = f with zero-flux walls");
    m.def(
        "galerkin_project",
        [](const py::array_t<double>& f, int n_modes, double Lx, double Ly) {
            return array_from_field(galerkin_project(field_from_array(f, Lx, Ly), n_modes));
        },
        py::arg("f"), py::arg("n_modes"), py::arg("Lx") = 1.0, py::arg("Ly") = 1.0,
        "Keep the n lowest cosine modes by eigenvalue");

    m.def("default_config", [] { return serialize_config(RunConfig{}); },
          "Canonical configuration text with every key at its default");
    m.def(
        "validate_config",
        [](const std::string& text) {
            const RunConfig cfg = parse_config_text(text);
            const ValidationReport rep = validate_assumptions(cfg.model_params(), 2000);
            py::list out;
            for (const auto& c : rep.checks)
                out.append(py::make_tuple(c.name, c.passed, c.worst_margin));
            return out;
        },
        py::arg("config_text"), "Run the assumption validators on a config given as text");

    py::class_<Simulation>(m, "Simulation")
        .def(py::init(&Simulation::from_text), py::arg("config_text"))
        .def_static("from_file", &Simulation::from_file, py::arg("path"))
        .def("run_steps", &Simulation::run_steps, py::arg("n") = 1)
        .def_property_readonly("t", &Simulation::t)
        .def_property_readonly("phi", &Simulation::phi)
        .def_property_readonly("rho", &Simulation::rho)
        .def_property_readonly("pressure", &Simulation::pressure)
        .def_property_readonly("mu", &Simulation::mu)
        .def_property_readonly("psi", &Simulation::psi)
        .def_property_readonly("dt", &Simulation::dt)
        .def_property_readonly("mass_phi", &Simulation::mass_phi)
        .def_property_readonly("mass_rho", &Simulation::mass_rho)
        .def_property_readonly("clamp_events", &Simulation::clamp_events)
        .def("energy", &Simulation::energy_report)
        .def("diagnostics", &Simulation::diagnostics)
        .def("suggested_dt", &Simulation::suggested_dt)
        .def("save_snapshot", &Simulation::save_snapshot, py::arg("path"))
        .def("load_snapshot", &Simulation::load_snapshot, py::arg("path"));
}
