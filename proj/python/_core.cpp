// Python bindings: operator kernels, model builders, the coupled system and
// the scenario-level run / compare / sweep entry points.

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qdiss/canonical_correlation.hpp"
#include "qdiss/comparator.hpp"
#include "qdiss/environment.hpp"
#include "qdiss/errors.hpp"
#include "qdiss/generic_dynamics.hpp"
#include "qdiss/integrator.hpp"
#include "qdiss/models.hpp"
#include "qdiss/runner.hpp"
#include "qdiss/scenario.hpp"

namespace py = pybind11;
using namespace qdiss;

namespace {

using ChannelSpec = std::pair<Matrix, double>;

std::shared_ptr<const EntropyCurve> make_curve(const py::object& bath)
{
    // a number is a constant-temperature bath; a (energies, entropies) pair is tabulated
    if (py::isinstance<py::float_>(bath) || py::isinstance<py::int_>(bath)) {
        return std::make_shared<LinearEntropyCurve>(bath.cast<double>());
    }
    auto table = bath.cast<std::pair<std::vector<double>, std::vector<double>>>();
    return std::make_shared<TabulatedEntropyCurve>(std::move(table.first), std::move(table.second));
}

// Thin Python-facing wrapper: a SystemSpec plus helpers taking raw arrays.
struct PySystem {
    SystemSpec spec;

    CoupledState state(const Matrix& rho, double bath_energy) const
    {
        return {DensityMatrix(rho), BathState{bath_energy}};
    }
};

PySystem make_system(const Matrix& h, const std::vector<ChannelSpec>& channels, const py::object& bath,
                     double p_floor)
{
    std::vector<CouplingChannel> ch;
    for (const auto& [q, zeta] : channels) ch.emplace_back(HermitianOperator(q), zeta);
    SpectralOptions opts;
    opts.p_floor = p_floor;
    return {SystemSpec(HermitianOperator(h), std::move(ch),
                       std::make_shared<BathModel>(make_curve(bath)), PhysicalConstants{}, opts)};
}

py::dict stats_dict(const TrajectoryStats& s)
{
    py::dict d;
    d["steps"] = s.steps;
    d["rejected_steps"] = s.rejected_steps;
    d["rhs_evaluations"] = s.rhs_evaluations;
    d["stage_clamps"] = s.stage_clamps;
    d["max_projection_displacement"] = s.max_projection_displacement;
    d["min_step_entropy_change"] = s.min_step_entropy_change;
    d["max_trace_error"] = s.max_trace_error;
    d["max_hermiticity"] = s.max_hermiticity;
    d["min_eigenvalue"] = s.min_eigenvalue;
    d["max_rel_energy_drift"] = s.max_rel_energy_drift;
    return d;
}

py::dict trajectory_dict(const Trajectory& tr)
{
    const std::size_t n = tr.size();
    const Index d = n ? tr.states.front().rho.rows() : 0;
    py::array_t<std::complex<double>> rho({static_cast<py::ssize_t>(n), static_cast<py::ssize_t>(d),
                                           static_cast<py::ssize_t>(d)});
    auto r = rho.mutable_unchecked<3>();
    std::vector<double> bath(n), energy(n), entropy(n), production(n), temperature(n);
    for (std::size_t k = 0; k < n; ++k) {
        for (Index i = 0; i < d; ++i)
            for (Index j = 0; j < d; ++j) r(k, i, j) = tr.states[k].rho(i, j);
        bath[k] = tr.states[k].bath.energy;
        energy[k] = tr.monitors[k].total_energy;
        entropy[k] = tr.monitors[k].total_entropy;
        production[k] = tr.monitors[k].entropy_production;
        temperature[k] = tr.monitors[k].bath_temperature;
    }
    py::dict out;
    out["t"] = py::array(py::cast(tr.times));
    out["rho"] = rho;
    out["bath_energy"] = py::array(py::cast(bath));
    out["total_energy"] = py::array(py::cast(energy));
    out["total_entropy"] = py::array(py::cast(entropy));
    out["entropy_production"] = py::array(py::cast(production));
    out["bath_temperature"] = py::array(py::cast(temperature));
    out["stats"] = stats_dict(tr.stats);
    return out;
}

py::dict summary_dict(const RunSummary& s)
{
    py::dict d;
    d["scenario"] = s.scenario_id;
    d["exit_status"] = s.exit_status;
    d["failure_time"] = s.failure_time ? py::cast(*s.failure_time) : py::none();
    d["failure_message"] = s.failure_message;
    d["records"] = s.records;
    d["stats"] = stats_dict(s.stats);
    d["final_time"] = s.final_time;
    d["final_bath_energy"] = s.final_bath_energy;
    d["final_bath_temperature"] = s.final_bath_temperature;
    d["final_total_energy"] = s.final_total_energy;
    d["final_total_entropy"] = s.final_total_entropy;
    d["distance_to_gibbs"] = s.distance_to_gibbs;
    d["min_entropy_production"] = s.min_entropy_production;
    return d;
}

Method parse_method(const std::string& m)
{
    if (m == "rk4") return Method::rk4_fixed;
    if (m == "rk45") return Method::rk45_adaptive;
    throw DomainError("method must be 'rk4' or 'rk45', got '" + m + "'");
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Nonlinear thermodynamically consistent quantum master equation";

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
    py::register_exception<PositivityError>(m, "PositivityError", PyExc_ArithmeticError);
    py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
    py::register_exception<IntegrationAborted>(m, "IntegrationAborted", PyExc_RuntimeError);
    py::register_exception<ScenarioInvalid>(m, "ScenarioInvalid", PyExc_ValueError);
    py::register_exception<ScenarioIOError>(m, "ScenarioIOError", PyExc_OSError);

    m.attr("DEFAULT_P_FLOOR") = kDefaultPFloor;

    // ---- kernels ----------------------------------------------------------
    m.def("log_mean", [](double p, double q) { return log_mean(p, q); }, py::arg("p"), py::arg("q"));
    m.def("mollified_product",
          [](const Matrix& a, const Matrix& rho) { return mollified_product(a, DensityMatrix(rho)); },
          py::arg("a"), py::arg("rho"), "A_rho = int_0^1 rho^l A rho^(1-l) dl");
    m.def("canonical_correlation",
          [](const Matrix& a, const Matrix& b, const Matrix& rho) {
              return canonical_correlation(a, b, DensityMatrix(rho));
          },
          py::arg("a"), py::arg("b"), py::arg("rho"));
    m.def("quantum_poisson",
          [](const Matrix& a, const Matrix& b) { return quantum_poisson(a, b, PhysicalConstants{}); },
          py::arg("a"), py::arg("b"));
    m.def("von_neumann_entropy",
          [](const Matrix& rho) { return von_neumann_entropy(DensityMatrix(rho), PhysicalConstants{}); },
          py::arg("rho"));
    m.def("trace_distance", &trace_distance, py::arg("a"), py::arg("b"));

    // ---- models -----------------------------------------------------------
    py::class_<TwoLevelModel>(m, "TwoLevelModel")
        .def_readonly("omega", &TwoLevelModel::omega)
        .def_readonly("gamma0", &TwoLevelModel::gamma0)
        .def_readonly("temperature", &TwoLevelModel::temperature)
        .def_readonly("zeta", &TwoLevelModel::zeta)
        .def_readonly("rate_gamma", &TwoLevelModel::rate_gamma)
        .def_property_readonly("h", [](const TwoLevelModel& t) { return t.h.matrix(); })
        .def_property_readonly("channels", [](const TwoLevelModel& t) {
            std::vector<ChannelSpec> out;
            for (const auto& c : t.channels) out.emplace_back(c.q.matrix(), c.zeta);
            return out;
        });
    m.def("two_level", [](double omega, double gamma0, double temperature) {
              return build_two_level(omega, gamma0, temperature);
          },
          py::arg("omega"), py::arg("gamma0"), py::arg("temperature"));

    py::class_<ParticleModel>(m, "ParticleModel")
        .def_readonly("mass", &ParticleModel::mass)
        .def_property_readonly("dim", &ParticleModel::dim)
        .def_property_readonly("q", [](const ParticleModel& p) { return p.q.matrix(); })
        .def_property_readonly("p", [](const ParticleModel& p) { return p.p.matrix(); })
        .def_property_readonly("h", [](const ParticleModel& p) { return p.h.matrix(); })
        .def_property_readonly("qq", [](const ParticleModel& p) { return p.qq().matrix(); })
        .def_property_readonly("pp", [](const ParticleModel& p) { return p.pp().matrix(); })
        .def_property_readonly("pq_sym", [](const ParticleModel& p) { return p.pq_sym().matrix(); })
        .def("channel", [](const ParticleModel& p, double zeta) { return ChannelSpec(p.q.matrix(), zeta); },
             py::arg("zeta"))
        .def("displaced_thermal_state",
             [](const ParticleModel& p, double t, double q0, double p0) {
                 return displaced_thermal_state(p, t, q0, p0).matrix();
             },
             py::arg("temperature"), py::arg("q0"), py::arg("p0"));
    m.def("harmonic_particle",
          [](double mass, double omega, Index n) { return build_particle(mass, Polynomial::harmonic(mass, omega), n); },
          py::arg("mass"), py::arg("omega"), py::arg("basis_dim"));
    m.def("particle",
          [](double mass, std::array<double, 5> coefficients, Index n, double basis_omega) {
              Polynomial v;
              v.coefficients = coefficients;
              return build_particle(mass, v, n, PhysicalConstants{}, basis_omega);
          },
          py::arg("mass"), py::arg("coefficients"), py::arg("basis_dim"), py::arg("basis_omega") = 0.0,
          "Particle in V(Q) = sum_k c_k Q^k, coefficients c_0..c_4");
    m.def("caldeira_leggett_zeta", &caldeira_leggett_zeta, py::arg("gamma"), py::arg("mass"));
    m.def("gibbs_state",
          [](const Matrix& h, double t) { return gibbs_state(HermitianOperator(h), t).matrix(); },
          py::arg("h"), py::arg("temperature"));

    // ---- coupled system ---------------------------------------------------
    py::class_<PySystem>(m, "System")
        .def(py::init(&make_system), py::arg("h"), py::arg("channels"), py::arg("bath"),
             py::arg("p_floor") = kDefaultPFloor,
             "bath: a temperature (constant-temperature bath) or (energies, entropies) table")
        .def_property_readonly("dim", [](const PySystem& s) { return s.spec.dim(); })
        .def("master_rhs",
             [](const PySystem& s, const Matrix& rho, double e) { return master_rhs(s.state(rho, e), s.spec); },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("classical_rhs",
             [](const PySystem& s, const Matrix& rho, double e) { return classical_rhs(s.state(rho, e), s.spec); },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("linearized_rhs",
             [](const PySystem& s, const Matrix& rho, double e) {
                 return linearized_rhs(rho, BathState{e}, s.spec);
             },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("average_rhs",
             [](const PySystem& s, const Matrix& a, const Matrix& rho, double e) {
                 const AverageRateTerms t = average_rhs_terms(a, s.state(rho, e), s.spec);
                 py::dict d;
                 d["reversible"] = t.reversible;
                 d["friction"] = t.friction;
                 d["diffusion"] = t.diffusion;
                 d["total"] = t.total();
                 return d;
             },
             py::arg("a"), py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("entropy_production",
             [](const PySystem& s, const Matrix& rho, double e) {
                 return entropy_production(s.state(rho, e), s.spec);
             },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("total_energy",
             [](const PySystem& s, const Matrix& rho, double e) { return total_energy(s.state(rho, e), s.spec); },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("total_entropy",
             [](const PySystem& s, const Matrix& rho, double e) { return total_entropy(s.state(rho, e), s.spec); },
             py::arg("rho"), py::arg("bath_energy") = 0.0)
        .def("generator",
             [](const PySystem& s, const Matrix& rho, double e, const std::string& mode) {
                 GeneratorMode gm;
                 if (mode == "linearized") gm = GeneratorMode::linearized;
                 else if (mode == "nonlinear") gm = GeneratorMode::nonlinear_tangent;
                 else throw DomainError("mode must be 'linearized' or 'nonlinear'");
                 return build_generator(s.spec, s.state(rho, e), gm).matrix;
             },
             py::arg("rho"), py::arg("bath_energy") = 0.0, py::arg("mode") = "linearized",
             "Column-stacked d^2 x d^2 generator at the given state")
        .def("integrate",
             [](const PySystem& s, const Matrix& rho, double e, double t_end, double dt, const std::string& method,
                std::size_t stride, double rtol, double atol) {
                 IntegratorConfig cfg;
                 cfg.method = parse_method(method);
                 cfg.t_end = t_end;
                 cfg.dt = dt;
                 cfg.monitor_stride = stride;
                 cfg.rtol = rtol;
                 cfg.atol = atol;
                 cfg.p_floor = s.spec.options().p_floor;
                 Trajectory tr;
                 {
                     py::gil_scoped_release release;
                     tr = integrate(s.state(rho, e), s.spec, cfg);
                 }
                 return trajectory_dict(tr);
             },
             py::arg("rho"), py::arg("bath_energy"), py::arg("t_end"), py::arg("dt") = 1e-2,
             py::arg("method") = "rk4", py::arg("stride") = 1, py::arg("rtol") = 1e-8, py::arg("atol") = 1e-10);

    // ---- scenario files ---------------------------------------------------
    m.def("validate",
          [](const std::filesystem::path& path) {
              std::vector<std::string> out;
              try {
                  const auto doc = read_json_file(path);
                  for (const auto& d : validate_scenario(doc, path.parent_path())) out.push_back(d.str());
              } catch (const ScenarioInvalid& e) {
                  for (const auto& d : e.diagnostics()) out.push_back(d.str());
              }
              return out;
          },
          py::arg("path"), "Diagnostics for a scenario file; empty when valid");
    m.def("run",
          [](const std::filesystem::path& path, const std::filesystem::path& out, std::optional<std::size_t> stride) {
              const Scenario sc = load_scenario(path);
              RunOptions opts;
              opts.stride = stride;
              RunSummary summary;
              {
                  py::gil_scoped_release release;
                  summary = run_scenario(sc, out, opts);
              }
              return summary_dict(summary);
          },
          py::arg("path"), py::arg("out_dir"), py::arg("stride") = py::none());
    m.def("compare",
          [](const std::filesystem::path& path, const std::filesystem::path& out) {
              const Scenario sc = load_scenario(path);
              CompareResult r;
              {
                  py::gil_scoped_release release;
                  r = compare_scenario(sc, out);
              }
              py::dict d;
              d["exit_status"] = r.exit_status;
              d["failure_message"] = r.failure_message;
              d["report"] = r.report ? py::cast(format_report(*r.report)) : py::none();
              return d;
          },
          py::arg("path"), py::arg("out_dir"));
    m.def("sweep",
          [](const std::filesystem::path& path, const std::filesystem::path& out, unsigned threads) {
              SweepOptions opts;
              opts.threads = threads;
              SweepResult r;
              {
                  py::gil_scoped_release release;
                  r = run_sweep(path, out, opts);
              }
              py::list points;
              for (const auto& p : r.points) {
                  py::dict d;
                  d["index"] = p.index;
                  d["status"] = p.status;
                  d["exit_status"] = p.exit_status;
                  d["message"] = p.message;
                  points.append(d);
              }
              py::dict d;
              d["axes"] = r.axes;
              d["points"] = points;
              d["exit_status"] = r.exit_status;
              return d;
          },
          py::arg("path"), py::arg("out_dir"), py::arg("threads") = 0);
}
