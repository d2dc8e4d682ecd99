// integrator.hpp — Explicit Runge-Kutta integration of (rho, H_e) with
// per-step projection and conservation/positivity monitors

#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "qdiss/generic_dynamics.hpp"

namespace qdiss {

enum class Method { rk4_fixed, rk45_adaptive };

struct IntegratorConfig {
    Method method = Method::rk4_fixed;
    double dt = 1e-2;           // fixed step, or initial step for the adaptive method
    double rtol = 1e-8;
    double atol = 1e-10;
    double t_end = 1.0;
    double p_floor = kDefaultPFloor;
    double projection_tol = 1e-10;
    std::size_t monitor_stride = 1;
    double min_step = 1e-8;
    double max_step = 1e-1;

    // Throws DomainError for out-of-range settings.
    void validate() const;
};

// Allowed relative drift of the total energy over one integration.
double energy_drift_budget(const IntegratorConfig& cfg);

struct MonitorRecord {
    double t = 0.0;
    double total_energy = 0.0;        // <H> + H_e
    double total_entropy = 0.0;       // -k_B tr(rho ln rho) + S_e(H_e)
    double entropy_production = 0.0;  // D(S, S)
    double bath_temperature = 0.0;
    double min_eigenvalue = 0.0;
    double trace_error = 0.0;         // |tr rho - 1|
    double hermiticity = 0.0;         // ||rho - rho^dagger||_max
    double projection_displacement = 0.0;  // largest since the previous record
};

struct TrajectoryStats {
    std::size_t steps = 0;
    std::size_t rejected_steps = 0;
    std::size_t rhs_evaluations = 0;
    std::size_t stage_clamps = 0;
    double max_projection_displacement = 0.0;
    double min_step_entropy_change = std::numeric_limits<double>::infinity();
    double max_trace_error = 0.0;
    double max_hermiticity = 0.0;
    double min_eigenvalue = std::numeric_limits<double>::infinity();
    double max_rel_energy_drift = 0.0;
};

struct Regularization {
    bool applied = false;
    double epsilon = 0.0;
    double min_eigenvalue_before = 0.0;
};

struct Snapshot {
    Matrix rho;
    BathState bath;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Snapshot> states;
    std::vector<MonitorRecord> monitors;
    TrajectoryStats stats;
    Regularization initial_regularization;

    std::size_t size() const noexcept { return times.size(); }
    // Rebuilds the validated state at record i.
    CoupledState state(std::size_t i) const;
};

class IntegrationAborted : public std::runtime_error {
public:
    IntegrationAborted(const std::string& what, double t_fail, Trajectory partial)
        : std::runtime_error(what), t_fail_(t_fail), partial_(std::move(partial)) {}

    double failure_time() const noexcept { return t_fail_; }
    const Trajectory& partial() const noexcept { return partial_; }

private:
    double t_fail_;
    Trajectory partial_;
};

struct Projection {
    Matrix rho;
    double displacement = 0.0;
    bool clamped = false;
};

// Hermitize, clamp eigenvalues to >= p_floor and renormalize the trace.
// Throws DomainError if the input is non-Hermitian beyond projection_tol,
// PositivityError if an eigenvalue is below -projection_tol, and
// ConvergenceError if the displacement exceeds 100 projection_tol.
Projection project(const Matrix& rho_raw, const IntegratorConfig& cfg);

// (1 - eps) rho + (eps / d) I with the smallest eps = d (p_floor - min(0, lambda_min))
// that lifts every eigenvalue to p_floor; returns rho unchanged if not needed.
Matrix regularize(const Matrix& rho, double p_floor, Regularization* record = nullptr);

// Rates for a raw (Hermitian, unit-trace) state. Used to integrate
// alternative dynamics such as the linearized master equation.
using RateFunction = std::function<StateRates(const Matrix& rho, const BathState& bath)>;

struct ProjectionPolicy {
    // Clamp eigenvalues to p_floor and abort on negativity below -projection_tol.
    // When false only the Hermitian part is taken and the trace renormalized.
    bool enforce_positivity = true;
};

Trajectory integrate(const CoupledState& initial, const SystemSpec& spec,
                     const IntegratorConfig& cfg);

Trajectory integrate_with(const CoupledState& initial, const SystemSpec& spec,
                          const IntegratorConfig& cfg, const RateFunction& rates,
                          ProjectionPolicy policy);

} // namespace qdiss
