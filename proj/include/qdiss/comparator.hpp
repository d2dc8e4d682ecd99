// comparator.hpp — Linearized (Lindblad-form) master equation, generator
// matrices and nonlinear-vs-linearized trajectory comparison
//
// The linearization replaces the mollified drive ({Q,H})_rho by the
// symmetrized product {{Q,H}, rho}_+ / 2, which makes the right-hand side
// linear in rho.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qdiss/generic_dynamics.hpp"
#include "qdiss/integrator.hpp"

namespace qdiss {

// Complex-linear in rho; rho need not be positive or even Hermitian.
Matrix linearized_rhs(const Matrix& rho, const BathState& bath, const SystemSpec& spec);
Matrix linearized_rhs(const CoupledState& state, const SystemSpec& spec);

// Linearized rho rate plus the bath rate -tr(H drho/dt), which keeps the
// total energy fixed.
StateRates linearized_rates(const Matrix& rho, const BathState& bath, const SystemSpec& spec);

// Column-stacking: vec(rho)[i + j d] = rho(i, j).
Eigen::VectorXcd vec(const Matrix& m);
Matrix unvec(const Eigen::VectorXcd& v, Index dim);

struct Superoperator {
    Index dim = 0;
    Matrix matrix;  // dim^2 x dim^2

    Matrix apply(const Matrix& rho) const;
    // max over basis operators of ||L(X)^dagger - L(X^dagger)||_max
    double hermiticity_defect() const;
    // max_k |sum_i L(ii, k)|: the trace functional composed with L
    double trace_defect() const;
    Eigen::VectorXcd eigenvalues() const;
};

enum class GeneratorMode { nonlinear_tangent, linearized };

// linearized: exact matrix of linearized_rhs at the given bath state.
// nonlinear_tangent: Jacobian of master_rhs at state.rho (bath held fixed),
// from central differences along traceless Hermitian directions plus the
// degree-1 homogeneity of the right-hand side along rho itself.
Superoperator build_generator(const SystemSpec& spec, const CoupledState& state,
                              GeneratorMode mode);

struct GeneratorRates {
    double spectral_gap = 0.0;     // smallest nonzero |Re lambda|
    double real_mode_rate = 0.0;   // smallest nonzero |lambda| among (numerically) real eigenvalues
};

GeneratorRates generator_rates(const Superoperator& generator, double zero_tol = 1e-9);

// -slope of a least-squares fit of ln|x(t) - x_inf| over t in [t_lo, t_hi].
// Empty if fewer than 3 usable samples fall in the window.
std::optional<double> fit_relaxation_rate(const std::vector<double>& times,
                                          const std::vector<double>& values, double steady_value,
                                          double t_lo, double t_hi);

struct NamedObservable {
    std::string name;
    Matrix op;
};

struct CorrelationPair {
    std::string name;
    Matrix a;
    Matrix b;
};

struct ComparisonScenario {
    std::string id;
    SystemSpec spec;
    CoupledState initial;
    IntegratorConfig config;  // must use Method::rk4_fixed so both tracks share a time grid
    std::optional<double> rate_hint;  // characteristic rate; sets the fit window [0.5, 5] / rate
    double agreement_tol = 1e-6;
};

struct TrackComparison {
    std::string name;
    std::vector<double> nonlinear;
    std::vector<double> linearized;
    double sup_difference = 0.0;
    double terminal_difference = 0.0;
    bool finite = true;  // false if a canonical correlation was undefined on a track
    std::size_t defined_records = 0;  // records where both tracks are defined
};

struct ComparisonReport {
    std::string scenario_id;
    std::vector<double> times;
    std::vector<TrackComparison> tracks;
    double steady_state_trace_distance = 0.0;  // final nonlinear vs final linearized
    double nonlinear_distance_to_gibbs = 0.0;
    double linearized_distance_to_gibbs = 0.0;
    double linearized_min_eigenvalue = 0.0;
    std::optional<double> nonlinear_rate;
    std::optional<double> linearized_rate;
    // Spectrum of the linearized generator at the initial state; skipped
    // above kGeneratorSpectrumMaxDim (the dense d^2 x d^2 eigenproblem).
    std::optional<GeneratorRates> linearized_generator;
    double agreement_tol = 0.0;
    std::vector<std::string> findings;

    const TrackComparison* track(const std::string& name) const;
};

inline constexpr Index kGeneratorSpectrumMaxDim = 16;

ComparisonReport compare_trajectories(const ComparisonScenario& scenario,
                                      const std::vector<NamedObservable>& observables,
                                      const std::vector<CorrelationPair>& correlations = {});

} // namespace qdiss
