// generic_dynamics.hpp — Right-hand sides of the thermodynamic master equation
//
// For a quantum system with Hamiltonian H coupled through channels Q_k to a
// classical environment, with coupling brackets E_HH = zeta T_e and
// E_HS = zeta evaluated at the current bath state:
//
//   drho/dt  = -{rho, H} + sum_k [ E_HS {Q, ({Q,H})_rho} + k_B E_HH {Q, {Q, rho}} ]
//   dH_e/dt  = sum_k [ -k_B E_HH <{Q,{Q,H}}> + E_HS <<{H,Q}; {H,Q}>> ]
//   d<A>/dt  = <{A,H}> - sum_k E_HS <<{A,Q}; {H,Q}>> + sum_k k_B E_HH <{Q,{Q,A}}>
//
// where {A,B} = [A,B]/(i hbar) and (X)_rho is the mollified product.

#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "qdiss/canonical_correlation.hpp"
#include "qdiss/environment.hpp"
#include "qdiss/operator_algebra.hpp"

namespace qdiss {

struct SpectralOptions {
    double p_floor = kDefaultPFloor;
    LogMeanKernel kernel;
};

struct CoupledState {
    DensityMatrix rho;
    BathState bath;
};

class SystemSpec {
public:
    // All operators must share one dimension; the channel list may be empty.
    SystemSpec(HermitianOperator hamiltonian, std::vector<CouplingChannel> channels,
               std::shared_ptr<const BathModel> bath_model, PhysicalConstants constants = {},
               SpectralOptions options = {});

    const HermitianOperator& hamiltonian() const noexcept { return hamiltonian_; }
    const std::vector<CouplingChannel>& channels() const noexcept { return channels_; }
    const BathModel& bath_model() const noexcept { return *bath_model_; }
    std::shared_ptr<const BathModel> bath_model_ptr() const noexcept { return bath_model_; }
    const PhysicalConstants& constants() const noexcept { return constants_; }
    const SpectralOptions& options() const noexcept { return options_; }
    Index dim() const noexcept { return hamiltonian_.dim(); }

    // {Q_k, H} for channel k, cached at construction.
    const Matrix& channel_drive(std::size_t k) const { return drives_.at(k); }

    SystemSpec with_channels(std::vector<CouplingChannel> channels) const;
    SystemSpec with_options(SpectralOptions options) const;

private:
    HermitianOperator hamiltonian_;
    std::vector<CouplingChannel> channels_;
    std::shared_ptr<const BathModel> bath_model_;
    PhysicalConstants constants_;
    SpectralOptions options_;
    std::vector<Matrix> drives_;
};

// drho/dt. Hermitian and traceless.
Matrix master_rhs(const CoupledState& state, const SystemSpec& spec);

// dH_e/dt
double classical_rhs(const CoupledState& state, const SystemSpec& spec);

struct StateRates {
    Matrix rho_rate;
    double bath_rate = 0.0;
};

// master_rhs and classical_rhs from one pass over the channels.
StateRates coupled_rhs(const CoupledState& state, const SystemSpec& spec);

struct AverageRateTerms {
    double reversible = 0.0;  // <{A,H}>
    double friction = 0.0;    // -sum E_HS <<{A,Q}; {H,Q}>>
    double diffusion = 0.0;   // +sum k_B E_HH <{Q,{Q,A}}>

    double dissipative() const { return friction + diffusion; }
    double total() const { return reversible + friction + diffusion; }
};

AverageRateTerms average_rhs_terms(const Matrix& a, const CoupledState& state,
                                   const SystemSpec& spec);

// d<A>/dt, evaluated directly from the averaged equation (not via master_rhs).
double average_rhs(const HermitianOperator& a, const CoupledState& state, const SystemSpec& spec);

// A pair (A, A_e) of a quantum observable and a classical observable.
struct JointObservable {
    std::optional<Matrix> quantum;
    ClassicalObservable classical = ClassicalObservable::zero();
};

// (H, H_e)
JointObservable total_energy_observable(const SystemSpec& spec);
// (-k_B ln rho, S_e); the quantum part depends on the state.
JointObservable total_entropy_observable(const CoupledState& state, const SystemSpec& spec);

// <H> + H_e
double total_energy(const CoupledState& state, const SystemSpec& spec);
// -k_B tr(rho ln rho) + S_e(H_e)
double total_entropy(const CoupledState& state, const SystemSpec& spec);

// [[A_e, B_e]]_x + <{A, B}>
double poisson_contribution(const JointObservable& a, const JointObservable& b,
                            const CoupledState& state, const SystemSpec& spec);

// ((A_e, B_e))_x + sum over channels of the four-term coupling form.
// Symmetric, and zero whenever one argument is the total energy.
double dissipative_contribution(const JointObservable& a, const JointObservable& b,
                                const CoupledState& state, const SystemSpec& spec);

// D(S, S): total entropy production rate, >= 0.
double entropy_production(const CoupledState& state, const SystemSpec& spec);

} // namespace qdiss
