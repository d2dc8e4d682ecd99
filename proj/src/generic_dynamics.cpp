// generic_dynamics.cpp — Thermodynamic master equation and GENERIC brackets

#include "qdiss/generic_dynamics.hpp"

#include <cmath>
#include <sstream>

#include "qdiss/errors.hpp"

namespace qdiss {

namespace {

bool has_dissipation(const SystemSpec& spec)
{
    for (const auto& ch : spec.channels()) {
        if (ch.zeta > 0.0) return true;
    }
    return false;
}

void require_state_dim(const CoupledState& state, const SystemSpec& spec, const char* where)
{
    if (state.rho.dim() != spec.dim()) {
        std::ostringstream os;
        os << where << ": density matrix has dimension " << state.rho.dim()
           << " but the system has dimension " << spec.dim();
        throw DimensionError(os.str());
    }
}

} // namespace

SystemSpec::SystemSpec(HermitianOperator hamiltonian, std::vector<CouplingChannel> channels,
                       std::shared_ptr<const BathModel> bath_model, PhysicalConstants constants,
                       SpectralOptions options)
    : hamiltonian_(std::move(hamiltonian)),
      channels_(std::move(channels)),
      bath_model_(std::move(bath_model)),
      constants_(constants),
      options_(options)
{
    constants_.validate();
    options_.kernel.validate();
    if (!(options_.p_floor > 0.0 && options_.p_floor <= 1e-6)) {
        throw DomainError("SystemSpec: p_floor must lie in (0, 1e-6]");
    }
    if (!bath_model_) throw DomainError("SystemSpec: a bath model is required");
    drives_.reserve(channels_.size());
    for (const auto& ch : channels_) {
        require_same_dim(ch.q.matrix(), hamiltonian_.matrix(), "SystemSpec channel");
        drives_.push_back(quantum_poisson(ch.q.matrix(), hamiltonian_.matrix(), constants_));
    }
}

SystemSpec SystemSpec::with_channels(std::vector<CouplingChannel> channels) const
{
    return SystemSpec(hamiltonian_, std::move(channels), bath_model_, constants_, options_);
}

SystemSpec SystemSpec::with_options(SpectralOptions options) const
{
    return SystemSpec(hamiltonian_, channels_, bath_model_, constants_, options);
}

StateRates coupled_rhs(const CoupledState& state, const SystemSpec& spec)
{
    require_state_dim(state, spec, "master_rhs");
    const auto& c = spec.constants();
    const Matrix& h = spec.hamiltonian().matrix();
    const Matrix& rho = state.rho.matrix();

    StateRates out;
    out.rho_rate = -quantum_poisson(rho, h, c);

    const auto& model = spec.bath_model();
    const ClassicalObservable energy = ClassicalObservable::energy();
    out.bath_rate = model.poisson_bracket(energy, energy, state.bath) +
                    model.dissipative_bracket(energy, ClassicalObservable::entropy(model.curve_ptr()),
                                              state.bath);

    if (!has_dissipation(spec)) return out;

    const Mollifier mollifier(state.rho, spec.options().kernel, spec.options().p_floor);
    for (std::size_t k = 0; k < spec.channels().size(); ++k) {
        const auto& ch = spec.channels()[k];
        if (ch.zeta == 0.0) continue;
        const BracketCoefficients e = bracket_coefficients(ch, model, state.bath);
        const Matrix& q = ch.q.matrix();
        const Matrix& drive = spec.channel_drive(k);  // {Q,H}

        const Matrix drive_rho = mollifier.apply(drive);
        out.rho_rate += e.e_hs * quantum_poisson(q, drive_rho, c);
        out.rho_rate += c.k_B * e.e_hh * quantum_poisson(q, quantum_poisson(q, rho, c), c);

        // <{Q,{Q,H}}> and <<{H,Q};{H,Q}>> = <<{Q,H};{Q,H}>>
        const double qqh = average(quantum_poisson(q, drive, c), rho);
        out.bath_rate += -c.k_B * e.e_hh * qqh + e.e_hs * mollifier.correlation(drive, drive);
    }
    return out;
}

Matrix master_rhs(const CoupledState& state, const SystemSpec& spec)
{
    return coupled_rhs(state, spec).rho_rate;
}

double classical_rhs(const CoupledState& state, const SystemSpec& spec)
{
    return coupled_rhs(state, spec).bath_rate;
}

AverageRateTerms average_rhs_terms(const Matrix& a, const CoupledState& state,
                                   const SystemSpec& spec)
{
    require_state_dim(state, spec, "average_rhs");
    require_same_dim(a, spec.hamiltonian().matrix(), "average_rhs");
    const auto& c = spec.constants();
    const Matrix& rho = state.rho.matrix();

    AverageRateTerms out;
    out.reversible = average(quantum_poisson(a, spec.hamiltonian().matrix(), c), rho);
    if (!has_dissipation(spec)) return out;

    const Mollifier mollifier(state.rho, spec.options().kernel, spec.options().p_floor);
    for (std::size_t k = 0; k < spec.channels().size(); ++k) {
        const auto& ch = spec.channels()[k];
        if (ch.zeta == 0.0) continue;
        const BracketCoefficients e = bracket_coefficients(ch, spec.bath_model(), state.bath);
        const Matrix& q = ch.q.matrix();
        const Matrix aq = quantum_poisson(a, q, c);
        const Matrix hq = quantum_poisson(spec.hamiltonian().matrix(), q, c);
        out.friction -= e.e_hs * mollifier.correlation(aq, hq);
        out.diffusion += c.k_B * e.e_hh * average(quantum_poisson(q, quantum_poisson(q, a, c), c), rho);
    }
    return out;
}

double average_rhs(const HermitianOperator& a, const CoupledState& state, const SystemSpec& spec)
{
    return average_rhs_terms(a.matrix(), state, spec).total();
}

JointObservable total_energy_observable(const SystemSpec& spec)
{
    return {spec.hamiltonian().matrix(), ClassicalObservable::energy()};
}

JointObservable total_entropy_observable(const CoupledState& state, const SystemSpec& spec)
{
    return {entropy_operator(state.rho, spec.constants(), spec.options().p_floor).matrix(),
            ClassicalObservable::entropy(spec.bath_model().curve_ptr())};
}

double total_energy(const CoupledState& state, const SystemSpec& spec)
{
    return average(spec.hamiltonian().matrix(), state.rho.matrix()) + state.bath.energy;
}

double total_entropy(const CoupledState& state, const SystemSpec& spec)
{
    return von_neumann_entropy(state.rho, spec.constants(), spec.options().p_floor) +
           spec.bath_model().entropy(state.bath);
}

double poisson_contribution(const JointObservable& a, const JointObservable& b,
                            const CoupledState& state, const SystemSpec& spec)
{
    double out = spec.bath_model().poisson_bracket(a.classical, b.classical, state.bath);
    if (a.quantum && b.quantum) {
        out += average(quantum_poisson(*a.quantum, *b.quantum, spec.constants()), state.rho.matrix());
    }
    return out;
}

double dissipative_contribution(const JointObservable& a, const JointObservable& b,
                                const CoupledState& state, const SystemSpec& spec)
{
    require_state_dim(state, spec, "dissipative_contribution");
    const auto& model = spec.bath_model();
    const auto& c = spec.constants();
    double out = model.dissipative_bracket(a.classical, b.classical, state.bath);
    if (!has_dissipation(spec)) return out;

    const Mollifier mollifier(state.rho, spec.options().kernel, spec.options().p_floor);
    const ClassicalObservable energy = ClassicalObservable::energy();
    const Index d = spec.dim();
    for (std::size_t k = 0; k < spec.channels().size(); ++k) {
        const auto& ch = spec.channels()[k];
        if (ch.zeta == 0.0) continue;
        const Matrix& q = ch.q.matrix();
        const Matrix hq = -spec.channel_drive(k);  // {H,Q}
        const Matrix aq = a.quantum ? quantum_poisson(*a.quantum, q, c) : Matrix::Zero(d, d);
        const Matrix bq = b.quantum ? quantum_poisson(*b.quantum, q, c) : Matrix::Zero(d, d);

        const double e_hh = coupling_bracket(ch, model, state.bath, energy, energy);
        const double e_ah = coupling_bracket(ch, model, state.bath, a.classical, energy);
        const double e_hb = coupling_bracket(ch, model, state.bath, energy, b.classical);
        const double e_ab = coupling_bracket(ch, model, state.bath, a.classical, b.classical);

        out += e_hh * mollifier.correlation(aq, bq) - e_ah * mollifier.correlation(hq, bq) -
               e_hb * mollifier.correlation(aq, hq) + e_ab * mollifier.correlation(hq, hq);
    }
    return out;
}

double entropy_production(const CoupledState& state, const SystemSpec& spec)
{
    const JointObservable s = total_entropy_observable(state, spec);
    return dissipative_contribution(s, s, state, spec);
}

} // namespace qdiss
