#include <doctest.h>

#include <memory>
#include <random>

#include "oracles.hpp"
#include "qdiss/errors.hpp"
#include "qdiss/generic_dynamics.hpp"
#include "qdiss/models.hpp"

using namespace qdiss;

namespace {

std::shared_ptr<const BathModel> linear_bath(double t)
{
    return std::make_shared<BathModel>(std::make_shared<LinearEntropyCurve>(t));
}

SystemSpec random_spec(int d, int channels, double t, std::mt19937_64& rng)
{
    std::vector<CouplingChannel> ch;
    std::uniform_real_distribution<double> z(0.05, 0.5);
    for (int k = 0; k < channels; ++k) {
        ch.emplace_back(HermitianOperator(oracle::random_hermitian(d, rng)), z(rng));
    }
    return SystemSpec(HermitianOperator(oracle::random_hermitian(d, rng)), std::move(ch), linear_bath(t));
}

} // namespace

TEST_CASE("master rhs is Hermitian and traceless")
{
    std::mt19937_64 rng(101);
    for (int d : {2, 3, 6}) {
        const SystemSpec spec = random_spec(d, 2, 0.7, rng);
        const CoupledState st{DensityMatrix(oracle::random_density(d, 1e-5, rng)), {1.0}};
        const Matrix r = master_rhs(st, spec);
        CHECK(hermiticity_residual(r) < 1e-13 * std::max(1.0, max_abs(r)));
        CHECK(std::abs(r.trace()) < 1e-13 * std::max(1.0, max_abs(r)));
    }
}

TEST_CASE("averaged equation matches the master equation")
{
    std::mt19937_64 rng(102);
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 2 + trial % 5;
        const SystemSpec spec = random_spec(d, 1 + trial % 2, 1.3, rng);
        const CoupledState st{DensityMatrix(oracle::random_density(d, 1e-4, rng)), {0.0}};
        const HermitianOperator a(oracle::random_hermitian(d, rng));
        const double direct = average_rhs(a, st, spec);
        const double via_rho = average(a.matrix(), master_rhs(st, spec));
        CHECK(std::abs(direct - via_rho) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("total energy is conserved pointwise")
{
    std::mt19937_64 rng(103);
    const SystemSpec spec = random_spec(5, 2, 0.4, rng);
    const CoupledState st{DensityMatrix(oracle::random_density(5, 1e-6, rng)), {2.0}};
    const StateRates r = coupled_rhs(st, spec);
    const double de = average(spec.hamiltonian().matrix(), r.rho_rate) + r.bath_rate;
    CHECK(std::abs(de) <= 1e-10 * std::max(1.0, std::abs(r.bath_rate)));
    CHECK(r.bath_rate == doctest::Approx(classical_rhs(st, spec)).epsilon(1e-12));
    CHECK(max_abs(r.rho_rate - master_rhs(st, spec)) < 1e-14);
}

TEST_CASE("entropy production is non-negative and equals dS/dt")
{
    std::mt19937_64 rng(104);
    for (int trial = 0; trial < 8; ++trial) {
        const int d = 2 + trial;
        const SystemSpec spec = random_spec(d, 2, 0.9, rng);
        const CoupledState st{DensityMatrix(oracle::random_density(d, 1e-6, rng)), {0.0}};
        const double sigma = entropy_production(st, spec);
        CHECK(sigma >= -1e-10);

        // dS/dt = -k_B tr(drho/dt ln rho) + (dH_e/dt) / T_e
        const StateRates r = coupled_rhs(st, spec);
        const Matrix lnr = st.rho.spectrum().apply([](double p) { return std::log(p); });
        const double ds = -average(lnr, r.rho_rate) + r.bath_rate / 0.9;
        CHECK(ds == doctest::Approx(sigma).epsilon(1e-8).scale(1e-10));
    }
}

TEST_CASE("Gibbs state at the bath temperature is stationary for any coupling")
{
    std::mt19937_64 rng(105);
    const double t = 0.8;
    const SystemSpec spec = random_spec(5, 2, t, rng);
    const CoupledState st{gibbs_state(spec.hamiltonian(), t), {0.0}};
    CHECK(max_abs(master_rhs(st, spec)) < 1e-12);
    CHECK(std::abs(entropy_production(st, spec)) < 1e-12);

    // ... but not at another temperature
    const CoupledState hot{gibbs_state(spec.hamiltonian(), 2.0 * t), {0.0}};
    CHECK(max_abs(master_rhs(hot, spec)) > 1e-4);
}

TEST_CASE("coupling observable is untouched by its own dissipation")
{
    std::mt19937_64 rng(106);
    const SystemSpec spec = random_spec(6, 1, 1.1, rng);
    const CoupledState st{DensityMatrix(oracle::random_density(6, 1e-5, rng)), {0.0}};
    const AverageRateTerms terms = average_rhs_terms(spec.channels()[0].q.matrix(), st, spec);
    CHECK(std::abs(terms.friction) < 1e-12);
    CHECK(std::abs(terms.diffusion) < 1e-12);
}

TEST_CASE("closed system is reversible")
{
    std::mt19937_64 rng(107);
    const SystemSpec spec(HermitianOperator(oracle::random_hermitian(4, rng)), {}, linear_bath(1.0));
    const CoupledState st{DensityMatrix(oracle::random_density(4, 1e-3, rng)), {0.0}};
    const PhysicalConstants c;
    const Matrix expect = -quantum_poisson(st.rho.matrix(), spec.hamiltonian().matrix(), c);
    CHECK(max_abs(master_rhs(st, spec) - expect) < 1e-14);
    CHECK(classical_rhs(st, spec) == 0.0);
    CHECK(entropy_production(st, spec) == doctest::Approx(0.0).scale(1e-14));
}

TEST_CASE("dissipative bracket: symmetric, degenerate in the energy")
{
    std::mt19937_64 rng(108);
    const SystemSpec spec = random_spec(4, 2, 0.6, rng);
    const CoupledState st{DensityMatrix(oracle::random_density(4, 1e-4, rng)), {0.0}};
    const JointObservable e = total_energy_observable(spec);
    const JointObservable s = total_entropy_observable(st, spec);
    JointObservable a;
    a.quantum = oracle::random_hermitian(4, rng);
    CHECK(std::abs(dissipative_contribution(e, s, st, spec)) < 1e-12);
    CHECK(std::abs(dissipative_contribution(a, e, st, spec)) < 1e-12);
    CHECK(dissipative_contribution(a, s, st, spec) ==
          doctest::Approx(dissipative_contribution(s, a, st, spec)).epsilon(1e-10));
    CHECK(dissipative_contribution(s, s, st, spec) == doctest::Approx(entropy_production(st, spec)).epsilon(1e-10));
}

TEST_CASE("spec validation")
{
    std::mt19937_64 rng(109);
    std::vector<CouplingChannel> ch;
    ch.emplace_back(HermitianOperator(oracle::random_hermitian(3, rng)), 0.1);
    CHECK_THROWS_AS(SystemSpec(HermitianOperator(oracle::random_hermitian(4, rng)), ch, linear_bath(1.0)),
                    DimensionError);
}
