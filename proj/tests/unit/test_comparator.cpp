#include <doctest.h>

#include <cmath>
#include <memory>
#include <random>

#include "oracles.hpp"
#include "qdiss/comparator.hpp"
#include "qdiss/errors.hpp"
#include "qdiss/models.hpp"

using namespace qdiss;

namespace {

SystemSpec two_level_spec(double omega, double gamma0, double t)
{
    const TwoLevelModel m = build_two_level(omega, gamma0, t);
    return SystemSpec(m.h, m.channels, std::make_shared<BathModel>(std::make_shared<LinearEntropyCurve>(t)));
}

} // namespace

TEST_CASE("vec / unvec are column stacking")
{
    Matrix m(2, 2);
    m << 1.0, 2.0, 3.0, 4.0;
    const Eigen::VectorXcd v = vec(m);
    CHECK(v(1) == Complex(3.0, 0.0));
    CHECK(v(2) == Complex(2.0, 0.0));
    CHECK(max_abs(unvec(v, 2) - m) == 0.0);
}

TEST_CASE("linearized two-level generator is the thermal Lindblad generator")
{
    for (double t : {0.6, 1.0, 3.0}) {
        const double omega = 1.3, gamma0 = 0.1;
        const SystemSpec spec = two_level_spec(omega, gamma0, t);
        const Superoperator gen = build_generator(spec, {gibbs_state(spec.hamiltonian(), t), {0.0}},
                                                  GeneratorMode::linearized);
        const double gamma = 2.0 * gamma0 * t / omega;
        const Matrix ref = oracle::two_level_lindblad(omega, 0.5 * (gamma + gamma0), 0.5 * (gamma - gamma0));
        CHECK(max_abs(gen.matrix - ref) <= 1e-12);
        CHECK(gen.trace_defect() < 1e-14);
        CHECK(gen.hermiticity_defect() < 1e-14);
    }
}

TEST_CASE("linearized rhs is linear and matches its generator")
{
    std::mt19937_64 rng(201);
    const SystemSpec spec = two_level_spec(1.0, 0.3, 0.8);
    const Matrix x = oracle::random_density(2, 0.1, rng);
    const Matrix y = oracle::random_hermitian(2, rng);
    const BathState b{0.0};
    CHECK(max_abs(linearized_rhs(Matrix(2.0 * x - 0.5 * y), b, spec) -
                  (2.0 * linearized_rhs(x, b, spec) - 0.5 * linearized_rhs(y, b, spec))) < 1e-14);
    const Superoperator gen = build_generator(spec, {DensityMatrix(x), b}, GeneratorMode::linearized);
    CHECK(max_abs(gen.apply(y) - linearized_rhs(y, b, spec)) < 1e-14);

    // the linearized bath rate closes the energy balance
    const StateRates r = linearized_rates(x, b, spec);
    CHECK(std::abs(r.bath_rate + average(spec.hamiltonian().matrix(), r.rho_rate)) < 1e-14);
}

TEST_CASE("nonlinear tangent generator")
{
    std::mt19937_64 rng(202);
    const SystemSpec spec = two_level_spec(1.0, 0.3, 0.8);
    const CoupledState st{DensityMatrix(oracle::random_density(2, 0.05, rng)), {0.0}};
    const Superoperator tan = build_generator(spec, st, GeneratorMode::nonlinear_tangent);
    // degree-one homogeneity: L(rho) = rhs(rho)
    CHECK(max_abs(tan.apply(st.rho.matrix()) - master_rhs(st, spec)) < 1e-8);
    CHECK(tan.trace_defect() < 1e-8);
    CHECK(tan.hermiticity_defect() < 1e-8);

    // at the Gibbs state the tangent has a zero mode and decaying rest
    const CoupledState g{gibbs_state(spec.hamiltonian(), 0.8), {0.0}};
    const GeneratorRates rates = generator_rates(build_generator(spec, g, GeneratorMode::nonlinear_tangent), 1e-7);
    CHECK(rates.spectral_gap > 0.0);

    const CoupledState pure{DensityMatrix::diagonal({1.0, 0.0}), {0.0}};
    CHECK_THROWS_AS(build_generator(spec, pure, GeneratorMode::nonlinear_tangent), PositivityError);
}

TEST_CASE("generator rates of the two-level Lindbladian")
{
    // populations relax at g_down + g_up = gamma, coherences at gamma / 2
    const SystemSpec spec = two_level_spec(1.0, 0.1, 1.0);
    const GeneratorRates r = generator_rates(
        build_generator(spec, {gibbs_state(spec.hamiltonian(), 1.0), {0.0}}, GeneratorMode::linearized));
    CHECK(r.spectral_gap == doctest::Approx(0.1));
    CHECK(r.real_mode_rate == doctest::Approx(0.2));
}

TEST_CASE("relaxation-rate fit")
{
    std::vector<double> t, x;
    for (int i = 0; i <= 100; ++i) {
        t.push_back(0.1 * i);
        x.push_back(2.0 + 3.0 * std::exp(-0.7 * t.back()));
    }
    const auto rate = fit_relaxation_rate(t, x, 2.0, 1.0, 8.0);
    REQUIRE(rate.has_value());
    CHECK(*rate == doctest::Approx(0.7).epsilon(1e-10));
    CHECK_FALSE(fit_relaxation_rate(t, x, 2.0, 20.0, 30.0).has_value());
}

TEST_CASE("without friction both dynamics coincide")
{
    const SystemSpec spec = two_level_spec(1.0, 0.0, 1.0);
    ComparisonScenario sc{"closed", spec, {DensityMatrix::diagonal({0.3, 0.7}), {0.0}}, {}, {}, 1e-6};
    sc.config.dt = 0.01;
    sc.config.t_end = 2.0;
    sc.config.monitor_stride = 10;
    Matrix rho(2, 2);
    rho << 0.3, Complex(0.2, 0.1), Complex(0.2, -0.1), 0.7;
    sc.initial = {DensityMatrix(rho), {0.0}};
    const ComparisonReport rep = compare_trajectories(
        sc, {{"sigma1", pauli::sigma1()}, {"sigma3", pauli::sigma3()}},
        {{"sigma3_sigma3", pauli::sigma3(), pauli::sigma3()}});
    for (const auto& tr : rep.tracks) {
        CHECK(tr.finite);
        CHECK(tr.sup_difference <= 1e-12);
    }
    CHECK(rep.steady_state_trace_distance < 1e-12);
}

TEST_CASE("compare requires fixed steps")
{
    const SystemSpec spec = two_level_spec(1.0, 0.1, 1.0);
    ComparisonScenario sc{"x", spec, {DensityMatrix::diagonal({0.3, 0.7}), {0.0}}, {}, {}, 1e-6};
    sc.config.method = Method::rk45_adaptive;
    CHECK_THROWS_AS(compare_trajectories(sc, {}), DomainError);
}
