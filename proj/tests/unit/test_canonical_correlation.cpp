#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qdiss/canonical_correlation.hpp"
#include "qdiss/errors.hpp"

using namespace qdiss;

TEST_CASE("log mean")
{
    CHECK(log_mean(0.5, 0.5) == 0.5);
    CHECK(log_mean(0.2, 0.1) == doctest::Approx(0.1 / std::log(2.0)).epsilon(1e-15));
    CHECK(log_mean(0.1, 0.2) == log_mean(0.2, 0.1));
    // continuous across the near-equal branch
    const double p = 0.3;
    const double q = p * (1.0 + 2e-8);
    const double near = log_mean(p, q);
    // series about q = p: L = p (1 + x/2 - x^2/12 + x^3/24 ...), x = (q - p)/p
    const double x = (q - p) / p;
    const double series = p * (1.0 + x / 2.0 - x * x / 12.0 + x * x * x / 24.0);
    CHECK(std::abs(near - series) < 1e-15);
    // lies between the geometric and arithmetic means
    CHECK(log_mean(1e-6, 0.5) > std::sqrt(1e-6 * 0.5));
    CHECK(log_mean(1e-6, 0.5) < 0.5 * (1e-6 + 0.5));

    LogMeanKernel bad;
    bad.rel_tol_equal = 0.1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("mollified product against Gauss-Legendre quadrature")
{
    std::mt19937_64 rng(11);
    for (int d : {2, 3, 5, 8}) {
        const DensityMatrix rho(oracle::random_density(d, 1e-4, rng));
        const Matrix a = oracle::random_hermitian(d, rng);
        const Matrix ours = mollified_product(a, rho);
        const Matrix ref = oracle::mollified_by_quadrature(rho.matrix(), a);
        CHECK(max_abs(ours - ref) <= 1e-10 * max_abs(ref));
    }
}

TEST_CASE("special cases of the mollifier")
{
    std::mt19937_64 rng(5);
    const DensityMatrix rho(oracle::random_density(4, 1e-3, rng));
    // (1)_rho = rho
    CHECK(max_abs(mollified_product(Matrix::Identity(4, 4), rho) - rho.matrix()) < 1e-14);
    // A commuting with rho: A_rho = A rho
    const Matrix f = rho.spectrum().apply([](double p) { return std::sqrt(p); });
    CHECK(max_abs(mollified_product(f, rho) - f * rho.matrix()) < 1e-14);
    // maximally mixed: A_rho = A / d
    const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
    const Matrix a = oracle::random_hermitian(4, rng);
    CHECK(max_abs(mollified_product(a, mixed) - a / 4.0) < 1e-15);
}

TEST_CASE("canonical correlation is a symmetric positive pairing")
{
    std::mt19937_64 rng(19);
    const DensityMatrix rho(oracle::random_density(6, 1e-5, rng));
    const Matrix a = oracle::random_hermitian(6, rng), b = oracle::random_hermitian(6, rng);
    const double ab = canonical_correlation(a, b, rho);
    CHECK(ab == doctest::Approx(canonical_correlation(b, a, rho)).epsilon(1e-12));
    CHECK(canonical_correlation(a, a, rho) > 0.0);
    // <<1; A>> = <A>
    CHECK(canonical_correlation(Matrix::Identity(6, 6), a, rho) ==
          doctest::Approx(average(a, rho.matrix())).epsilon(1e-12));
    // Mollifier reuses its weights and agrees with the free function
    const Mollifier mol(rho);
    CHECK(mol.correlation(a, b) == doctest::Approx(ab).epsilon(1e-14));
}

TEST_CASE("kernel refuses states below the floor")
{
    const DensityMatrix rho = DensityMatrix::diagonal({1.0, 0.0});
    CHECK_THROWS_AS(mollified_product(pauli::sigma1(), rho), PositivityError);
}

TEST_CASE("lemma and double-commutator identity residuals")
{
    std::mt19937_64 rng(23);
    for (int d : {2, 4, 7}) {
        const DensityMatrix rho(oracle::random_density(d, 1e-6, rng));
        const HermitianOperator a(oracle::random_hermitian(d, rng));
        const HermitianOperator q(oracle::random_hermitian(d, rng));
        CHECK(verify_ln_lemma(a, rho) <= 1e-10 * max_abs(a.matrix()));
        const IdentityResidual r = verify_double_commutator_identity(a, q, rho);
        CHECK(r.residual <= 1e-10 * std::max(1.0, r.scale));
        CHECK(r.lhs == doctest::Approx(r.rhs).epsilon(1e-8));
    }
}
