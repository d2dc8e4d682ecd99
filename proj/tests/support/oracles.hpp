// Test-side reference computations. Nothing here calls into the qdiss
// spectral kernels; each oracle is built from a different formulation of the
// same quantity so that agreement is evidence, not tautology.

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/legendre.hpp>
#include <boost/numeric/odeint.hpp>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

// n-point Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;

    explicit GaussLegendre(int n)
    {
        // legendre_p_zeros returns the non-negative roots in ascending order
        const std::vector<double> zeros = boost::math::legendre_p_zeros<double>(n);
        auto add = [&](double x) {
            const double dp = boost::math::legendre_p_prime<double>(n, x);
            nodes.push_back(0.5 * (x + 1.0));
            weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));  // 2/((1-x^2)P'^2), halved for [0,1]
        };
        for (double z : zeros) {
            if (z == 0.0) {
                add(0.0);
            } else {
                add(z);
                add(-z);
            }
        }
    }
};

// rho^s for a positive definite Hermitian matrix, by its own eigensolve.
inline Matrix hermitian_power(const Eigen::SelfAdjointEigenSolver<Matrix>& es, double s)
{
    Eigen::VectorXd ps = es.eigenvalues().array().pow(s).matrix();
    return es.eigenvectors() * ps.asDiagonal() * es.eigenvectors().adjoint();
}

// int_0^1 rho^lambda A rho^(1-lambda) dlambda by quadrature.
inline Matrix mollified_by_quadrature(const Matrix& rho, const Matrix& a, int nodes = 64)
{
    const Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    const GaussLegendre gl(nodes);
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (std::size_t k = 0; k < gl.nodes.size(); ++k) {
        const double l = gl.nodes[k];
        out += gl.weights[k] * (hermitian_power(es, l) * a * hermitian_power(es, 1.0 - l));
    }
    return out;
}

// Quantum-optical thermal Lindblad generator of a two-level atom,
//   L rho = -i[H, rho]/hbar + g_down D[s-] rho + g_up D[s+] rho,
//   D[c] rho = c rho c^dag - {c^dag c, rho}/2,
// as a column-stacked d^2 x d^2 matrix. Basis (|0>, |1>) with |0> the excited
// state (sigma3 = diag(1, -1)), so s- = |1><0|.
inline Matrix two_level_lindblad(double omega, double g_down, double g_up, double hbar = 1.0)
{
    Matrix sm = Matrix::Zero(2, 2);
    sm(1, 0) = 1.0;
    const Matrix sp = sm.adjoint();
    Matrix h = Matrix::Zero(2, 2);
    h(0, 0) = 0.5 * hbar * omega;
    h(1, 1) = -0.5 * hbar * omega;

    auto apply = [&](const Matrix& rho) {
        const Complex i(0.0, 1.0);
        Matrix out = -i / hbar * (h * rho - rho * h);
        auto dissipator = [&](const Matrix& c, double rate) {
            const Matrix cdc = c.adjoint() * c;
            out += rate * (c * rho * c.adjoint() - 0.5 * (cdc * rho + rho * cdc));
        };
        dissipator(sm, g_down);
        dissipator(sp, g_up);
        return out;
    };
    Matrix gen(4, 4);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 2; ++i) {
            Matrix e = Matrix::Zero(2, 2);
            e(i, j) = 1.0;
            const Matrix col = apply(e);
            gen.col(i + 2 * j) = Eigen::Map<const Eigen::VectorXcd>(col.data(), 4);
        }
    }
    return gen;
}

// Classical damped oscillator for the means:
//   dq/dt = p/m,  dp/dt = -m Omega^2 q - (zeta/m) p
// integrated with an adaptive Dormand-Prince scheme at tight tolerance.
inline std::vector<std::array<double, 2>> damped_oscillator(double m, double omega, double zeta,
                                                            double q0, double p0,
                                                            const std::vector<double>& times)
{
    using State = std::array<double, 2>;
    namespace ode = boost::numeric::odeint;
    auto rhs = [=](const State& x, State& dx, double) {
        dx[0] = x[1] / m;
        dx[1] = -m * omega * omega * x[0] - (zeta / m) * x[1];
    };
    std::vector<State> out;
    State x{q0, p0};
    out.push_back(x);
    auto stepper = ode::make_dense_output(1e-13, 1e-13, ode::runge_kutta_dopri5<State>());
    for (std::size_t k = 1; k < times.size(); ++k) {
        ode::integrate_adaptive(stepper, rhs, x, times[k - 1], times[k], 1e-3);
        out.push_back(x);
    }
    return out;
}

// ---- random ensembles ------------------------------------------------------

inline Matrix random_unitary(int d, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    Matrix z(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) z(i, j) = Complex(g(rng), g(rng));
    Eigen::HouseholderQR<Matrix> qr(z);
    Matrix q = qr.householderQ() * Matrix::Identity(d, d);
    const Matrix r = qr.matrixQR();
    for (int j = 0; j < d; ++j) q.col(j) *= std::polar(1.0, std::arg(r(j, j)));
    return q;
}

// Random full-rank density matrix: eigenvalues log-uniform over [min_eig, 1]
// before normalization, then mapped affinely so the smallest possible value
// is exactly min_eig and the trace is one.
inline Matrix random_density(int d, double min_eig, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(std::log(min_eig), 0.0);
    Eigen::VectorXd p(d);
    for (int i = 0; i < d; ++i) p(i) = std::exp(u(rng));
    p /= p.sum();
    p = (min_eig + (1.0 - d * min_eig) * p.array()).matrix();
    const Matrix v = random_unitary(d, rng);
    Matrix rho = v * p.asDiagonal() * v.adjoint();
    return 0.5 * (rho + rho.adjoint());
}

inline Matrix random_hermitian(int d, std::mt19937_64& rng, double scale = 1.0)
{
    std::normal_distribution<double> g(0.0, scale);
    Matrix a(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

} // namespace oracle
