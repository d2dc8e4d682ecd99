// models.cpp — Prebuilt particle and two-level systems

#include "qdiss/models.hpp"

#include <cmath>
#include <sstream>

#include "qdiss/errors.hpp"

namespace qdiss {

namespace {

Matrix hermitian_part(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

Matrix lowering_operator(Index n)
{
    Matrix a = Matrix::Zero(n, n);
    for (Index k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
    return a;
}

} // namespace

Polynomial Polynomial::harmonic(double mass, double omega)
{
    Polynomial v;
    v.coefficients[2] = 0.5 * mass * omega * omega;
    return v;
}

double Polynomial::operator()(double x) const
{
    double acc = 0.0;
    for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * x + *it;
    return acc;
}

Polynomial Polynomial::derivative() const
{
    Polynomial d;
    for (std::size_t k = 1; k < coefficients.size(); ++k) {
        d.coefficients[k - 1] = static_cast<double>(k) * coefficients[k];
    }
    return d;
}

double Polynomial::derivative(double x) const
{
    return derivative()(x);
}

int Polynomial::degree() const
{
    for (int k = static_cast<int>(coefficients.size()) - 1; k >= 0; --k) {
        if (coefficients[static_cast<std::size_t>(k)] != 0.0) return k;
    }
    return 0;
}

CouplingChannel ParticleModel::channel(double zeta) const
{
    return CouplingChannel(q, zeta, "Q");
}

HermitianOperator ParticleModel::qq() const
{
    return HermitianOperator(hermitian_part(q.matrix() * q.matrix()), Unit::other);
}

HermitianOperator ParticleModel::pp() const
{
    return HermitianOperator(hermitian_part(p.matrix() * p.matrix()), Unit::other);
}

HermitianOperator ParticleModel::pq_sym() const
{
    return HermitianOperator(anticommutator(p.matrix(), q.matrix()), Unit::other);
}

ParticleModel build_particle(double mass, const Polynomial& potential, Index basis_dim,
                             const PhysicalConstants& c, double basis_omega)
{
    c.validate();
    if (basis_dim < 4) throw DomainError("build_particle: basis dimension N must be >= 4");
    if (!(std::isfinite(mass) && mass > 0.0)) throw DomainError("build_particle: mass must be positive");
    for (double coeff : potential.coefficients) {
        if (!std::isfinite(coeff)) throw DomainError("build_particle: non-finite potential coefficient");
    }
    if (basis_omega <= 0.0) {
        const double c2 = potential.coefficients[2];
        basis_omega = c2 > 0.0 ? std::sqrt(2.0 * c2 / mass) : 1.0;
    }

    const Matrix a = lowering_operator(basis_dim);
    const Matrix ad = a.adjoint();
    const double q_scale = std::sqrt(c.hbar / (2.0 * mass * basis_omega));
    const double p_scale = std::sqrt(c.hbar * mass * basis_omega / 2.0);
    const Matrix q = q_scale * (a + ad);
    const Matrix p = Complex(0.0, p_scale) * (ad - a);

    Matrix v = Matrix::Zero(basis_dim, basis_dim);
    Matrix q_power = Matrix::Identity(basis_dim, basis_dim);
    for (std::size_t k = 0; k < potential.coefficients.size(); ++k) {
        if (k > 0) q_power = q_power * q;
        v += potential.coefficients[k] * q_power;
    }
    const Matrix h = p * p / (2.0 * mass) + v;

    // Guard: the assembly above must already be Hermitian.
    const double residual = hermiticity_residual(h);
    if (residual > 1e-12 * std::max(1.0, max_abs(h))) {
        std::ostringstream os;
        os << "build_particle: assembled Hamiltonian is not Hermitian (residual " << residual << ")";
        throw std::logic_error(os.str());
    }

    return ParticleModel{mass,
                         potential,
                         basis_omega,
                         HermitianOperator(q, Unit::length),
                         HermitianOperator(p, Unit::momentum),
                         HermitianOperator(hermitian_part(h), Unit::energy)};
}

double caldeira_leggett_zeta(double gamma, double mass)
{
    return 2.0 * gamma * mass;
}

TwoLevelModel build_two_level(double omega, double gamma0, double temperature,
                              const PhysicalConstants& c)
{
    c.validate();
    if (!(std::isfinite(omega) && omega > 0.0)) throw DomainError("build_two_level: omega must be > 0");
    if (!(std::isfinite(gamma0) && gamma0 >= 0.0)) throw DomainError("build_two_level: gamma0 must be >= 0");
    if (!(std::isfinite(temperature) && temperature > 0.0)) {
        throw DomainError("build_two_level: temperature must be > 0");
    }
    const double zeta = c.hbar * gamma0 / (4.0 * omega);
    const double rate = 2.0 * gamma0 * c.k_B * temperature / (c.hbar * omega);
    HermitianOperator h(0.5 * c.hbar * omega * pauli::sigma3(), Unit::energy);
    std::vector<CouplingChannel> channels;
    channels.emplace_back(HermitianOperator(pauli::sigma1()), zeta, "sigma1");
    channels.emplace_back(HermitianOperator(pauli::sigma2()), zeta, "sigma2");
    return TwoLevelModel{omega, gamma0, temperature, zeta, rate, std::move(h), std::move(channels)};
}

DensityMatrix gibbs_state(const HermitianOperator& h, double temperature, const PhysicalConstants& c)
{
    if (!(std::isfinite(temperature) && temperature > 0.0)) {
        throw DomainError("gibbs_state: temperature must be finite and positive");
    }
    const EigenDecomposition eig = eigh(h);
    const double e0 = eig.eigenvalues(0);
    const double beta = 1.0 / (c.k_B * temperature);
    RealVector w = (-(eig.eigenvalues.array() - e0) * beta).exp().matrix();
    w /= w.sum();
    const Matrix rho = eig.eigenvectors * w.asDiagonal() * eig.eigenvectors.adjoint();
    return DensityMatrix(hermitian_part(rho));
}

DensityMatrix displaced_thermal_state(const ParticleModel& model, double temperature, double q0,
                                      double p0, const PhysicalConstants& c)
{
    if (!std::isfinite(q0) || !std::isfinite(p0)) throw DomainError("displaced_thermal_state: non-finite displacement");
    const Index n = model.dim();
    const double w = model.basis_omega;
    const double m = model.mass;

    // Displacement D = exp(alpha a^dagger - conj(alpha) a), formed in an enlarged
    // ladder basis where it is accurate on the low levels. The columns of its
    // N x N block are orthonormalized in order (QR), which leaves the low
    // displaced levels intact and confines the truncation damage to the
    // top ones; the state keeps exactly the Gibbs spectrum of the model.
    const Index big = 2 * n + 32;
    const Matrix a = lowering_operator(big);
    const Complex alpha(q0 * std::sqrt(m * w / (2.0 * c.hbar)), p0 / std::sqrt(2.0 * c.hbar * m * w));
    const Matrix k = Complex(0.0, 1.0) * (alpha * a.adjoint() - std::conj(alpha) * a);  // D = exp(-i K)
    const EigenDecomposition eig = eigh(hermitian_part(k));
    const Eigen::VectorXcd phases = (eig.eigenvalues.cast<Complex>() * Complex(0.0, -1.0)).array().exp().matrix();
    const Matrix d = eig.eigenvectors * phases.asDiagonal() * eig.eigenvectors.adjoint();

    const Eigen::HouseholderQR<Matrix> qr(d.topLeftCorner(n, n));
    Matrix u = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        const double mag = std::abs(r(j, j));
        if (mag > 0.0) u.col(j) *= r(j, j) / mag;  // fix the column phase so u -> 1 as alpha -> 0
    }

    // Thermal occupations of the ladder oscillator, p_n ~ exp(-n hbar W / k_B T).
    // The model Hamiltonian is not used here: its truncated top level sits
    // at roughly half the ladder energy and would be thermally populated.
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw DomainError("displaced_thermal_state: temperature must be positive and finite");
    }
    const double beta_w = c.hbar * w / (c.k_B * temperature);
    RealVector pops(n);
    for (Index j = 0; j < n; ++j) pops(j) = std::exp(-beta_w * static_cast<double>(j));
    pops /= pops.sum();
    return DensityMatrix(hermitian_part(u * pops.asDiagonal() * u.adjoint()));
}

} // namespace qdiss
