// operator_algebra.cpp — Dense operator foundation

#include "qdiss/operator_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdiss/errors.hpp"

namespace qdiss {

namespace {

constexpr double kPhaseTol = 1e-10;

void require_square_finite(const Matrix& m, const char* where)
{
    if (m.rows() == 0 || m.rows() != m.cols()) {
        std::ostringstream os;
        os << where << ": expected a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        throw DimensionError(os.str());
    }
    if (!m.allFinite()) {
        throw DomainError(std::string(where) + ": matrix has non-finite entries");
    }
}

} // namespace

PhysicalConstants PhysicalConstants::si()
{
    return {1.054571817e-34, 1.380649e-23};
}

void PhysicalConstants::validate() const
{
    if (!(std::isfinite(hbar) && hbar > 0.0)) throw DomainError("hbar must be finite and positive");
    if (!(std::isfinite(k_B) && k_B > 0.0)) throw DomainError("k_B must be finite and positive");
}

std::string_view to_string(Unit unit)
{
    switch (unit) {
    case Unit::dimensionless: return "dimensionless";
    case Unit::energy: return "energy";
    case Unit::length: return "length";
    case Unit::momentum: return "momentum";
    case Unit::other: return "other";
    }
    return "other";
}

double max_abs(const Matrix& m)
{
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

double hermiticity_residual(const Matrix& m)
{
    return max_abs(m - m.adjoint());
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* where)
{
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
        std::ostringstream os;
        os << where << ": dimension mismatch (" << a.rows() << "x" << a.cols() << " vs "
           << b.rows() << "x" << b.cols() << ")";
        throw DimensionError(os.str());
    }
}

HermitianOperator::HermitianOperator(Matrix matrix, Unit unit)
    : matrix_(std::move(matrix)), unit_(unit)
{
    require_square_finite(matrix_, "HermitianOperator");
    const double residual = hermiticity_residual(matrix_);
    if (residual > kHermitianRelTol * max_abs(matrix_)) {
        std::ostringstream os;
        os << "HermitianOperator: matrix is not Hermitian (||M - M^dagger||_max = " << residual
           << ", ||M||_max = " << max_abs(matrix_) << ")";
        throw DomainError(os.str());
    }
}

HermitianOperator HermitianOperator::identity(Index dim, Unit unit)
{
    return HermitianOperator(Matrix::Identity(dim, dim), unit);
}

HermitianOperator HermitianOperator::zero(Index dim, Unit unit)
{
    return HermitianOperator(Matrix::Zero(dim, dim), unit);
}

EigenDecomposition eigh(const Matrix& hermitian)
{
    require_square_finite(hermitian, "eigh");
    Eigen::SelfAdjointEigenSolver<Matrix> solver(hermitian);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("eigh: Hermitian eigensolver did not converge");
    }
    EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};

    // Fix the phase of every eigenvector deterministically.
    for (Index j = 0; j < out.eigenvectors.cols(); ++j) {
        auto col = out.eigenvectors.col(j);
        for (Index i = 0; i < col.size(); ++i) {
            const double mod = std::abs(col(i));
            if (mod > kPhaseTol) {
                col *= std::conj(col(i)) / mod;
                col(i) = Complex(mod, 0.0);
                break;
            }
        }
    }
    return out;
}

EigenDecomposition eigh(const HermitianOperator& m)
{
    return eigh(m.matrix());
}

DensityMatrix::DensityMatrix(Matrix matrix)
    : op_(std::move(matrix)), spectrum_(eigh(op_))
{
    const Complex tr = op_.matrix().trace();
    if (std::abs(tr.real() - 1.0) > kTraceTol || std::abs(tr.imag()) > kTraceTol) {
        std::ostringstream os;
        os.precision(17);
        os << "DensityMatrix: trace must be 1 within " << kTraceTol << ", got " << tr.real();
        throw DomainError(os.str());
    }
    if (spectrum_.eigenvalues(0) < -kNegativeEigenvalueTol) {
        std::ostringstream os;
        os << "DensityMatrix: negative eigenvalue " << spectrum_.eigenvalues(0);
        throw PositivityError(os.str(), spectrum_.eigenvalues(0));
    }
}

DensityMatrix DensityMatrix::maximally_mixed(Index dim)
{
    if (dim <= 0) throw DimensionError("maximally_mixed: dimension must be positive");
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

DensityMatrix DensityMatrix::diagonal(const std::vector<double>& populations)
{
    if (populations.empty()) throw DimensionError("diagonal: empty population vector");
    Matrix m = Matrix::Zero(static_cast<Index>(populations.size()), static_cast<Index>(populations.size()));
    for (std::size_t i = 0; i < populations.size(); ++i) {
        m(static_cast<Index>(i), static_cast<Index>(i)) = populations[i];
    }
    return DensityMatrix(std::move(m));
}

void DensityMatrix::require_full_rank(double p_floor) const
{
    const double lo = min_eigenvalue();
    if (lo < p_floor - kSpectralSlack) {
        std::ostringstream os;
        os << "density matrix eigenvalue " << lo << " is below the floor " << p_floor
           << "; ln(rho) and the log-mean kernel need a full-rank state";
        throw PositivityError(os.str(), lo);
    }
}

Matrix commutator(const Matrix& a, const Matrix& b)
{
    require_same_dim(a, b, "commutator");
    return a * b - b * a;
}

Matrix anticommutator(const Matrix& a, const Matrix& b)
{
    require_same_dim(a, b, "anticommutator");
    return a * b + b * a;
}

Matrix quantum_poisson(const Matrix& a, const Matrix& b, const PhysicalConstants& c)
{
    // 1/(i hbar) = -i/hbar
    return commutator(a, b) * Complex(0.0, -1.0 / c.hbar);
}

HermitianOperator quantum_poisson(const HermitianOperator& a, const HermitianOperator& b,
                                  const PhysicalConstants& c)
{
    return HermitianOperator(quantum_poisson(a.matrix(), b.matrix(), c), Unit::other);
}

double average(const Matrix& a, const Matrix& rho)
{
    require_same_dim(a, rho, "average");
    // tr(A rho) without forming the product
    const Complex tr = (a.transpose().cwiseProduct(rho)).sum();
    const double scale = std::max(1.0, max_abs(a)) * static_cast<double>(a.rows());
    if (std::abs(tr.imag()) > 1e-12 * scale) {
        std::ostringstream os;
        os << "average: imaginary residue " << tr.imag() << " signals a non-Hermitian operand";
        throw DomainError(os.str());
    }
    return tr.real();
}

double average(const HermitianOperator& a, const DensityMatrix& rho)
{
    return average(a.matrix(), rho.matrix());
}

HermitianOperator entropy_operator(const DensityMatrix& rho, const PhysicalConstants& c,
                                   double p_floor)
{
    rho.require_full_rank(p_floor);
    const double k_B = c.k_B;
    Matrix s = rho.spectrum().apply([k_B](double p) { return -k_B * std::log(p); });
    s = 0.5 * (s + s.adjoint()).eval();
    return HermitianOperator(std::move(s), Unit::other);
}

double von_neumann_entropy(const DensityMatrix& rho, const PhysicalConstants& c, double p_floor)
{
    rho.require_full_rank(p_floor);
    double s = 0.0;
    for (Index i = 0; i < rho.dim(); ++i) {
        const double p = rho.spectrum().eigenvalues(i);
        s -= p * std::log(p);
    }
    return c.k_B * s;
}

double trace_distance(const Matrix& a, const Matrix& b)
{
    require_same_dim(a, b, "trace_distance");
    const Matrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw ConvergenceError("trace_distance: eigensolver failed");
    return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

namespace pauli {

Matrix sigma1()
{
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Matrix sigma2()
{
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

Matrix sigma3()
{
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

} // namespace pauli

} // namespace qdiss
