// operator_algebra.hpp — Dense complex operators, density matrices and brackets
//
// All operators are dense Eigen::MatrixXcd. HermitianOperator and
// DensityMatrix validate their invariants on construction and are immutable
// afterwards, so they can be shared freely between threads.

#pragma once

#include <complex>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qdiss {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianRelTol = 1e-12;
inline constexpr double kTraceTol = 1e-12;
inline constexpr double kNegativeEigenvalueTol = 1e-12;

// Rounding slack used when comparing eigenvalues against a positive floor.
// Reconstructing U diag(p) U^dagger and re-diagonalizing moves eigenvalues by
// a few ulps of ||rho|| <= 1.
inline constexpr double kSpectralSlack = 1e-14;
inline constexpr double kDefaultPFloor = 1e-12;

struct PhysicalConstants {
    double hbar = 1.0;
    double k_B = 1.0;

    static PhysicalConstants natural() { return {}; }
    static PhysicalConstants si();

    // Throws DomainError unless both constants are finite and positive.
    void validate() const;
};

enum class Unit { dimensionless, energy, length, momentum, other };

std::string_view to_string(Unit unit);

// max |m_ij|
double max_abs(const Matrix& m);

// ||M - M^dagger||_max
double hermiticity_residual(const Matrix& m);

class HermitianOperator {
public:
    // Rejects non-square, non-finite or non-Hermitian input
    // (||M - M^dagger||_max > 1e-12 ||M||_max). No symmetrization is applied.
    explicit HermitianOperator(Matrix matrix, Unit unit = Unit::dimensionless);

    static HermitianOperator identity(Index dim, Unit unit = Unit::dimensionless);
    static HermitianOperator zero(Index dim, Unit unit = Unit::dimensionless);

    const Matrix& matrix() const noexcept { return matrix_; }
    Index dim() const noexcept { return matrix_.rows(); }
    Unit unit() const noexcept { return unit_; }

private:
    Matrix matrix_;
    Unit unit_;
};

struct EigenDecomposition {
    RealVector eigenvalues;   // ascending
    Matrix eigenvectors;      // columns, unitary

    Index dim() const noexcept { return eigenvalues.size(); }

    // U f(Lambda) U^dagger for a real function of the eigenvalues
    template <typename F>
    Matrix apply(F&& f) const
    {
        RealVector fx(eigenvalues.size());
        for (Index i = 0; i < eigenvalues.size(); ++i) fx(i) = f(eigenvalues(i));
        return eigenvectors * fx.asDiagonal() * eigenvectors.adjoint();
    }
};

// Hermitian eigensolver. Eigenvalues ascending; each eigenvector is rotated so
// that its first component with modulus above 1e-10 is real and positive.
EigenDecomposition eigh(const HermitianOperator& m);
EigenDecomposition eigh(const Matrix& hermitian);

class DensityMatrix {
public:
    // Hermitian, unit trace within 1e-12, eigenvalues >= -1e-12.
    // The spectral decomposition is computed here once and never changes.
    explicit DensityMatrix(Matrix matrix);

    static DensityMatrix maximally_mixed(Index dim);
    static DensityMatrix diagonal(const std::vector<double>& populations);

    const HermitianOperator& op() const noexcept { return op_; }
    const Matrix& matrix() const noexcept { return op_.matrix(); }
    const EigenDecomposition& spectrum() const noexcept { return spectrum_; }
    Index dim() const noexcept { return op_.dim(); }
    double min_eigenvalue() const noexcept { return spectrum_.eigenvalues(0); }

    // Throws PositivityError if any eigenvalue is below p_floor (up to
    // kSpectralSlack).
    void require_full_rank(double p_floor) const;

private:
    HermitianOperator op_;
    EigenDecomposition spectrum_;
};

// AB - BA
Matrix commutator(const Matrix& a, const Matrix& b);
// AB + BA
Matrix anticommutator(const Matrix& a, const Matrix& b);

// (1/(i hbar)) [A, B]
Matrix quantum_poisson(const Matrix& a, const Matrix& b, const PhysicalConstants& c);
HermitianOperator quantum_poisson(const HermitianOperator& a, const HermitianOperator& b,
                                  const PhysicalConstants& c);

// tr(A rho); throws DomainError if the imaginary residue exceeds 1e-12 (scaled).
double average(const HermitianOperator& a, const DensityMatrix& rho);
double average(const Matrix& a, const Matrix& rho);

// -k_B ln(rho). Requires every eigenvalue >= p_floor.
HermitianOperator entropy_operator(const DensityMatrix& rho, const PhysicalConstants& c,
                                   double p_floor = kDefaultPFloor);

// -k_B tr(rho ln rho) from the cached spectrum.
double von_neumann_entropy(const DensityMatrix& rho, const PhysicalConstants& c,
                           double p_floor = kDefaultPFloor);

// (1/2) sum of singular values of (a - b); both Hermitian.
double trace_distance(const Matrix& a, const Matrix& b);

// Pauli matrices in the basis (|0>, |1>) with sigma3 = diag(1, -1).
namespace pauli {
Matrix sigma1();
Matrix sigma2();
Matrix sigma3();
} // namespace pauli

void require_same_dim(const Matrix& a, const Matrix& b, const char* where);

} // namespace qdiss
