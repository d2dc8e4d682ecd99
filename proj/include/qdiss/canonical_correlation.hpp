// canonical_correlation.hpp — Log-mean kernel, mollified product A_rho and the
// canonical (Kubo-Mori) correlation
//
// In the eigenbasis rho = sum_n p_n |n><n| the mollified product
//
//     A_rho = int_0^1 rho^lambda A rho^(1-lambda) dlambda
//
// has matrix elements <n|A_rho|m> = L(p_n, p_m) <n|A|m>, where L is the
// logarithmic mean (p - q) / (ln p - ln q). The canonical correlation is
// <<A; B>> = tr(A_rho B).

#pragma once

#include "qdiss/operator_algebra.hpp"

namespace qdiss {

struct LogMeanKernel {
    // |p - q| <= rel_tol_equal * max(p, q) is treated as p == q.
    double rel_tol_equal = 1e-8;

    // Throws DomainError unless rel_tol_equal is in (0, 1e-4].
    void validate() const;
};

double log_mean(double p, double q, const LogMeanKernel& kernel = {});

// d x d matrix of L(p_n, p_m) for the eigenvalues of rho.
Eigen::MatrixXd log_mean_weights(const RealVector& p, const LogMeanKernel& kernel = {});

// Applies the log-mean kernel of one density matrix to many operators; the
// weights are computed once from the cached spectrum.
class Mollifier {
public:
    Mollifier(const DensityMatrix& rho, const LogMeanKernel& kernel = {},
              double p_floor = kDefaultPFloor);

    // A_rho
    Matrix apply(const Matrix& a) const;
    // <<A; B>>
    double correlation(const Matrix& a, const Matrix& b) const;

    const DensityMatrix& rho() const noexcept { return rho_; }

private:
    const DensityMatrix& rho_;
    Eigen::MatrixXd weights_;
};

// A_rho using the cached spectrum of rho.
Matrix mollified_product(const Matrix& a, const DensityMatrix& rho,
                         const LogMeanKernel& kernel = {}, double p_floor = kDefaultPFloor);
HermitianOperator mollified_product(const HermitianOperator& a, const DensityMatrix& rho,
                                    const LogMeanKernel& kernel = {},
                                    double p_floor = kDefaultPFloor);

// <<A; B>> = tr(A_rho B)
double canonical_correlation(const Matrix& a, const Matrix& b, const DensityMatrix& rho,
                             const LogMeanKernel& kernel = {}, double p_floor = kDefaultPFloor);
double canonical_correlation(const HermitianOperator& a, const HermitianOperator& b,
                             const DensityMatrix& rho, const LogMeanKernel& kernel = {},
                             double p_floor = kDefaultPFloor);

// || {ln rho, A_rho} - {rho, A} ||_max
double verify_ln_lemma(const HermitianOperator& a, const DensityMatrix& rho,
                       const PhysicalConstants& c = {}, const LogMeanKernel& kernel = {},
                       double p_floor = kDefaultPFloor);

struct IdentityResidual {
    double lhs;       // -<<{A,Q}; {ln rho, Q}>>
    double rhs;       // <{Q, {Q, A}}>
    double residual;  // |lhs - rhs|
    double scale;     // ||{A,Q}||_F ||{ln rho,Q}||_F, the Cauchy-Schwarz size of lhs
};

// Double-commutator identity -<<{A,Q};{ln rho,Q}>> = <{Q,{Q,A}}>; each side
// is evaluated through its own code path.
IdentityResidual verify_double_commutator_identity(const HermitianOperator& a,
                                                   const HermitianOperator& q,
                                                   const DensityMatrix& rho,
                                                   const PhysicalConstants& c = {},
                                                   const LogMeanKernel& kernel = {},
                                                   double p_floor = kDefaultPFloor);

} // namespace qdiss
