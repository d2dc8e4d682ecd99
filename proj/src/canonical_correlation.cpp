// canonical_correlation.cpp — Spectral evaluation of A_rho and <<A; B>>

#include "qdiss/canonical_correlation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qdiss/errors.hpp"

namespace qdiss {

void LogMeanKernel::validate() const
{
    if (!(rel_tol_equal > 0.0 && rel_tol_equal <= 1e-4)) {
        throw DomainError("LogMeanKernel: rel_tol_equal must lie in (0, 1e-4]");
    }
}

double log_mean(double p, double q, const LogMeanKernel& kernel)
{
    if (!(p > 0.0) || !(q > 0.0) || !std::isfinite(p) || !std::isfinite(q)) {
        std::ostringstream os;
        os << "log_mean: arguments must be positive and finite, got (" << p << ", " << q << ")";
        throw DomainError(os.str());
    }
    const double diff = p - q;
    if (std::abs(diff) <= kernel.rel_tol_equal * std::max(p, q)) {
        return 0.5 * (p + q);
    }
    // ln p - ln q = log1p((p - q)/q) keeps full relative accuracy when p ~ q.
    return diff / std::log1p(diff / q);
}

Eigen::MatrixXd log_mean_weights(const RealVector& p, const LogMeanKernel& kernel)
{
    const Index d = p.size();
    Eigen::MatrixXd w(d, d);
    for (Index n = 0; n < d; ++n) {
        w(n, n) = p(n);
        for (Index m = n + 1; m < d; ++m) {
            w(n, m) = log_mean(p(n), p(m), kernel);
            w(m, n) = w(n, m);
        }
    }
    return w;
}

Mollifier::Mollifier(const DensityMatrix& rho, const LogMeanKernel& kernel, double p_floor)
    : rho_(rho)
{
    rho.require_full_rank(p_floor);
    weights_ = log_mean_weights(rho.spectrum().eigenvalues, kernel);
}

Matrix Mollifier::apply(const Matrix& a) const
{
    require_same_dim(a, rho_.matrix(), "mollified_product");
    const Matrix& u = rho_.spectrum().eigenvectors;
    Matrix in_eigenbasis = u.adjoint() * a * u;
    in_eigenbasis.array() *= weights_.cast<Complex>().array();
    return u * in_eigenbasis * u.adjoint();
}

double Mollifier::correlation(const Matrix& a, const Matrix& b) const
{
    require_same_dim(a, b, "canonical_correlation");
    require_same_dim(a, rho_.matrix(), "canonical_correlation");
    // tr(A_rho B) = sum_nm w_nm a_nm b_mn in the eigenbasis of rho
    const Matrix& u = rho_.spectrum().eigenvectors;
    const Matrix a_e = u.adjoint() * a * u;
    const Matrix b_e = u.adjoint() * b * u;
    const Complex tr = (a_e.cwiseProduct(weights_.cast<Complex>()).transpose().cwiseProduct(b_e)).sum();
    const double scale = std::max(1.0, a_e.norm() * b_e.norm());
    if (std::abs(tr.imag()) > 1e-12 * scale) {
        throw DomainError("canonical_correlation: imaginary residue signals a non-Hermitian operand");
    }
    return tr.real();
}

Matrix mollified_product(const Matrix& a, const DensityMatrix& rho, const LogMeanKernel& kernel,
                         double p_floor)
{
    return Mollifier(rho, kernel, p_floor).apply(a);
}

HermitianOperator mollified_product(const HermitianOperator& a, const DensityMatrix& rho,
                                    const LogMeanKernel& kernel, double p_floor)
{
    return HermitianOperator(mollified_product(a.matrix(), rho, kernel, p_floor), a.unit());
}

double canonical_correlation(const Matrix& a, const Matrix& b, const DensityMatrix& rho,
                             const LogMeanKernel& kernel, double p_floor)
{
    return Mollifier(rho, kernel, p_floor).correlation(a, b);
}

double canonical_correlation(const HermitianOperator& a, const HermitianOperator& b,
                             const DensityMatrix& rho, const LogMeanKernel& kernel,
                             double p_floor)
{
    return canonical_correlation(a.matrix(), b.matrix(), rho, kernel, p_floor);
}

double verify_ln_lemma(const HermitianOperator& a, const DensityMatrix& rho,
                       const PhysicalConstants& c, const LogMeanKernel& kernel, double p_floor)
{
    require_same_dim(a.matrix(), rho.matrix(), "verify_ln_lemma");
    rho.require_full_rank(p_floor);
    const Matrix ln_rho = rho.spectrum().apply([](double p) { return std::log(p); });
    const Matrix a_rho = mollified_product(a.matrix(), rho, kernel, p_floor);
    const Matrix lhs = quantum_poisson(ln_rho, a_rho, c);
    const Matrix rhs = quantum_poisson(rho.matrix(), a.matrix(), c);
    return max_abs(lhs - rhs);
}

IdentityResidual verify_double_commutator_identity(const HermitianOperator& a,
                                                   const HermitianOperator& q,
                                                   const DensityMatrix& rho,
                                                   const PhysicalConstants& c,
                                                   const LogMeanKernel& kernel, double p_floor)
{
    require_same_dim(a.matrix(), q.matrix(), "verify_double_commutator_identity");
    require_same_dim(a.matrix(), rho.matrix(), "verify_double_commutator_identity");
    rho.require_full_rank(p_floor);

    const Matrix ln_rho = rho.spectrum().apply([](double p) { return std::log(p); });
    const Matrix aq = quantum_poisson(a.matrix(), q.matrix(), c);
    const Matrix lq = quantum_poisson(ln_rho, q.matrix(), c);

    IdentityResidual out{};
    out.lhs = -canonical_correlation(aq, lq, rho, kernel, p_floor);
    const Matrix qqa = quantum_poisson(q.matrix(), quantum_poisson(q.matrix(), a.matrix(), c), c);
    out.rhs = average(qqa, rho.matrix());
    out.residual = std::abs(out.lhs - out.rhs);
    out.scale = aq.norm() * lq.norm();
    return out;
}

} // namespace qdiss
