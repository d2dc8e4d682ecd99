// comparator.cpp — Linearized dynamics and comparison against the full equation

#include "qdiss/comparator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qdiss/errors.hpp"
#include "qdiss/models.hpp"

namespace qdiss {

namespace {

Matrix hermitian_part(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

std::string format_double(double x)
{
    std::ostringstream os;
    os.precision(6);
    os << std::scientific << x;
    return os.str();
}

} // namespace

Matrix linearized_rhs(const Matrix& rho, const BathState& bath, const SystemSpec& spec)
{
    require_same_dim(rho, spec.hamiltonian().matrix(), "linearized_rhs");
    const auto& c = spec.constants();
    Matrix out = -quantum_poisson(rho, spec.hamiltonian().matrix(), c);
    for (std::size_t k = 0; k < spec.channels().size(); ++k) {
        const auto& ch = spec.channels()[k];
        if (ch.zeta == 0.0) continue;
        const BracketCoefficients e = bracket_coefficients(ch, spec.bath_model(), bath);
        const Matrix& q = ch.q.matrix();
        const Matrix sym = 0.5 * anticommutator(spec.channel_drive(k), rho);
        out += e.e_hs * quantum_poisson(q, sym, c);
        out += c.k_B * e.e_hh * quantum_poisson(q, quantum_poisson(q, rho, c), c);
    }
    return out;
}

Matrix linearized_rhs(const CoupledState& state, const SystemSpec& spec)
{
    return linearized_rhs(state.rho.matrix(), state.bath, spec);
}

StateRates linearized_rates(const Matrix& rho, const BathState& bath, const SystemSpec& spec)
{
    StateRates out;
    out.rho_rate = linearized_rhs(rho, bath, spec);
    out.bath_rate = -(spec.hamiltonian().matrix().transpose().cwiseProduct(out.rho_rate)).sum().real();
    return out;
}

Eigen::VectorXcd vec(const Matrix& m)
{
    return Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
}

Matrix unvec(const Eigen::VectorXcd& v, Index dim)
{
    if (v.size() != dim * dim) throw DimensionError("unvec: length is not dim^2");
    return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix Superoperator::apply(const Matrix& rho) const
{
    if (rho.rows() != dim || rho.cols() != dim) throw DimensionError("Superoperator::apply: dimension mismatch");
    return unvec(matrix * vec(rho), dim);
}

double Superoperator::hermiticity_defect() const
{
    double worst = 0.0;
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            Matrix e = Matrix::Zero(dim, dim);
            e(i, j) = 1.0;
            const Matrix lhs = apply(e).adjoint();
            const Matrix rhs = apply(e.adjoint());
            worst = std::max(worst, max_abs(lhs - rhs));
        }
    }
    return worst;
}

double Superoperator::trace_defect() const
{
    double worst = 0.0;
    for (Index k = 0; k < matrix.cols(); ++k) {
        Complex tr = 0.0;
        for (Index i = 0; i < dim; ++i) tr += matrix(i + i * dim, k);
        worst = std::max(worst, std::abs(tr));
    }
    return worst;
}

Eigen::VectorXcd Superoperator::eigenvalues() const
{
    Eigen::ComplexEigenSolver<Matrix> solver(matrix, false);
    if (solver.info() != Eigen::Success) throw ConvergenceError("Superoperator: eigensolver failed");
    return solver.eigenvalues();
}

Superoperator build_generator(const SystemSpec& spec, const CoupledState& state, GeneratorMode mode)
{
    const Index d = spec.dim();
    Superoperator out{d, Matrix::Zero(d * d, d * d)};

    if (mode == GeneratorMode::linearized) {
        for (Index j = 0; j < d; ++j) {
            for (Index i = 0; i < d; ++i) {
                Matrix e = Matrix::Zero(d, d);
                e(i, j) = 1.0;
                out.matrix.col(i + j * d) = vec(linearized_rhs(e, state.bath, spec));
            }
        }
        return out;
    }

    if (mode != GeneratorMode::nonlinear_tangent) throw DomainError("build_generator: invalid mode");

    const Matrix& rho = state.rho.matrix();
    const Matrix f0 = master_rhs(state, spec);
    const double lo = state.rho.min_eigenvalue() - spec.options().p_floor;
    if (!(lo > 0.0)) throw PositivityError("build_generator: rho must lie strictly above p_floor", lo);
    const double eps = std::min(1e-5, 0.25 * lo);

    // Jacobian along a Hermitian direction x.
    auto tangent = [&](const Matrix& x) -> Matrix {
        const Complex tr = x.trace();
        const Matrix traceless = x - tr * rho;
        const CoupledState plus{DensityMatrix(hermitian_part(rho + eps * traceless)), state.bath};
        const CoupledState minus{DensityMatrix(hermitian_part(rho - eps * traceless)), state.bath};
        return (master_rhs(plus, spec) - master_rhs(minus, spec)) / (2.0 * eps) + tr * f0;
    };

    for (Index j = 0; j < d; ++j) {
        for (Index i = 0; i < d; ++i) {
            Matrix e = Matrix::Zero(d, d);
            e(i, j) = 1.0;
            const Matrix x = 0.5 * (e + e.adjoint());
            const Matrix y = Complex(0.0, -0.5) * (e - e.adjoint());
            const Matrix col = tangent(x) + Complex(0.0, 1.0) * tangent(y);
            out.matrix.col(i + j * d) = vec(col);
        }
    }
    return out;
}

GeneratorRates generator_rates(const Superoperator& generator, double zero_tol)
{
    const Eigen::VectorXcd ev = generator.eigenvalues();
    const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    GeneratorRates out;
    out.spectral_gap = std::numeric_limits<double>::infinity();
    out.real_mode_rate = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ev.size(); ++i) {
        const double re = std::abs(ev(i).real());
        const double im = std::abs(ev(i).imag());
        if (re > zero_tol * scale) out.spectral_gap = std::min(out.spectral_gap, re);
        if (im <= zero_tol * scale && std::abs(ev(i)) > zero_tol * scale) {
            out.real_mode_rate = std::min(out.real_mode_rate, std::abs(ev(i)));
        }
    }
    if (!std::isfinite(out.spectral_gap)) out.spectral_gap = 0.0;
    if (!std::isfinite(out.real_mode_rate)) out.real_mode_rate = 0.0;
    return out;
}

std::optional<double> fit_relaxation_rate(const std::vector<double>& times,
                                          const std::vector<double>& values, double steady_value,
                                          double t_lo, double t_hi)
{
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size() && i < values.size(); ++i) {
        if (times[i] < t_lo || times[i] > t_hi) continue;
        const double dev = std::abs(values[i] - steady_value);
        if (!(dev > 0.0) || !std::isfinite(dev)) continue;
        const double y = std::log(dev);
        sx += times[i];
        sy += y;
        sxx += times[i] * times[i];
        sxy += times[i] * y;
        ++n;
    }
    if (n < 3) return std::nullopt;
    const double nn = static_cast<double>(n);
    const double denom = nn * sxx - sx * sx;
    if (!(std::abs(denom) > 0.0)) return std::nullopt;
    return -(nn * sxy - sx * sy) / denom;
}

const TrackComparison* ComparisonReport::track(const std::string& name) const
{
    for (const auto& t : tracks) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

ComparisonReport compare_trajectories(const ComparisonScenario& scenario,
                                      const std::vector<NamedObservable>& observables,
                                      const std::vector<CorrelationPair>& correlations)
{
    if (scenario.config.method != Method::rk4_fixed) {
        throw DomainError("compare_trajectories: the comparison needs the fixed-step rk4 method");
    }
    const SystemSpec& spec = scenario.spec;
    const Trajectory nonlinear = integrate(scenario.initial, spec, scenario.config);
    const RateFunction lin = [&spec](const Matrix& rho, const BathState& bath) {
        return linearized_rates(rho, bath, spec);
    };
    const Trajectory linear = integrate_with(scenario.initial, spec, scenario.config, lin,
                                             ProjectionPolicy{false});
    if (nonlinear.size() != linear.size()) {
        throw std::logic_error("compare_trajectories: trajectories are on different time grids");
    }

    ComparisonReport rep;
    rep.scenario_id = scenario.id;
    rep.times = nonlinear.times;
    rep.agreement_tol = scenario.agreement_tol;
    const std::size_t n = nonlinear.size();
    const double p_floor = scenario.config.p_floor;
    const auto& kernel = spec.options().kernel;

    auto finish_track = [&](TrackComparison& tc) {
        for (std::size_t i = 0; i < n; ++i) {
            const double diff = std::abs(tc.nonlinear[i] - tc.linearized[i]);
            if (!std::isfinite(diff)) {
                tc.finite = false;
                continue;
            }
            ++tc.defined_records;
            tc.sup_difference = std::max(tc.sup_difference, diff);
        }
        tc.terminal_difference = std::abs(tc.nonlinear.back() - tc.linearized.back());
        if (!std::isfinite(tc.terminal_difference)) {
            tc.finite = false;
            tc.terminal_difference = std::numeric_limits<double>::quiet_NaN();
        }
        rep.tracks.push_back(std::move(tc));
    };

    for (const auto& obs : observables) {
        require_same_dim(obs.op, spec.hamiltonian().matrix(), "compare_trajectories");
        TrackComparison tc{obs.name, {}, {}, 0.0, 0.0, true};
        for (std::size_t i = 0; i < n; ++i) {
            tc.nonlinear.push_back(average(obs.op, hermitian_part(nonlinear.states[i].rho)));
            tc.linearized.push_back(average(obs.op, hermitian_part(linear.states[i].rho)));
        }
        finish_track(tc);
    }

    auto correlation_at = [&](const Matrix& rho, const CorrelationPair& pair) {
        try {
            const DensityMatrix dm(hermitian_part(rho));
            if (dm.min_eigenvalue() < p_floor - kSpectralSlack) return std::numeric_limits<double>::quiet_NaN();
            return canonical_correlation(pair.a, pair.b, dm, kernel, p_floor);
        } catch (const PositivityError&) {
            return std::numeric_limits<double>::quiet_NaN();
        } catch (const DomainError&) {
            // a runaway linearized state is no longer a density matrix to working precision
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    for (const auto& pair : correlations) {
        TrackComparison tc{pair.name, {}, {}, 0.0, 0.0, true};
        for (std::size_t i = 0; i < n; ++i) {
            tc.nonlinear.push_back(correlation_at(nonlinear.states[i].rho, pair));
            tc.linearized.push_back(correlation_at(linear.states[i].rho, pair));
        }
        finish_track(tc);
    }

    const Matrix& rho_nl = nonlinear.states.back().rho;
    const Matrix& rho_lin = linear.states.back().rho;
    rep.steady_state_trace_distance = trace_distance(rho_nl, rho_lin);
    const double t_final = temperature(spec.bath_model(), nonlinear.states.back().bath);
    const DensityMatrix gibbs = gibbs_state(spec.hamiltonian(), t_final, spec.constants());
    rep.nonlinear_distance_to_gibbs = trace_distance(rho_nl, gibbs.matrix());
    rep.linearized_distance_to_gibbs = trace_distance(rho_lin, gibbs.matrix());
    rep.linearized_min_eigenvalue = linear.stats.min_eigenvalue;

    // Relaxation of the system energy <H> toward its terminal value.
    const double t_end = scenario.config.t_end;
    const double lo = scenario.rate_hint ? 0.5 / *scenario.rate_hint : 0.05 * t_end;
    const double hi = scenario.rate_hint ? 5.0 / *scenario.rate_hint : 0.5 * t_end;
    std::vector<double> e_nl, e_lin;
    for (std::size_t i = 0; i < n; ++i) {
        e_nl.push_back(average(spec.hamiltonian().matrix(), hermitian_part(nonlinear.states[i].rho)));
        e_lin.push_back(average(spec.hamiltonian().matrix(), hermitian_part(linear.states[i].rho)));
    }
    rep.nonlinear_rate = fit_relaxation_rate(rep.times, e_nl, e_nl.back(), lo, hi);
    rep.linearized_rate = fit_relaxation_rate(rep.times, e_lin, e_lin.back(), lo, hi);
    if (spec.dim() <= kGeneratorSpectrumMaxDim) {
        rep.linearized_generator =
            generator_rates(build_generator(spec, scenario.initial, GeneratorMode::linearized));
    }

    // Findings
    std::vector<std::string> differing;
    std::string undefined;
    for (const auto& tc : rep.tracks) {
        if (tc.sup_difference > rep.agreement_tol) differing.push_back(tc.name);
        if (!tc.finite) {
            undefined += (undefined.empty() ? "" : ", ") + tc.name + " (" + std::to_string(tc.defined_records) +
                         " of " + std::to_string(n) + " records)";
        }
    }
    for (const char* name : {"Q", "P"}) {
        if (const auto* tc = rep.track(name)) {
            rep.findings.push_back(std::string("first-moment agreement: sup |d<") + name + ">| = " +
                                   format_double(tc->sup_difference) +
                                   (tc->sup_difference <= rep.agreement_tol ? " <= " : " > ") +
                                   format_double(rep.agreement_tol));
        }
    }
    if (differing.empty() && undefined.empty()) {
        rep.findings.push_back("all tracked differences within tolerance " + format_double(rep.agreement_tol));
    } else if (!differing.empty()) {
        std::string list;
        for (const auto& name : differing) list += (list.empty() ? "" : ", ") + name;
        rep.findings.push_back("nonlinear and linearized dynamics differ beyond " +
                               format_double(rep.agreement_tol) + " in: " + list);
    }
    if (!undefined.empty()) {
        // the canonical correlation needs a full-rank state; the linearized
        // flow is not kept on the floor and can reach rank-deficient states
        rep.findings.push_back("canonical correlations undefined where the linearized state is not full rank: " +
                               undefined);
    }
    if (rep.linearized_min_eigenvalue < 0.0) {
        rep.findings.push_back("linearized dynamics left the positive cone: min eigenvalue " +
                               format_double(rep.linearized_min_eigenvalue));
    }
    return rep;
}

} // namespace qdiss
