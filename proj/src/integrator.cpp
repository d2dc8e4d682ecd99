// integrator.cpp — RK4 / RKF45 integration with projection and monitors

#include "qdiss/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qdiss/errors.hpp"

namespace qdiss {

namespace {

struct Tableau {
    std::vector<double> c;
    std::vector<std::vector<double>> a;
    std::vector<double> b;       // propagating weights
    std::vector<double> b_low;   // embedded lower-order weights (empty if none)
    int order;
};

const Tableau& rk4_tableau()
{
    static const Tableau t{{0.0, 0.5, 0.5, 1.0},
                           {{}, {0.5}, {0.0, 0.5}, {0.0, 0.0, 1.0}},
                           {1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0},
                           {},
                           4};
    return t;
}

// Runge-Kutta-Fehlberg 4(5), propagating the fifth-order solution.
const Tableau& rkf45_tableau()
{
    static const Tableau t{
        {0.0, 0.25, 3.0 / 8.0, 12.0 / 13.0, 1.0, 0.5},
        {{},
         {0.25},
         {3.0 / 32.0, 9.0 / 32.0},
         {1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0},
         {439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0},
         {-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0}},
        {16.0 / 135.0, 0.0, 6656.0 / 12825.0, 28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0},
        {25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -0.2, 0.0},
        5};
    return t;
}

// Runge-Kutta stage states are extrapolations, not states: near-pure spectra
// can dip slightly below zero there even when every step result is positive.
// Such stages are clamped (and counted); only a stage far outside the cone
// fails the step.
constexpr double kStageNegativityLimit = 1e-6;

// A stage state that cannot be evaluated (eigenvalue far below zero).
class StageFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

Matrix hermitian_part(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

// Lift eigenvalues below the floor to the floor and rescale the rest so the
// sum stays 1.
RealVector clamp_spectrum(RealVector p, double floor)
{
    const Index d = p.size();
    std::vector<bool> fixed(static_cast<std::size_t>(d), false);
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (Index i = 0; i < d; ++i) {
            if (!fixed[static_cast<std::size_t>(i)] && p(i) < floor) {
                fixed[static_cast<std::size_t>(i)] = true;
                changed = true;
            }
        }
        double free_sum = 0.0;
        Index n_fixed = 0;
        for (Index i = 0; i < d; ++i) {
            if (fixed[static_cast<std::size_t>(i)]) {
                p(i) = floor;
                ++n_fixed;
            } else {
                free_sum += p(i);
            }
        }
        const double target = 1.0 - static_cast<double>(n_fixed) * floor;
        if (free_sum > 0.0) {
            for (Index i = 0; i < d; ++i) {
                if (!fixed[static_cast<std::size_t>(i)]) p(i) *= target / free_sum;
            }
        }
        if (!changed) break;
    }
    return p;
}

double real_trace(const Matrix& m)
{
    return m.trace().real();
}

struct StepResult {
    Matrix rho;
    double bath_energy;
    double error_norm;  // 0 for fixed-step methods
};

StepResult rk_step(const Tableau& tab, const Matrix& rho, double he, double h,
                   const RateFunction& rates, const IntegratorConfig& cfg,
                   TrajectoryStats& stats)
{
    const std::size_t s = tab.c.size();
    std::vector<StateRates> k;
    k.reserve(s);
    for (std::size_t i = 0; i < s; ++i) {
        Matrix stage_rho = rho;
        double stage_he = he;
        for (std::size_t j = 0; j < i; ++j) {
            const double aij = tab.a[i][j];
            if (aij == 0.0) continue;
            stage_rho += (h * aij) * k[j].rho_rate;
            stage_he += h * aij * k[j].bath_rate;
        }
        k.push_back(rates(stage_rho, BathState{stage_he}));
        ++stats.rhs_evaluations;
    }

    StepResult out{rho, he, 0.0};
    for (std::size_t i = 0; i < s; ++i) {
        if (tab.b[i] == 0.0) continue;
        out.rho += (h * tab.b[i]) * k[i].rho_rate;
        out.bath_energy += h * tab.b[i] * k[i].bath_rate;
    }

    if (!tab.b_low.empty()) {
        Matrix err_rho = Matrix::Zero(rho.rows(), rho.cols());
        double err_he = 0.0;
        for (std::size_t i = 0; i < s; ++i) {
            const double db = tab.b[i] - tab.b_low[i];
            if (db == 0.0) continue;
            err_rho += (h * db) * k[i].rho_rate;
            err_he += h * db * k[i].bath_rate;
        }
        double acc = 0.0;
        std::size_t n = 0;
        auto add = [&](double err, double y0, double y1) {
            const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y0), std::abs(y1));
            acc += (err / sc) * (err / sc);
            ++n;
        };
        for (Index i = 0; i < rho.size(); ++i) {
            add(err_rho(i).real(), rho(i).real(), out.rho(i).real());
            add(err_rho(i).imag(), rho(i).imag(), out.rho(i).imag());
        }
        add(err_he, he, out.bath_energy);
        out.error_norm = std::sqrt(acc / static_cast<double>(n));
    }
    return out;
}

struct Observation {
    double energy = 0.0;
    double entropy = std::numeric_limits<double>::quiet_NaN();
    double min_eigenvalue = 0.0;
    bool full_rank = false;
};

Observation observe(const Matrix& rho, const BathState& bath, const SystemSpec& spec)
{
    Observation o;
    const Matrix m = hermitian_part(rho);
    o.energy = average(spec.hamiltonian().matrix(), m) + bath.energy;
    const EigenDecomposition eig = eigh(m);
    o.min_eigenvalue = eig.eigenvalues(0);
    o.full_rank = o.min_eigenvalue >= spec.options().p_floor - kSpectralSlack;
    if (o.full_rank) {
        double s = 0.0;
        for (Index i = 0; i < eig.dim(); ++i) {
            const double p = eig.eigenvalues(i);
            s -= p * std::log(p);
        }
        o.entropy = spec.constants().k_B * s + spec.bath_model().entropy(bath);
    }
    return o;
}

MonitorRecord make_record(double t, const Matrix& rho, const BathState& bath,
                          const SystemSpec& spec, const Observation& obs, double trace_error,
                          double hermiticity, double displacement)
{
    MonitorRecord r;
    r.t = t;
    r.total_energy = obs.energy;
    r.total_entropy = obs.entropy;
    r.min_eigenvalue = obs.min_eigenvalue;
    r.trace_error = trace_error;
    r.hermiticity = hermiticity;
    r.projection_displacement = displacement;
    r.bath_temperature = temperature(spec.bath_model(), bath);
    r.entropy_production = std::numeric_limits<double>::quiet_NaN();
    if (obs.full_rank) {
        try {
            const CoupledState state{DensityMatrix(hermitian_part(rho)), bath};
            r.entropy_production = entropy_production(state, spec);
        } catch (const PositivityError&) {
        }
    }
    return r;
}

RateFunction generic_rates(const SystemSpec& spec, const IntegratorConfig& cfg,
                           TrajectoryStats& stats)
{
    return [&spec, &cfg, &stats](const Matrix& rho, const BathState& bath) {
        Matrix m = hermitian_part(rho);
        const EigenDecomposition eig = eigh(m);
        if (eig.eigenvalues(0) < -kStageNegativityLimit) {
            std::ostringstream os;
            os << "stage state has eigenvalue " << eig.eigenvalues(0);
            throw StageFailure(os.str());
        }
        if (eig.eigenvalues(0) < cfg.p_floor) {
            const RealVector p = clamp_spectrum(eig.eigenvalues / eig.eigenvalues.sum(), cfg.p_floor);
            m = hermitian_part(eig.eigenvectors * p.asDiagonal() * eig.eigenvectors.adjoint());
            ++stats.stage_clamps;
        }
        return coupled_rhs(CoupledState{DensityMatrix(m), bath}, spec);
    };
}

} // namespace

void IntegratorConfig::validate() const
{
    auto bad = [](const std::string& what) { throw DomainError("IntegratorConfig: " + what); };
    if (!(std::isfinite(t_end) && t_end > 0.0)) bad("t_end must be positive");
    if (!(std::isfinite(dt) && dt > 0.0)) bad("dt must be positive");
    if (method == Method::rk45_adaptive) {
        if (!(rtol > 0.0 && rtol < 1e-2)) bad("rtol must lie in (0, 1e-2)");
        if (!(atol > 0.0 && atol < 1e-2)) bad("atol must lie in (0, 1e-2)");
        if (!(min_step > 0.0 && min_step <= max_step)) bad("step bounds must satisfy 0 < min_step <= max_step");
    }
    if (!(p_floor > 0.0 && p_floor <= 1e-6)) bad("p_floor must lie in (0, 1e-6]");
    if (!(projection_tol > 0.0 && projection_tol < 1e-2)) bad("projection_tol must lie in (0, 1e-2)");
    if (monitor_stride == 0) bad("monitor_stride must be >= 1");
}

double energy_drift_budget(const IntegratorConfig&)
{
    return 1e-6;
}

CoupledState Trajectory::state(std::size_t i) const
{
    const Snapshot& s = states.at(i);
    return CoupledState{DensityMatrix(s.rho), s.bath};
}

Projection project(const Matrix& rho_raw, const IntegratorConfig& cfg)
{
    const double scale = max_abs(rho_raw);
    const double herm = hermiticity_residual(rho_raw);
    if (herm > cfg.projection_tol * scale) {
        std::ostringstream os;
        os << "project: input is not Hermitian within projection_tol (residual " << herm << ")";
        throw DomainError(os.str());
    }
    Projection out;
    out.rho = hermitian_part(rho_raw);
    out.rho /= real_trace(out.rho);

    const EigenDecomposition eig = eigh(out.rho);
    if (eig.eigenvalues(0) < -cfg.projection_tol) {
        std::ostringstream os;
        os << "positivity collapse: eigenvalue " << eig.eigenvalues(0) << " below -projection_tol";
        throw PositivityError(os.str(), eig.eigenvalues(0));
    }
    if (eig.eigenvalues(0) < cfg.p_floor) {
        const RealVector p = clamp_spectrum(eig.eigenvalues, cfg.p_floor);
        out.rho = hermitian_part(eig.eigenvectors * p.asDiagonal() * eig.eigenvectors.adjoint());
        out.clamped = true;
    }
    out.displacement = max_abs(out.rho - rho_raw);
    if (out.displacement > 100.0 * cfg.projection_tol) {
        std::ostringstream os;
        os << "projection displacement " << out.displacement
           << " exceeds 100 * projection_tol; the integration is too coarse";
        throw ConvergenceError(os.str());
    }
    return out;
}

Matrix regularize(const Matrix& rho, double p_floor, Regularization* record)
{
    const EigenDecomposition eig = eigh(rho);
    const double lo = eig.eigenvalues(0);
    if (record) {
        record->min_eigenvalue_before = lo;
        record->applied = false;
        record->epsilon = 0.0;
    }
    if (lo >= p_floor) return rho;
    const double d = static_cast<double>(rho.rows());
    const double eps = d * (p_floor - std::min(0.0, lo));
    if (record) {
        record->applied = true;
        record->epsilon = eps;
    }
    return (1.0 - eps) * rho + (eps / d) * Matrix::Identity(rho.rows(), rho.cols());
}

Trajectory integrate(const CoupledState& initial, const SystemSpec& spec,
                     const IntegratorConfig& cfg)
{
    // Rates for the spec with the configured floor; the lambda below keeps a
    // reference, so the spec copy lives in this frame.
    SpectralOptions opt = spec.options();
    opt.p_floor = cfg.p_floor;
    const SystemSpec floored = spec.with_options(opt);
    TrajectoryStats stage_stats;
    const RateFunction rates = generic_rates(floored, cfg, stage_stats);
    Trajectory traj = integrate_with(initial, floored, cfg, rates, ProjectionPolicy{true});
    traj.stats.stage_clamps = stage_stats.stage_clamps;
    return traj;
}

Trajectory integrate_with(const CoupledState& initial, const SystemSpec& spec_in,
                          const IntegratorConfig& cfg, const RateFunction& rates,
                          ProjectionPolicy policy)
{
    cfg.validate();
    if (initial.rho.dim() != spec_in.dim()) {
        throw DimensionError("integrate: initial state dimension does not match the system");
    }
    SpectralOptions opt = spec_in.options();
    opt.p_floor = cfg.p_floor;
    const SystemSpec spec = spec_in.with_options(opt);
    spec.bath_model().require_in_domain(initial.bath);

    const Tableau& tab = cfg.method == Method::rk4_fixed ? rk4_tableau() : rkf45_tableau();
    const bool adaptive = cfg.method == Method::rk45_adaptive;

    Trajectory traj;
    Matrix rho = regularize(initial.rho.matrix(), cfg.p_floor, &traj.initial_regularization);
    double he = initial.bath.energy;
    double t = 0.0;

    Observation obs = observe(rho, BathState{he}, spec);
    const double e0 = obs.energy;
    const double e_scale = std::max(std::abs(e0), std::numeric_limits<double>::min());
    auto& st = traj.stats;
    st.min_eigenvalue = obs.min_eigenvalue;

    auto record = [&](double trace_err, double herm, double disp) {
        traj.times.push_back(t);
        traj.states.push_back(Snapshot{rho, BathState{he}});
        traj.monitors.push_back(make_record(t, rho, BathState{he}, spec, obs, trace_err, herm, disp));
    };
    auto abort = [&](const std::string& why) -> IntegrationAborted {
        std::ostringstream os;
        os << "integration aborted at t = " << t << ": " << why;
        return IntegrationAborted(os.str(), t, traj);
    };

    record(std::abs(real_trace(rho) - 1.0), hermiticity_residual(rho), 0.0);

    const double t_tol = 1e-12 * std::max(1.0, cfg.t_end);
    double h = adaptive ? std::clamp(cfg.dt, cfg.min_step, cfg.max_step) : cfg.dt;
    double disp_since_record = 0.0;
    std::size_t since_record = 0;

    while (cfg.t_end - t > t_tol) {
        const double step = std::min(h, cfg.t_end - t);
        StepResult res;
        try {
            res = rk_step(tab, rho, he, step, rates, cfg, st);
        } catch (const StageFailure& e) {
            if (!adaptive || step <= cfg.min_step) throw abort(std::string("positivity collapse in stage: ") + e.what());
            ++st.rejected_steps;
            h = std::max(cfg.min_step, 0.25 * step);
            continue;
        } catch (const PositivityError& e) {
            if (!adaptive || step <= cfg.min_step) throw abort(e.what());
            ++st.rejected_steps;
            h = std::max(cfg.min_step, 0.25 * step);
            continue;
        }

        if (adaptive) {
            const double err = res.error_norm;
            const double factor =
                err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -1.0 / tab.order), 0.2, 5.0);
            if (err > 1.0) {
                ++st.rejected_steps;
                if (step <= cfg.min_step) throw abort("step rejection cascade: minimum step reached");
                h = std::max(cfg.min_step, step * factor);
                continue;
            }
            h = std::clamp(step * factor, cfg.min_step, cfg.max_step);
        }

        const double trace_err = std::abs(real_trace(res.rho) - 1.0);
        const double herm = hermiticity_residual(res.rho);

        Projection proj;
        if (policy.enforce_positivity) {
            try {
                proj = project(res.rho, cfg);
            } catch (const PositivityError& e) {
                // An accepted step can still leave the cone when a tiny
                // eigenvalue relaxes faster than the error norm notices.
                if (!adaptive || step <= cfg.min_step) throw abort(e.what());
                ++st.rejected_steps;
                h = std::max(cfg.min_step, 0.25 * step);
                continue;
            } catch (const ConvergenceError& e) {
                if (!adaptive || step <= cfg.min_step) throw abort(e.what());
                ++st.rejected_steps;
                h = std::max(cfg.min_step, 0.25 * step);
                continue;
            } catch (const std::exception& e) {
                throw abort(e.what());
            }
        } else {
            proj.rho = hermitian_part(res.rho);
            proj.rho /= real_trace(proj.rho);
            proj.displacement = max_abs(proj.rho - res.rho);
        }

        t += step;
        rho = std::move(proj.rho);
        he = res.bath_energy;
        ++st.steps;
        try {
            spec.bath_model().require_in_domain(BathState{he});
        } catch (const std::exception& e) {
            throw abort(e.what());
        }

        const double s_prev = obs.entropy;
        obs = observe(rho, BathState{he}, spec);
        if (std::isfinite(s_prev) && std::isfinite(obs.entropy)) {
            st.min_step_entropy_change = std::min(st.min_step_entropy_change, obs.entropy - s_prev);
        }
        st.max_trace_error = std::max(st.max_trace_error, trace_err);
        st.max_hermiticity = std::max(st.max_hermiticity, herm);
        st.min_eigenvalue = std::min(st.min_eigenvalue, obs.min_eigenvalue);
        st.max_projection_displacement = std::max(st.max_projection_displacement, proj.displacement);
        st.max_rel_energy_drift = std::max(st.max_rel_energy_drift, std::abs(obs.energy - e0) / e_scale);
        disp_since_record = std::max(disp_since_record, proj.displacement);

        ++since_record;
        const bool last = cfg.t_end - t <= t_tol;
        if (since_record >= cfg.monitor_stride || last) {
            record(trace_err, herm, disp_since_record);
            since_record = 0;
            disp_since_record = 0.0;
        }
    }
    return traj;
}

} // namespace qdiss
