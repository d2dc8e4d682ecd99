// runner.cpp — run / compare / sweep drivers and their output files

#include "qdiss/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "qdiss/errors.hpp"
#include "qdiss/models.hpp"

namespace qdiss {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Matrix hermitian_part(const Matrix& m)
{
    return 0.5 * (m + m.adjoint());
}

class OutFile {
public:
    explicit OutFile(const fs::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc)
    {
        if (!out_) throw ScenarioIOError("cannot write " + path.string());
    }
    std::ofstream& stream() { return out_; }
    void close()
    {
        out_.close();
        if (!out_) throw ScenarioIOError("error while writing " + path_.string());
    }

private:
    fs::path path_;
    std::ofstream out_;
};

void ensure_dir(const fs::path& dir)
{
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ScenarioIOError("cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
    OutFile f(path);
    f.stream() << text;
    f.close();
}

// JSON number, or null if not finite.
ojson num(double x)
{
    return std::isfinite(x) ? ojson(x) : ojson(nullptr);
}

double correlation_or_nan(const CorrelationPair& pair, const CoupledState& state, const Scenario& sc)
{
    try {
        return canonical_correlation(pair.a, pair.b, state.rho, sc.spec.options().kernel, sc.config.p_floor);
    } catch (const std::exception&) {
        return kNaN;
    }
}

IntegratorConfig effective_config(const Scenario& sc, const RunOptions& options)
{
    IntegratorConfig cfg = sc.config;
    if (options.stride) {
        if (*options.stride == 0) throw DomainError("stride must be >= 1");
        cfg.monitor_stride = *options.stride;
    }
    return cfg;
}

void write_trajectory_csv(const fs::path& path, const Scenario& sc, const Trajectory& traj)
{
    OutFile f(path);
    auto& out = f.stream();
    out << "t";
    for (const auto& o : sc.observables) out << ",avg_" << o.name;
    for (const auto& c : sc.correlations) out << ",corr_" << c.name;
    out << ",H_e,T_e,E_total,S_total,entropy_production,min_eig,trace_error\n";
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const CoupledState st = traj.state(i);
        const Matrix rho = hermitian_part(st.rho.matrix());
        const MonitorRecord& m = traj.monitors[i];
        out << format_g17(traj.times[i]);
        for (const auto& o : sc.observables) out << ',' << format_g17(average(o.op, rho));
        for (const auto& c : sc.correlations) out << ',' << format_g17(correlation_or_nan(c, st, sc));
        out << ',' << format_g17(st.bath.energy) << ',' << format_g17(m.bath_temperature) << ','
            << format_g17(m.total_energy) << ',' << format_g17(m.total_entropy) << ','
            << format_g17(m.entropy_production) << ',' << format_g17(m.min_eigenvalue) << ','
            << format_g17(m.trace_error) << '\n';
    }
    f.close();
}

RunSummary summarize_run(const Scenario& sc, const Trajectory& traj)
{
    RunSummary s;
    s.scenario_id = sc.id;
    s.records = traj.size();
    s.stats = traj.stats;
    s.initial_regularization = traj.initial_regularization;
    s.min_entropy_production = std::numeric_limits<double>::infinity();
    for (const auto& m : traj.monitors) s.min_entropy_production = std::min(s.min_entropy_production, m.entropy_production);
    if (traj.size() == 0) {
        s.min_entropy_production = kNaN;
        return s;
    }
    const MonitorRecord& last = traj.monitors.back();
    s.final_time = last.t;
    s.final_bath_energy = traj.states.back().bath.energy;
    s.final_bath_temperature = last.bath_temperature;
    s.final_total_energy = last.total_energy;
    s.final_total_entropy = last.total_entropy;
    s.distance_to_gibbs = kNaN;
    if (std::isfinite(s.final_bath_temperature) && s.final_bath_temperature > 0.0) {
        const DensityMatrix gibbs = gibbs_state(sc.spec.hamiltonian(), s.final_bath_temperature, sc.spec.constants());
        s.distance_to_gibbs = trace_distance(traj.states.back().rho, gibbs.matrix());
    }
    return s;
}

ojson summary_json(const RunSummary& s)
{
    ojson j;
    j["scenario"] = s.scenario_id;
    j["status"] = s.exit_status == exit_code::ok ? "ok" : "aborted";
    j["exit_code"] = s.exit_status;
    if (s.failure_time) {
        j["failure"] = {{"time", num(*s.failure_time)}, {"message", s.failure_message}};
    } else {
        j["failure"] = nullptr;
    }
    j["records"] = s.records;
    j["steps"] = s.stats.steps;
    j["rejected_steps"] = s.stats.rejected_steps;
    j["rhs_evaluations"] = s.stats.rhs_evaluations;
    j["stage_clamps"] = s.stats.stage_clamps;
    j["conservation"] = {
        {"max_rel_energy_drift", num(s.stats.max_rel_energy_drift)},
        {"min_step_entropy_change", num(s.stats.min_step_entropy_change)},
        {"max_trace_error", num(s.stats.max_trace_error)},
        {"max_hermiticity_residual", num(s.stats.max_hermiticity)},
        {"min_eigenvalue", num(s.stats.min_eigenvalue)},
        {"max_projection_displacement", num(s.stats.max_projection_displacement)},
        {"min_entropy_production", num(s.min_entropy_production)},
    };
    j["initial_regularization"] = {
        {"applied", s.initial_regularization.applied},
        {"epsilon", num(s.initial_regularization.epsilon)},
        {"min_eigenvalue_before", num(s.initial_regularization.min_eigenvalue_before)},
    };
    j["final"] = {
        {"t", num(s.final_time)},
        {"bath_energy", num(s.final_bath_energy)},
        {"bath_temperature", num(s.final_bath_temperature)},
        {"total_energy", num(s.final_total_energy)},
        {"total_entropy", num(s.final_total_entropy)},
        {"trace_distance_to_gibbs", num(s.distance_to_gibbs)},
    };
    return j;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string csv_value(const nlohmann::json& v)
{
    if (v.is_number_float()) return format_g17(v.get<double>());
    std::string s = v.dump();
    for (char& ch : s) {
        if (ch == ',') ch = ';';
    }
    return s;
}

} // namespace

std::string format_g17(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

RunSummary run_scenario(const Scenario& sc, const fs::path& out_dir, const RunOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    const IntegratorConfig cfg = effective_config(sc, options);
    ensure_dir(out_dir);

    Trajectory traj;
    RunSummary summary;
    try {
        traj = integrate(sc.initial, sc.spec, cfg);
        summary = summarize_run(sc, traj);
    } catch (const IntegrationAborted& e) {
        traj = e.partial();
        summary = summarize_run(sc, traj);
        summary.exit_status = exit_code::aborted;
        summary.failure_time = e.failure_time();
        summary.failure_message = e.what();
    }

    write_trajectory_csv(out_dir / "trajectory.csv", sc, traj);
    write_text(out_dir / "summary.json", summary_json(summary).dump(2) + "\n");
    summary.elapsed_seconds = seconds_since(t0);
    return summary;
}

std::string format_report(const ComparisonReport& r)
{
    std::ostringstream os;
    os << "comparison report: " << r.scenario_id << "\n";
    os << "agreement tolerance: " << format_g17(r.agreement_tol) << "\n";
    os << "records: " << r.times.size() << "\n";
    os << "steady-state trace distance (nonlinear vs linearized): " << format_g17(r.steady_state_trace_distance)
       << "\n";
    os << "trace distance to Gibbs state: nonlinear " << format_g17(r.nonlinear_distance_to_gibbs)
       << ", linearized " << format_g17(r.linearized_distance_to_gibbs) << "\n";
    os << "linearized minimum eigenvalue: " << format_g17(r.linearized_min_eigenvalue) << "\n";
    os << "relaxation rate of <H>: nonlinear " << (r.nonlinear_rate ? format_g17(*r.nonlinear_rate) : "n/a")
       << ", linearized " << (r.linearized_rate ? format_g17(*r.linearized_rate) : "n/a") << "\n";
    if (r.linearized_generator) {
        os << "linearized generator: spectral gap " << format_g17(r.linearized_generator->spectral_gap)
           << ", slowest real mode " << format_g17(r.linearized_generator->real_mode_rate) << "\n";
    } else {
        os << "linearized generator: spectrum skipped (dimension above " << kGeneratorSpectrumMaxDim << ")\n";
    }
    os << "\ntracks (sup |difference|, terminal |difference|):\n";
    for (const auto& t : r.tracks) {
        os << "  " << t.name << ": " << format_g17(t.sup_difference) << ", " << format_g17(t.terminal_difference)
           << (t.finite ? ""
                        : " (defined on " + std::to_string(t.defined_records) + " of " +
                              std::to_string(r.times.size()) + " records; sup over those)")
           << "\n";
    }
    std::vector<const TrackComparison*> differing;
    for (const auto& t : r.tracks) {
        if (t.sup_difference > r.agreement_tol) differing.push_back(&t);
    }
    const bool all_defined = std::all_of(r.tracks.begin(), r.tracks.end(), [](const auto& t) { return t.finite; });
    if (differing.empty() && all_defined) {
        os << "\nall differences within tolerance\n";
    } else if (differing.empty()) {
        os << "\nno defined differences above tolerance (some tracks are partly undefined)\n";
    } else {
        os << "\ndifferences:\n";
        for (const auto* t : differing) {
            os << "  " << t->name << ": sup |difference| " << format_g17(t->sup_difference) << " > "
               << format_g17(r.agreement_tol) << "\n";
        }
    }
    os << "\nfindings:\n";
    for (const auto& f : r.findings) os << "  " << f << "\n";
    return os.str();
}

CompareResult compare_scenario(const Scenario& sc, const fs::path& out_dir, const RunOptions& options)
{
    const auto t0 = std::chrono::steady_clock::now();
    CompareResult result;
    const IntegratorConfig cfg = effective_config(sc, options);
    if (cfg.method != Method::rk4_fixed) {
        result.exit_status = exit_code::validation;
        result.failure_message = "integrator.method: compare needs the fixed-step \"rk4\" method";
        return result;
    }
    ensure_dir(out_dir);

    ComparisonScenario cs{sc.id, sc.spec, sc.initial, cfg, sc.rate_hint, sc.agreement_tol};
    try {
        result.report = compare_trajectories(cs, sc.observables, sc.correlations);
    } catch (const IntegrationAborted& e) {
        result.exit_status = exit_code::aborted;
        result.failure_message = e.what();
        ojson j;
        j["scenario"] = sc.id;
        j["status"] = "aborted";
        j["exit_code"] = result.exit_status;
        j["failure"] = {{"time", num(e.failure_time())}, {"message", result.failure_message}};
        write_text(out_dir / "report.json", j.dump(2) + "\n");
        write_text(out_dir / "report.txt", "comparison report: " + sc.id + "\nstatus: aborted\n" +
                                               result.failure_message + "\n");
        result.elapsed_seconds = seconds_since(t0);
        return result;
    }

    const ComparisonReport& r = *result.report;
    const std::size_t n_obs = sc.observables.size();
    auto column = [&](std::size_t k) {
        return (k < n_obs ? "avg_" : "corr_") + r.tracks[k].name;
    };

    {
        OutFile f(out_dir / "comparison.csv");
        auto& out = f.stream();
        out << "t";
        for (std::size_t k = 0; k < r.tracks.size(); ++k) {
            out << ",nl_" << column(k) << ",lin_" << column(k) << ",diff_" << column(k);
        }
        out << "\n";
        for (std::size_t i = 0; i < r.times.size(); ++i) {
            out << format_g17(r.times[i]);
            for (const auto& t : r.tracks) {
                out << ',' << format_g17(t.nonlinear[i]) << ',' << format_g17(t.linearized[i]) << ','
                    << format_g17(t.nonlinear[i] - t.linearized[i]);
            }
            out << "\n";
        }
        f.close();
    }

    ojson j;
    j["scenario"] = r.scenario_id;
    j["status"] = "ok";
    j["exit_code"] = exit_code::ok;
    j["records"] = r.times.size();
    j["agreement_tol"] = num(r.agreement_tol);
    j["steady_state_trace_distance"] = num(r.steady_state_trace_distance);
    j["nonlinear_distance_to_gibbs"] = num(r.nonlinear_distance_to_gibbs);
    j["linearized_distance_to_gibbs"] = num(r.linearized_distance_to_gibbs);
    j["linearized_min_eigenvalue"] = num(r.linearized_min_eigenvalue);
    j["nonlinear_rate"] = r.nonlinear_rate ? num(*r.nonlinear_rate) : ojson(nullptr);
    j["linearized_rate"] = r.linearized_rate ? num(*r.linearized_rate) : ojson(nullptr);
    if (r.linearized_generator) {
        j["linearized_generator"] = {{"spectral_gap", num(r.linearized_generator->spectral_gap)},
                                     {"real_mode_rate", num(r.linearized_generator->real_mode_rate)}};
    } else {
        j["linearized_generator"] = nullptr;
    }
    ojson tracks = ojson::array();
    for (std::size_t k = 0; k < r.tracks.size(); ++k) {
        const auto& t = r.tracks[k];
        tracks.push_back({{"name", t.name},
                          {"kind", k < n_obs ? "average" : "correlation"},
                          {"sup_difference", num(t.sup_difference)},
                          {"terminal_difference", num(t.terminal_difference)},
                          {"finite", t.finite},
                          {"defined_records", t.defined_records},
                          {"within_tolerance", t.finite && t.sup_difference <= r.agreement_tol}});
    }
    j["tracks"] = tracks;
    j["findings"] = r.findings;
    write_text(out_dir / "report.json", j.dump(2) + "\n");
    write_text(out_dir / "report.txt", format_report(r));
    result.elapsed_seconds = seconds_since(t0);
    return result;
}

SweepResult run_sweep(const fs::path& sweep_file, const fs::path& out_dir, const SweepOptions& options)
{
    const nlohmann::json spec = read_json_file(sweep_file);
    std::vector<Diagnostic> diags;
    if (!spec.is_object()) throw ScenarioInvalid({Diagnostic{"", "sweep file must be a JSON object", 0, 0}});
    for (const auto& [key, value] : spec.items()) {
        (void)value;
        if (key != "base" && key != "grid" && key != "threads" && key != "description") {
            diags.push_back(Diagnostic{key, "unknown field", 0, 0});
        }
    }
    if (!spec.contains("base") || !spec["base"].is_string()) {
        diags.push_back(Diagnostic{"base", "must name the base scenario file", 0, 0});
    }
    if (!spec.contains("grid") || !spec["grid"].is_object() || spec["grid"].empty()) {
        diags.push_back(Diagnostic{"grid", "must map dotted scenario paths to arrays of values", 0, 0});
    } else {
        for (const auto& [key, value] : spec["grid"].items()) {
            if (!value.is_array() || value.empty()) {
                diags.push_back(Diagnostic{"grid." + key, "must be a non-empty array", 0, 0});
            }
        }
    }
    unsigned threads = options.threads;
    if (spec.contains("threads")) {
        if (!spec["threads"].is_number_unsigned()) {
            diags.push_back(Diagnostic{"threads", "must be a non-negative integer", 0, 0});
        } else if (threads == 0) {
            threads = spec["threads"].get<unsigned>();
        }
    }
    if (!diags.empty()) throw ScenarioInvalid(std::move(diags));

    const fs::path base_path = sweep_file.parent_path() / spec["base"].get<std::string>();
    nlohmann::json base = read_json_file(base_path);
    if (!base.is_object()) throw ScenarioInvalid({Diagnostic{"base", "base scenario must be a JSON object", 0, 0}});
    const std::string base_id = base.contains("id") && base["id"].is_string() ? base["id"].get<std::string>()
                                                                              : base_path.stem().string();

    SweepResult result;
    std::vector<const nlohmann::json*> axis_values;
    std::size_t total = 1;
    for (const auto& [key, value] : spec["grid"].items()) {
        result.axes.push_back(key);
        axis_values.push_back(&value);
        total *= value.size();
    }

    result.points.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        std::size_t rem = i;
        std::vector<nlohmann::json> values(result.axes.size());
        for (std::size_t a = result.axes.size(); a-- > 0;) {
            const std::size_t n = axis_values[a]->size();
            values[a] = (*axis_values[a])[rem % n];
            rem /= n;
        }
        result.points[i].index = i;
        result.points[i].values = std::move(values);
    }

    ensure_dir(out_dir);
    const fs::path base_dir = base_path.parent_path();

    auto run_point = [&](SweepPoint& pt) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%03zu", pt.index);
        const fs::path dir = out_dir / name;
        try {
            ensure_dir(dir);
            nlohmann::json doc = base;
            for (std::size_t a = 0; a < result.axes.size(); ++a) set_dotted(doc, result.axes[a], pt.values[a]);
            doc["id"] = base_id + "_" + name;
            write_text(dir / "scenario.json", doc.dump(2) + "\n");
            const Scenario sc = build_scenario(doc, base_dir);
            RunSummary s = run_scenario(sc, dir, options.run);
            pt.exit_status = s.exit_status;
            pt.status = s.exit_status == exit_code::ok ? "ok" : "aborted";
            pt.message = s.failure_message;
            pt.summary = std::move(s);
        } catch (const ScenarioInvalid& e) {
            pt.status = "invalid";
            pt.exit_status = exit_code::validation;
            pt.message = e.what();
        } catch (const ScenarioIOError& e) {
            pt.status = "error";
            pt.exit_status = exit_code::io;
            pt.message = e.what();
        } catch (const std::exception& e) {
            pt.status = "error";
            pt.exit_status = exit_code::aborted;
            pt.message = e.what();
        }
        if (pt.exit_status != exit_code::ok) {
            try {
                write_text(dir / "error.txt", pt.message + "\n");
            } catch (const std::exception&) {
                // the point is already marked as failed
            }
        }
    };

    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i = next++; i < total; i = next++) run_point(result.points[i]);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    OutFile f(out_dir / "aggregate.csv");
    auto& out = f.stream();
    out << "point";
    for (const auto& a : result.axes) out << ',' << a;
    out << ",status,exit_code,final_bath_temperature,final_total_energy,rel_energy_drift,"
           "min_step_entropy_change,min_entropy_production,entropy_production_nonneg,distance_to_gibbs,"
           "min_eigenvalue,max_trace_error\n";
    for (const auto& pt : result.points) {
        out << pt.index;
        for (const auto& v : pt.values) out << ',' << csv_value(v);
        out << ',' << pt.status << ',' << pt.exit_status;
        if (pt.summary) {
            const RunSummary& s = *pt.summary;
            out << ',' << format_g17(s.final_bath_temperature) << ',' << format_g17(s.final_total_energy) << ','
                << format_g17(s.stats.max_rel_energy_drift) << ',' << format_g17(s.stats.min_step_entropy_change)
                << ',' << format_g17(s.min_entropy_production) << ','
                << (s.min_entropy_production >= -1e-10 ? "true" : "false") << ','
                << format_g17(s.distance_to_gibbs) << ',' << format_g17(s.stats.min_eigenvalue) << ','
                << format_g17(s.stats.max_trace_error);
        } else {
            out << ",,,,,,,,,";
        }
        out << '\n';
    }
    f.close();
    for (const auto& pt : result.points) {
        if (pt.exit_status != exit_code::ok) {
            result.exit_status = pt.exit_status;
            break;
        }
    }
    return result;
}

} // namespace qdiss
