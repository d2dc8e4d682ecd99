// qdiss — command-line front end: validate, run, compare and sweep scenarios
//
// Exit codes: 0 success, 2 validation failure, 3 I/O failure, 4 integration abort.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qdiss/errors.hpp"
#include "qdiss/runner.hpp"
#include "qdiss/scenario.hpp"

namespace fs = std::filesystem;
using namespace qdiss;

namespace {

struct Common {
    std::string out;
    std::size_t stride = 0;
    long long seed = 0;  // accepted for interface stability; the dynamics are deterministic
    bool quiet = false;
};

fs::path output_dir(const Common& opt, const std::string& name)
{
    if (!opt.out.empty()) return opt.out;
    const char* env = std::getenv("QDISS_OUTPUT_DIR");
    const fs::path root = env && *env ? fs::path(env) : fs::path("qdiss_out");
    return root / name;
}

RunOptions run_options(const Common& opt)
{
    RunOptions r;
    if (opt.stride > 0) r.stride = opt.stride;
    return r;
}

void print_diagnostics(const std::string& file, const std::vector<Diagnostic>& diags)
{
    for (const auto& d : diags) std::cerr << file << ": " << d.str() << "\n";
}

int cmd_validate(const std::string& path, const Common& opt)
{
    const nlohmann::json doc = read_json_file(path);
    const auto diags = validate_scenario(doc, fs::path(path).parent_path());
    if (!diags.empty()) {
        print_diagnostics(path, diags);
        return exit_code::validation;
    }
    if (!opt.quiet) std::cout << path << ": ok\n";
    return exit_code::ok;
}

int cmd_run(const std::string& path, const Common& opt)
{
    const Scenario sc = load_scenario(path);
    const fs::path dir = output_dir(opt, sc.id);
    const RunSummary s = run_scenario(sc, dir, run_options(opt));
    if (!opt.quiet) {
        std::cout << sc.id << ": " << (s.exit_status == exit_code::ok ? "ok" : "aborted") << ", " << s.records
                  << " records, " << s.stats.steps << " steps -> " << dir.string() << "\n";
        std::cout << "  max relative energy drift " << format_g17(s.stats.max_rel_energy_drift)
                  << "\n  min step entropy change " << format_g17(s.stats.min_step_entropy_change)
                  << "\n  trace distance to Gibbs " << format_g17(s.distance_to_gibbs) << "\n";
        if (s.exit_status != exit_code::ok) std::cout << "  failure: " << s.failure_message << "\n";
        std::cerr << "elapsed " << s.elapsed_seconds << " s\n";
    }
    return s.exit_status;
}

int cmd_compare(const std::string& path, const Common& opt)
{
    const Scenario sc = load_scenario(path);
    const fs::path dir = output_dir(opt, sc.id);
    const CompareResult r = compare_scenario(sc, dir, run_options(opt));
    if (r.exit_status == exit_code::validation) {
        std::cerr << path << ": " << r.failure_message << "\n";
        return r.exit_status;
    }
    if (!opt.quiet) {
        if (r.report) {
            std::cout << format_report(*r.report);
        } else {
            std::cout << sc.id << ": aborted: " << r.failure_message << "\n";
        }
        std::cout << "-> " << dir.string() << "\n";
        std::cerr << "elapsed " << r.elapsed_seconds << " s\n";
    }
    return r.exit_status;
}

int cmd_sweep(const std::string& path, const Common& opt, unsigned threads)
{
    const fs::path dir = output_dir(opt, fs::path(path).stem().string());
    SweepOptions so;
    so.run = run_options(opt);
    so.threads = threads;
    const SweepResult r = run_sweep(path, dir, so);
    std::size_t ok = 0;
    for (const auto& pt : r.points) {
        if (pt.exit_status == exit_code::ok) {
            ++ok;
        } else if (!opt.quiet) {
            std::cerr << "point " << pt.index << ": " << pt.status << ": " << pt.message << "\n";
        }
    }
    if (!opt.quiet) {
        std::cout << ok << " of " << r.points.size() << " points succeeded -> " << dir.string() << "\n";
    }
    return r.exit_status;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Thermodynamic quantum master equation simulator"};
    app.require_subcommand(1);

    Common opt;
    std::string scenario;
    unsigned threads = 0;

    auto add_common = [&](CLI::App* sub, bool outputs) {
        sub->add_option("scenario", scenario, "Scenario file (JSON)")->required();
        if (outputs) {
            sub->add_option("--out", opt.out, "Output directory (default: $QDISS_OUTPUT_DIR/<name> or qdiss_out/<name>)");
            sub->add_option("--stride", opt.stride, "Record every N-th step (overrides output.stride)")
                ->check(CLI::PositiveNumber);
            sub->add_option("--seed", opt.seed, "Reserved; the dynamics are deterministic");
        }
        sub->add_flag("--quiet,-q", opt.quiet, "Suppress progress output");
    };

    auto* validate = app.add_subcommand("validate", "Check a scenario file and report diagnostics");
    add_common(validate, false);
    auto* run = app.add_subcommand("run", "Integrate a scenario; write trajectory.csv and summary.json");
    add_common(run, true);
    auto* compare = app.add_subcommand("compare", "Compare nonlinear and linearized dynamics for a scenario");
    add_common(compare, true);
    auto* sweep = app.add_subcommand("sweep", "Run a parameter grid over a base scenario");
    add_common(sweep, true);
    sweep->add_option("--threads", threads, "Worker threads (default: sweep file, then hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code::validation;
    }

    try {
        if (*validate) return cmd_validate(scenario, opt);
        if (*run) return cmd_run(scenario, opt);
        if (*compare) return cmd_compare(scenario, opt);
        if (*sweep) return cmd_sweep(scenario, opt, threads);
    } catch (const ScenarioInvalid& e) {
        print_diagnostics(scenario, e.diagnostics());
        return exit_code::validation;
    } catch (const ScenarioIOError& e) {
        std::cerr << "qdiss: " << e.what() << "\n";
        return exit_code::io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "qdiss: " << e.what() << "\n";
        return exit_code::io;
    } catch (const std::exception& e) {
        std::cerr << "qdiss: " << e.what() << "\n";
        return exit_code::aborted;
    }
    return exit_code::validation;
}
