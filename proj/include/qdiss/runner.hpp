// runner.hpp — run / compare / sweep drivers behind the command-line tool
//
// Output files are written with fixed column order and 17 significant
// digits and contain no timestamps or host-dependent data, so repeated runs
// of one scenario on one build are byte-identical. Wall-clock timing is
// returned to the caller only.

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "qdiss/comparator.hpp"
#include "qdiss/scenario.hpp"

namespace qdiss {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int io = 3;
inline constexpr int aborted = 4;
} // namespace exit_code

struct RunOptions {
    std::optional<std::size_t> stride;  // overrides output.stride
};

struct RunSummary {
    std::string scenario_id;
    int exit_status = exit_code::ok;
    std::optional<double> failure_time;
    std::string failure_message;
    std::size_t records = 0;
    TrajectoryStats stats;
    Regularization initial_regularization;
    double final_time = 0.0;
    double final_bath_energy = 0.0;
    double final_bath_temperature = 0.0;
    double final_total_energy = 0.0;
    double final_total_entropy = 0.0;
    double distance_to_gibbs = 0.0;        // final rho vs Gibbs state at the final bath temperature
    double min_entropy_production = 0.0;   // over recorded states
    double elapsed_seconds = 0.0;          // not written to any file
};

// Formats x with 17 significant digits ("nan", "inf", "-inf" for non-finite values).
std::string format_g17(double x);

// Integrates the scenario and writes trajectory.csv and summary.json into out_dir.
// An integration abort flushes the partial trajectory and returns exit_status 4.
RunSummary run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                        const RunOptions& options = {});

struct CompareResult {
    int exit_status = exit_code::ok;
    std::optional<ComparisonReport> report;
    std::string failure_message;
    double elapsed_seconds = 0.0;
};

// Paired nonlinear / linearized integration; writes comparison.csv,
// report.json and report.txt. Requires the rk4 integrator (exit 2 otherwise).
CompareResult compare_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                               const RunOptions& options = {});

// Human-readable report text.
std::string format_report(const ComparisonReport& report);

struct SweepOptions {
    RunOptions run;
    unsigned threads = 0;  // 0: the sweep file's "threads", else hardware concurrency
};

struct SweepPoint {
    std::size_t index = 0;
    std::vector<nlohmann::json> values;  // one per grid axis
    std::string status;                  // "ok", "invalid", "aborted", "error"
    int exit_status = exit_code::ok;
    std::string message;
    std::optional<RunSummary> summary;
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<SweepPoint> points;
    int exit_status = exit_code::ok;  // 0 only if every point succeeded
};

// Runs every point of the Cartesian grid of a sweep file into
// out_dir/point_NNN and writes out_dir/aggregate.csv. Throws ScenarioIOError
// or ScenarioInvalid if the sweep file itself is unusable.
SweepResult run_sweep(const std::filesystem::path& sweep_file, const std::filesystem::path& out_dir,
                      const SweepOptions& options = {});

} // namespace qdiss
