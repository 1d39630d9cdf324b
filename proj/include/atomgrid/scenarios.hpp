#pragma once

// The run matrix: readiness levels x availability sets, executed on a
// bounded worker pool with per-run failure isolation.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "atomgrid/costkit.hpp"
#include "atomgrid/report.hpp"
#include "atomgrid/solver.hpp"
#include "atomgrid/sysmodel.hpp"

namespace atomgrid::scenarios {

struct RunSpec {
    std::string id; ///< "<level>/<availability>"
    sys::ScenarioSpec spec;
    std::filesystem::path subdir; ///< "<level>/<availability>"
};

class RunMatrix {
public:
    /// Every level x availability combination, levels outermost.
    RunMatrix(std::vector<costkit::ReadinessLevel> levels, std::vector<std::string> availability);
    /// The matrix embedded in the system configuration (15 runs by default).
    static RunMatrix from_system(const sys::EnergySystem& system);

    const std::vector<RunSpec>& runs() const { return runs_; }
    std::size_t size() const { return runs_.size(); }

    /// Keeps the runs matching any "level:availability" selector. Throws
    /// ValidationError for malformed selectors or ones matching nothing.
    RunMatrix only(const std::vector<std::string>& selectors) const;

private:
    RunMatrix() = default;
    std::vector<RunSpec> runs_;
};

struct MatrixOptions {
    std::string backend = solver::default_backend_id();
    solver::BackendOptions backend_options;
    std::size_t workers = 0; ///< 0 = available parallelism
    std::optional<std::filesystem::path> out_dir;
    bool write_mps = false;
    bool pretty = false;
    /// Offer each level's "all" optimum to its exclusion runs; it is kept
    /// only when verify_optimality certifies it on the excluded LP.
    bool reuse_parent = true;
};

/// Applies the scenario, builds, solves, verifies and reports one run.
/// Failures become a report with status Infeasible, Unbounded or Error.
report::RunReport run_one(const sys::EnergySystem& system, const costkit::CostBook& costs, const RunSpec& run,
                          const MatrixOptions& options);

/// Executes every run; reports come back in matrix order. When out_dir is
/// set, per-run artifacts go to out_dir/<level>/<availability>/ and the
/// combined reports, comparison and summary to out_dir.
std::vector<report::RunReport> run_matrix(const sys::EnergySystem& system, const costkit::CostBook& costs,
                                          const RunMatrix& matrix, const MatrixOptions& options = {});

/// Writes report.csv and report.json of one run under `dir`.
void write_run_artifacts(const report::RunReport& report, const std::filesystem::path& dir, bool pretty);

struct ComparisonRow {
    std::string kind;      ///< "exclusion" or "readiness"
    std::string reference; ///< run compared against
    std::string run;
    std::string metric;
    double reference_value = 0.0;
    double value = 0.0;
    double delta = 0.0;    ///< value - reference_value
};

struct MonotonicityFlag {
    std::string kind;      ///< "exclusion" or "readiness"
    std::string reference;
    std::string run;
    std::string status;    ///< "ok", "violated" or "n/a"
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<MonotonicityFlag> flags;

    bool all_ok() const;
};

/// Relative tolerance used for the monotonicity flags.
inline constexpr double kMonotoneTol = 1e-6;

/// Deltas of cost, nuclear capacity and nuclear shares of every run against
/// the "all" run of its level, plus monotonicity flags: exclusion must not
/// lower cost, and, when `costs` orders every nuclear entry FOAK >=
/// NOAK_mean >= NOAK_min, cost must not rise along that ordering. Throws
/// ValidationError for fewer than two reports or mismatched systems.
Comparison compare_runs(const std::vector<report::RunReport>& reports,
                        const costkit::CostBook* costs = nullptr);

std::string comparison_csv(const Comparison& c);
/// One row per run with status, cost, nuclear capacity, shares and the
/// run's monotonicity flag.
std::string summary_csv(const std::vector<report::RunReport>& reports, const Comparison* comparison);

} // namespace atomgrid::scenarios
