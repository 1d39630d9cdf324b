#pragma once

// LP solvers: an exact dense bounded revised simplex for small instances, a
// registry of pluggable backends for large ones, and an independent
// optimality certificate check.

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "atomgrid/lp.hpp"

namespace atomgrid::solver {

enum class SolveStatus { Optimal, Infeasible, Unbounded };

std::string_view to_string(SolveStatus s);
SolveStatus parse_status(std::string_view s);

/// Result of a solve. Row duals follow the sensitivity convention
/// y_i = d(objective)/d(rhs_i): nonnegative on >= rows, nonpositive on <=.
struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    std::vector<double> primal;
    std::vector<double> dual;
    double objective = 0.0;
    std::size_t iterations = 0;
    std::string backend;
};

struct SimplexOptions {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-9;
    /// Phase-one infeasibility above tol * (1 + |rhs|_inf) classifies Infeasible.
    double infeasibility_tol = 1e-6;
    std::size_t max_variables = 5000;
    std::size_t max_iterations = 0; ///< 0 = 50 (m + n) + 1000
    std::size_t refactor_interval = 64;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    std::size_t stall_threshold = 50;
};

/// Dense bounded revised simplex with Dantzig pricing and a Bland fallback
/// after stalling. Throws NumericalError when the size guard is exceeded
/// ("use backend") or the basis becomes singular.
Solution solve_reference(const lp::LPProblem& lp, const SimplexOptions& options = {});
Solution solve_reference(const lp::LPProblem& lp, double tol);

struct VerificationReport {
    double primal_residual = 0.0;   ///< max row or bound violation
    double dual_residual = 0.0;     ///< max dual sign / reduced-cost violation
    double duality_gap = 0.0;       ///< |c'x - dual objective| / (1 + |c'x|)
    double complementarity = 0.0;   ///< max |y_i slack_i|, |d_j dist_j|, scaled
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double primal_tol = 0.0;
    double dual_tol = 0.0;
    double gap_tol = 0.0;
    bool primal_ok = true;
    bool dual_ok = true;
    bool gap_ok = true;
    std::string offending; ///< worst row or column, when a check fails

    bool ok() const { return primal_ok && dual_ok && gap_ok; }
    std::string summary() const;
    /// Throws VerificationFailed naming the offending row.
    void require() const;
};

/// Checks primal feasibility, dual feasibility and strong duality of a
/// claimed-optimal solution using only the LP data and the row duals.
VerificationReport verify_optimality(const lp::LPProblem& lp, const Solution& sol, double tol = 1e-6);

using BackendOptions = std::map<std::string, std::string>;

/// Solver engine behind the backend contract.
class Backend {
public:
    virtual ~Backend() = default;
    virtual std::string id() const = 0;
    /// False with a reason when the engine cannot run in this environment.
    virtual bool available(std::string* reason) const = 0;
    virtual bool concurrent() const = 0;
    virtual std::vector<std::string> option_keys() const = 0;
    /// Throws ValidationError for unknown keys or unparsable values.
    virtual void check_options(const BackendOptions& options) const = 0;
    virtual Solution submit(const lp::LPProblem& lp, const BackendOptions& options) const = 0;
    /// Solves an MPS file; the default parses it and calls submit().
    virtual Solution submit_mps(const std::filesystem::path& mps, const BackendOptions& options) const;
};

/// In-process adapter over solve_reference. Options: tol, max_variables.
std::unique_ptr<Backend> make_reference_backend();

/// MPS-subprocess bridge to HiGHS through scipy. Options: method
/// (highs-ipm by default, highs-ds, highs), presolve (true/false),
/// time_limit (s),
/// python (interpreter path), script (bridge script path).
std::unique_ptr<Backend> make_highs_bridge_backend();

class BackendRegistry {
public:
    /// Registry holding the built-in backends.
    static BackendRegistry& instance();

    void add(std::unique_ptr<Backend> backend);
    /// Throws BackendUnavailable for unknown ids.
    const Backend& get(std::string_view id) const;
    bool contains(std::string_view id) const;
    std::vector<std::string> ids() const;

private:
    std::map<std::string, std::unique_ptr<Backend>, std::less<>> backends_;
};

/// Environment variable selecting the default backend.
inline constexpr const char* kSolverEnv = "ATOMGRID_SOLVER";

/// The id named by ATOMGRID_SOLVER, or "auto".
std::string default_backend_id();

/// Resolves "auto": the reference simplex below its size guard, the HiGHS
/// bridge above it.
std::string resolve_backend_id(std::string_view id, const lp::LPProblem& lp);

/// Validates options, checks availability and dispatches to the backend.
Solution solve_backend(const lp::LPProblem& lp, std::string_view backend_id,
                       const BackendOptions& options = {});

/// Parses "key=value" strings into backend options.
BackendOptions parse_backend_options(const std::vector<std::string>& pairs);

} // namespace atomgrid::solver
