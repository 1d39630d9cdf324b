#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/solver.hpp"

extern char** environ;

#ifndef ATOMGRID_BRIDGE_SCRIPT
#define ATOMGRID_BRIDGE_SCRIPT "highs_bridge.py"
#endif

namespace atomgrid::solver {

using lp::kInf;
using lp::Sense;

std::string_view to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::Optimal: return "Optimal";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::Unbounded: return "Unbounded";
    }
    return "?";
}

SolveStatus parse_status(std::string_view s)
{
    if (s == "Optimal") return SolveStatus::Optimal;
    if (s == "Infeasible") return SolveStatus::Infeasible;
    if (s == "Unbounded") return SolveStatus::Unbounded;
    throw ValidationError(fmt::format("unknown solve status '{}'", s));
}

// ---------------------------------------------------------------------------
// verification

std::string VerificationReport::summary() const
{
    return fmt::format("primal_residual={:.3g} (tol {:.3g}) dual_residual={:.3g} (tol {:.3g}) "
                       "gap={:.3g} (tol {:.3g}) complementarity={:.3g}{}",
                       primal_residual, primal_tol, dual_residual, dual_tol, duality_gap, gap_tol,
                       complementarity, offending.empty() ? "" : " offending=" + offending);
}

void VerificationReport::require() const
{
    if (!ok()) {
        throw VerificationFailed("optimality check failed: " + summary());
    }
}

VerificationReport verify_optimality(const lp::LPProblem& lp, const Solution& sol, double tol)
{
    VerificationReport rep;
    const auto n = lp.num_variables();
    const auto m = lp.num_rows();
    if (sol.status != SolveStatus::Optimal) {
        rep.primal_ok = rep.dual_ok = rep.gap_ok = false;
        rep.offending = fmt::format("status {}", to_string(sol.status));
        return rep;
    }
    if (sol.primal.size() != n || sol.dual.size() != m) {
        rep.primal_ok = rep.dual_ok = rep.gap_ok = false;
        rep.offending = fmt::format("solution has {} primal / {} dual values for {} columns / {} rows",
                                    sol.primal.size(), sol.dual.size(), n, m);
        return rep;
    }

    double rhs_norm = 0.0;
    for (const auto& r : lp.rows()) {
        rhs_norm = std::max(rhs_norm, std::abs(r.rhs));
    }
    double cost_norm = 0.0;
    for (const double c : lp.costs()) {
        cost_norm = std::max(cost_norm, std::abs(c));
    }
    rep.primal_tol = tol * (1.0 + rhs_norm);
    rep.dual_tol = tol * (1.0 + cost_norm);
    rep.gap_tol = tol;

    std::string worst_primal;
    std::string worst_dual;
    const auto act = lp.activities(sol.primal);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& row = lp.row(i);
        double viol = 0.0;
        double dual_viol = 0.0;
        switch (row.sense) {
        case Sense::LessEqual:
            viol = act[i] - row.rhs;
            dual_viol = sol.dual[i];
            break;
        case Sense::GreaterEqual:
            viol = row.rhs - act[i];
            dual_viol = -sol.dual[i];
            break;
        case Sense::Equal:
            viol = std::abs(act[i] - row.rhs);
            break;
        }
        if (viol > rep.primal_residual) {
            rep.primal_residual = viol;
            worst_primal = "row " + row.name;
        }
        if (dual_viol > rep.dual_residual) {
            rep.dual_residual = dual_viol;
            worst_dual = "row " + row.name;
        }
        const double cs = std::abs(sol.dual[i] * (act[i] - row.rhs));
        rep.complementarity = std::max(rep.complementarity, cs);
    }

    // reduced costs d = c - A'y
    std::vector<double> d = lp.costs();
    for (const auto& t : lp.triplets()) {
        d[t.col] -= t.value * sol.dual[t.row];
    }
    double dual_obj = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        dual_obj += lp.row(i).rhs * sol.dual[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        const auto& v = lp.variable(j);
        const double x = sol.primal[j];
        const double viol = std::max(v.lower - x, x - v.upper);
        if (viol > rep.primal_residual) {
            rep.primal_residual = viol;
            worst_primal = "bound " + v.name;
        }
        double dual_viol = 0.0;
        if (d[j] > 0) {
            if (std::isfinite(v.lower)) {
                dual_obj += v.lower * d[j];
                rep.complementarity = std::max(rep.complementarity, std::abs(d[j] * (x - v.lower)));
            } else {
                dual_viol = d[j];
            }
        } else if (d[j] < 0) {
            if (std::isfinite(v.upper)) {
                dual_obj += v.upper * d[j];
                rep.complementarity = std::max(rep.complementarity, std::abs(d[j] * (v.upper - x)));
            } else {
                dual_viol = -d[j];
            }
        }
        if (dual_viol > rep.dual_residual) {
            rep.dual_residual = dual_viol;
            worst_dual = "column " + v.name;
        }
    }

    rep.primal_objective = lp.objective(sol.primal);
    rep.dual_objective = dual_obj;
    const double scale = 1.0 + std::abs(rep.primal_objective);
    rep.duality_gap = std::abs(rep.primal_objective - dual_obj) / scale;
    rep.complementarity /= scale;

    rep.primal_ok = rep.primal_residual <= rep.primal_tol;
    rep.dual_ok = rep.dual_residual <= rep.dual_tol;
    rep.gap_ok = rep.duality_gap <= rep.gap_tol;
    if (!rep.primal_ok) {
        rep.offending = worst_primal;
    } else if (!rep.dual_ok) {
        rep.offending = worst_dual;
    } else if (!rep.gap_ok) {
        rep.offending = "objective (strong duality)";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// backends

Solution Backend::submit_mps(const std::filesystem::path& mps, const BackendOptions& options) const
{
    return submit(lp::read_mps(mps), options);
}

namespace {

double option_double(const BackendOptions& o, const std::string& key, double fallback)
{
    const auto it = o.find(key);
    return it == o.end() ? fallback : detail::parse_double(it->second, "backend option " + key);
}

void reject_unknown(const Backend& b, const BackendOptions& options)
{
    const auto keys = b.option_keys();
    for (const auto& [k, v] : options) {
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
            throw ValidationError(fmt::format("backend '{}' has no option '{}' (accepted: {})", b.id(), k,
                                              fmt::join(keys, ", ")));
        }
    }
}

class ReferenceBackend final : public Backend {
public:
    std::string id() const override { return "reference"; }
    bool available(std::string*) const override { return true; }
    bool concurrent() const override { return true; }
    std::vector<std::string> option_keys() const override { return {"max_variables", "tol"}; }

    void check_options(const BackendOptions& options) const override
    {
        reject_unknown(*this, options);
        if (options.contains("tol") && !(option_double(options, "tol", 0) > 0)) {
            throw ValidationError("backend option tol must be positive");
        }
        if (options.contains("max_variables") &&
            detail::parse_int(options.at("max_variables"), "backend option max_variables") < 1) {
            throw ValidationError("backend option max_variables must be at least 1");
        }
    }

    Solution submit(const lp::LPProblem& problem, const BackendOptions& options) const override
    {
        check_options(options);
        SimplexOptions so;
        so.infeasibility_tol = option_double(options, "tol", so.infeasibility_tol);
        if (options.contains("max_variables")) {
            so.max_variables = static_cast<std::size_t>(
                detail::parse_int(options.at("max_variables"), "backend option max_variables"));
        }
        return solve_reference(problem, so);
    }
};

std::string env_or(const char* name, std::string fallback)
{
    const char* v = std::getenv(name);
    return v && *v ? std::string(v) : fallback;
}

struct ProcessResult {
    int exit_code = -1;
    std::string output;
};

/// Runs argv[0] (searched on PATH) with stdout and stderr captured to a file.
ProcessResult run_process(const std::vector<std::string>& args, const std::filesystem::path& log)
{
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (const auto& a : args) {
        argv.push_back(const_cast<char*>(a.c_str()));
    }
    argv.push_back(nullptr);

    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    posix_spawn_file_actions_adddup2(&actions, STDOUT_FILENO, STDERR_FILENO);
    posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);

    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ProcessResult res;
    if (rc != 0) {
        res.output = fmt::format("cannot launch {}: {}", args[0], std::strerror(rc));
        return res;
    }
    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) {
            res.output = "waitpid failed";
            return res;
        }
    }
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    std::ifstream in(log);
    res.output.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return res;
}

/// Scratch directory removed on scope exit.
class ScratchDir {
public:
    ScratchDir()
    {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                fmt::format("atomgrid-{}-{}", static_cast<long>(getpid()), counter.fetch_add(1));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

std::string tail(const std::string& s, std::size_t n = 600)
{
    return s.size() <= n ? s : "..." + s.substr(s.size() - n);
}

class HighsBridgeBackend final : public Backend {
public:
    std::string id() const override { return "highs-bridge"; }
    bool concurrent() const override { return true; }
    std::vector<std::string> option_keys() const override
    {
        return {"method", "presolve", "python", "script", "time_limit"};
    }

    bool available(std::string* reason) const override
    {
        return probe({}, reason);
    }

    void check_options(const BackendOptions& options) const override
    {
        reject_unknown(*this, options);
        if (const auto it = options.find("method"); it != options.end()) {
            if (it->second != "highs" && it->second != "highs-ds" && it->second != "highs-ipm") {
                throw ValidationError(fmt::format(
                    "backend option method must be highs, highs-ds or highs-ipm, got '{}'", it->second));
            }
        }
        if (const auto it = options.find("presolve"); it != options.end()) {
            if (it->second != "true" && it->second != "false") {
                throw ValidationError(
                    fmt::format("backend option presolve must be true or false, got '{}'", it->second));
            }
        }
        if (options.contains("time_limit") && !(option_double(options, "time_limit", 0) > 0)) {
            throw ValidationError("backend option time_limit must be positive");
        }
    }

    Solution submit(const lp::LPProblem& problem, const BackendOptions& options) const override
    {
        problem.validate();
        ScratchDir dir;
        const auto mps = dir.path() / "model.mps";
        lp::export_mps(problem, mps);
        auto sol = run(mps, dir.path(), options);
        if (sol.status != SolveStatus::Infeasible && sol.primal.size() != problem.num_variables()) {
            throw NumericalError(fmt::format("highs-bridge returned {} values for {} columns",
                                             sol.primal.size(), problem.num_variables()));
        }
        return sol;
    }

    Solution submit_mps(const std::filesystem::path& mps, const BackendOptions& options) const override
    {
        ScratchDir dir;
        return run(std::filesystem::absolute(mps), dir.path(), options);
    }

private:
    static std::string python(const BackendOptions& o)
    {
        const auto it = o.find("python");
        return it != o.end() ? it->second : env_or("ATOMGRID_PYTHON", "python3");
    }

    static std::string script(const BackendOptions& o)
    {
        const auto it = o.find("script");
        return it != o.end() ? it->second : env_or("ATOMGRID_BRIDGE_SCRIPT", ATOMGRID_BRIDGE_SCRIPT);
    }

    static bool probe(const BackendOptions& o, std::string* reason)
    {
        const auto path = script(o);
        if (!std::filesystem::exists(path)) {
            if (reason) *reason = fmt::format("bridge script not found at {}", path);
            return false;
        }
        ScratchDir dir;
        const auto res = run_process({python(o), "-c", "import scipy.optimize"}, dir.path() / "probe.log");
        if (res.exit_code != 0) {
            if (reason) *reason = fmt::format("{} cannot import scipy.optimize: {}", python(o), tail(res.output, 200));
            return false;
        }
        return true;
    }

    Solution run(const std::filesystem::path& mps, const std::filesystem::path& dir,
                 const BackendOptions& options) const
    {
        check_options(options);
        std::string reason;
        if (!probe(options, &reason)) {
            throw BackendUnavailable("highs-bridge unavailable: " + reason);
        }
        const auto out = dir / "solution.json";
        std::vector<std::string> args{python(options), script(options), mps.string(), out.string()};
        for (const auto& key : {"method", "presolve", "time_limit"}) {
            if (const auto it = options.find(key); it != options.end()) {
                args.push_back(fmt::format("{}={}", key, it->second));
            }
        }
        const auto res = run_process(args, dir / "bridge.log");
        if (res.exit_code != 0) {
            throw NumericalError(fmt::format("highs-bridge exited with code {}: {}", res.exit_code, tail(res.output)));
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(detail::read_text_file(out));
        } catch (const nlohmann::json::exception& e) {
            throw NumericalError(fmt::format("highs-bridge produced unreadable output: {}", e.what()));
        }
        const auto status = j.at("status").get<std::string>();
        Solution sol;
        sol.backend = id();
        if (status != "Optimal" && status != "Infeasible" && status != "Unbounded") {
            throw NumericalError(fmt::format("highs-bridge: {} ({})", status, j.value("message", "")));
        }
        sol.status = parse_status(status);
        sol.primal = j.value("x", std::vector<double>{});
        sol.dual = j.value("y", std::vector<double>{});
        sol.iterations = j.value("iterations", std::size_t{0});
        sol.objective = sol.status == SolveStatus::Optimal ? j.at("objective").get<double>()
                        : sol.status == SolveStatus::Unbounded ? -kInf
                                                               : 0.0;
        return sol;
    }
};

} // namespace

std::unique_ptr<Backend> make_reference_backend()
{
    return std::make_unique<ReferenceBackend>();
}

std::unique_ptr<Backend> make_highs_bridge_backend()
{
    return std::make_unique<HighsBridgeBackend>();
}

BackendRegistry& BackendRegistry::instance()
{
    static BackendRegistry registry = [] {
        BackendRegistry r;
        r.add(make_reference_backend());
        r.add(make_highs_bridge_backend());
        return r;
    }();
    return registry;
}

void BackendRegistry::add(std::unique_ptr<Backend> backend)
{
    auto id = backend->id();
    backends_[id] = std::move(backend);
}

const Backend& BackendRegistry::get(std::string_view id) const
{
    const auto it = backends_.find(id);
    if (it == backends_.end()) {
        throw BackendUnavailable(fmt::format("no solver backend '{}' (registered: {})", id, fmt::join(ids(), ", ")));
    }
    return *it->second;
}

bool BackendRegistry::contains(std::string_view id) const
{
    return backends_.find(id) != backends_.end();
}

std::vector<std::string> BackendRegistry::ids() const
{
    std::vector<std::string> out;
    for (const auto& [k, v] : backends_) {
        out.push_back(k);
    }
    return out;
}

std::string default_backend_id()
{
    return env_or(kSolverEnv, "auto");
}

std::string resolve_backend_id(std::string_view id, const lp::LPProblem& lp)
{
    if (id != "auto") {
        return std::string(id);
    }
    return lp.num_variables() <= SimplexOptions{}.max_variables ? "reference" : "highs-bridge";
}

Solution solve_backend(const lp::LPProblem& lp, std::string_view backend_id, const BackendOptions& options)
{
    const auto id = resolve_backend_id(backend_id, lp);
    const auto& backend = BackendRegistry::instance().get(id);
    backend.check_options(options);
    std::string reason;
    if (!backend.available(&reason)) {
        throw BackendUnavailable(fmt::format("backend '{}' unavailable: {}", id, reason));
    }
    auto sol = backend.submit(lp, options);
    if (sol.status == SolveStatus::Optimal) {
        verify_optimality(lp, sol).require();
    }
    return sol;
}

BackendOptions parse_backend_options(const std::vector<std::string>& pairs)
{
    BackendOptions out;
    for (const auto& p : pairs) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw ValidationError(fmt::format("backend option '{}' is not key=value", p));
        }
        const auto key = std::string(detail::trim(std::string_view(p).substr(0, eq)));
        if (out.contains(key)) {
            throw ValidationError(fmt::format("backend option '{}' given twice", key));
        }
        out[key] = std::string(detail::trim(std::string_view(p).substr(eq + 1)));
    }
    return out;
}

} // namespace atomgrid::solver
