// atomgrid: cost normalization, system validation, LP build/solve and the
// scenario matrix from the command line.
//
// Exit codes: 0 success, 2 validation error, 3 infeasible or unbounded,
// 4 solver backend unavailable, 1 anything else.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "atomgrid/costkit.hpp"
#include "atomgrid/detail/log.hpp"
#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/lp_build.hpp"
#include "atomgrid/report.hpp"
#include "atomgrid/scenarios.hpp"
#include "atomgrid/solver.hpp"
#include "atomgrid/sysmodel.hpp"

namespace {

using namespace atomgrid;
using nlohmann::json;

enum Exit { kOk = 0, kFailure = 1, kInvalid = 2, kInfeasible = 3, kNoBackend = 4 };

void write_or_print(const std::string& path, const std::string& text)
{
    if (path.empty() || path == "-") {
        std::fputs(text.c_str(), stdout);
    } else {
        detail::write_text_file(path, text);
    }
}

struct CostsArgs {
    std::string records = "data/cost_records.csv";
    std::string escalation = "data/escalation.csv";
    std::string level = "all";
    std::string out;
    costkit::FinancingTerms terms;
};

int run_costs(const CostsArgs& a)
{
    a.terms.validate();
    const auto table = costkit::read_escalation_table(a.escalation);
    const auto records = costkit::read_cost_records(a.records);
    if (records.empty()) {
        throw ValidationError(fmt::format("{}: no cost records", a.records));
    }
    const auto normalized = costkit::normalize_records(records, table);
    std::vector<costkit::ReadinessLevel> levels;
    if (a.level == "all") {
        levels.assign(costkit::kReadinessLevels.begin(), costkit::kReadinessLevels.end());
    } else {
        levels.push_back(costkit::parse_readiness_level(a.level));
    }
    const auto book = costkit::build_cost_book(normalized, a.terms, levels);
    write_or_print(a.out, costkit::to_json(book).dump(2) + "\n");
    detail::log("info", "costs_done", {{"records", std::to_string(records.size())}, {"levels", a.level}});
    return kOk;
}

int run_validate(const std::string& system_path)
{
    const auto s = sys::load_system(system_path);
    std::cout << fmt::format("system={} regions={} carriers={} technologies={} nuclear={} storage={} corridors={} "
                             "blocks={} block_length_h={} fingerprint={}\n",
                             s.name, s.regions.size(), s.carriers.size(), s.technologies.size(), s.nuclear.size(),
                             s.storage.size(), s.transmission.size(), s.grid.n_blocks, s.grid.block_length_h,
                             s.fingerprint);
    return kOk;
}

struct RunArgs {
    std::string system;
    std::string costs;
    std::string level = "FOAK";
    std::string availability = "all";
};

struct Scenario {
    sys::EnergySystem system;
    sys::ScenarioSpec spec;
    lp_build::BuiltModel model;
};

Scenario build_scenario(const RunArgs& a)
{
    const auto base = sys::load_system(a.system);
    const auto book = costkit::read_cost_book(a.costs);
    auto spec = sys::scenario_from_names(costkit::parse_readiness_level(a.level), a.availability);
    auto applied = sys::apply_scenario(base, spec, book.at(spec.readiness));
    auto model = lp_build::build_lp(applied);
    return {std::move(applied), std::move(spec), std::move(model)};
}

int run_build(const RunArgs& a, const std::string& out)
{
    const auto sc = build_scenario(a);
    if (out.empty() || out == "-") {
        std::fputs(lp::to_mps(sc.model.lp).c_str(), stdout);
    } else {
        lp::export_mps(sc.model.lp, out);
    }
    detail::log("info", "build_done",
                {{"run", report::run_id(sc.spec)},
                 {"variables", std::to_string(sc.model.lp.num_variables())},
                 {"rows", std::to_string(sc.model.lp.num_rows())}});
    return kOk;
}

json solution_json(const lp::LPProblem& lp, const solver::Solution& sol)
{
    json vars = json::array();
    for (std::size_t j = 0; j < sol.primal.size() && j < lp.num_variables(); ++j) {
        vars.push_back({{"name", lp.variable(j).name}, {"value", sol.primal[j]}});
    }
    json rows = json::array();
    for (std::size_t i = 0; i < sol.dual.size() && i < lp.num_rows(); ++i) {
        rows.push_back({{"name", lp.row(i).name}, {"dual", sol.dual[i]}});
    }
    json j{{"status", solver::to_string(sol.status)},
           {"backend", sol.backend},
           {"iterations", sol.iterations},
           {"variables", std::move(vars)},
           {"rows", std::move(rows)}};
    if (sol.status == solver::SolveStatus::Optimal) {
        j["objective"] = sol.objective;
    }
    return j;
}

solver::Solution solution_from_json(const json& j, const lp::LPProblem& lp)
{
    solver::Solution sol;
    sol.status = solver::parse_status(j.at("status").get<std::string>());
    sol.backend = j.value("backend", "");
    sol.iterations = j.value("iterations", std::size_t{0});
    sol.objective = j.value("objective", 0.0);
    const auto& vars = j.at("variables");
    const auto& rows = j.at("rows");
    if (vars.size() != lp.num_variables() || rows.size() != lp.num_rows()) {
        throw ValidationError(fmt::format("solution has {} variables / {} rows, model has {} / {}", vars.size(),
                                          rows.size(), lp.num_variables(), lp.num_rows()));
    }
    for (std::size_t k = 0; k < vars.size(); ++k) {
        if (vars[k].at("name").get<std::string>() != lp.variable(k).name) {
            throw ValidationError(fmt::format("solution variable {} is '{}', model has '{}'", k,
                                              vars[k].at("name").get<std::string>(), lp.variable(k).name));
        }
        sol.primal.push_back(vars[k].at("value").get<double>());
    }
    for (const auto& r : rows) {
        sol.dual.push_back(r.at("dual").get<double>());
    }
    return sol;
}

struct SolveArgs {
    std::string mps;
    std::string out;
    std::string backend = solver::default_backend_id();
    std::vector<std::string> options;
};

int run_solve(const SolveArgs& a)
{
    const auto lp = lp::read_mps(a.mps);
    const auto opts = solver::parse_backend_options(a.options);
    const auto id = solver::resolve_backend_id(a.backend, lp);
    const auto& backend = solver::BackendRegistry::instance().get(id);
    backend.check_options(opts);
    std::string reason;
    if (!backend.available(&reason)) {
        throw BackendUnavailable(fmt::format("backend '{}' unavailable: {}", id, reason));
    }
    const auto sol = backend.submit_mps(a.mps, opts);
    if (sol.status == solver::SolveStatus::Optimal) {
        const auto rep = solver::verify_optimality(lp, sol);
        detail::log("info", "verified", {{"summary", rep.summary()}});
        rep.require();
    }
    write_or_print(a.out, solution_json(lp, sol).dump(1) + "\n");
    detail::log("info", "solve_done",
                {{"status", std::string(solver::to_string(sol.status))},
                 {"backend", sol.backend},
                 {"objective", detail::format_double(sol.objective)}});
    return sol.status == solver::SolveStatus::Optimal ? kOk : kInfeasible;
}

int run_report(const RunArgs& a, const std::string& solution_path, const std::string& out_dir, bool pretty)
{
    const auto sc = build_scenario(a);
    const auto j = json::parse(detail::read_text_file(solution_path));
    const auto sol = solution_from_json(j, sc.model.lp);
    if (sol.status != solver::SolveStatus::Optimal) {
        const auto rep = report::failed_report(sc.system, sc.spec, std::string(solver::to_string(sol.status)),
                                               "solver reported " + std::string(solver::to_string(sol.status)));
        scenarios::write_run_artifacts(rep, out_dir, pretty);
        return kInfeasible;
    }
    const auto verification = solver::verify_optimality(sc.model.lp, sol);
    verification.require();
    const auto rep = report::make_report(sc.system, sc.spec, sc.model, sol, verification);
    scenarios::write_run_artifacts(rep, out_dir, pretty);
    detail::log("info", "report_done", {{"run", rep.run}, {"dir", out_dir}});
    return kOk;
}

struct MatrixArgs {
    std::string system;
    std::string costs;
    std::string out = "out";
    std::vector<std::string> only;
    std::size_t workers = 0;
    std::string backend = solver::default_backend_id();
    std::vector<std::string> options;
    bool pretty = false;
    bool write_mps = false;
    bool no_reuse = false;
};

int run_matrix_cmd(const MatrixArgs& a)
{
    const auto system = sys::load_system(a.system);
    const auto book = costkit::read_cost_book(a.costs);
    auto matrix = scenarios::RunMatrix::from_system(system);
    if (!a.only.empty()) {
        matrix = matrix.only(a.only);
    }
    scenarios::MatrixOptions opts;
    opts.backend = a.backend;
    opts.backend_options = solver::parse_backend_options(a.options);
    opts.workers = a.workers;
    opts.out_dir = a.out;
    opts.pretty = a.pretty;
    opts.write_mps = a.write_mps;
    opts.reuse_parent = !a.no_reuse;
    if (opts.backend != "auto") {
        const auto& backend = solver::BackendRegistry::instance().get(opts.backend);
        backend.check_options(opts.backend_options);
        std::string reason;
        if (!backend.available(&reason)) {
            throw BackendUnavailable(fmt::format("backend '{}' unavailable: {}", opts.backend, reason));
        }
    }
    detail::log("info", "matrix_start", {{"runs", std::to_string(matrix.size())}, {"out", a.out}});
    const auto reports = scenarios::run_matrix(system, book, matrix, opts);
    std::size_t optimal = 0;
    std::size_t infeasible = 0;
    for (const auto& r : reports) {
        optimal += r.optimal();
        infeasible += r.status == "Infeasible" || r.status == "Unbounded";
    }
    detail::log(optimal == reports.size() ? "info" : "warn", "matrix_done",
                {{"runs", std::to_string(reports.size())},
                 {"optimal", std::to_string(optimal)},
                 {"failed", std::to_string(reports.size() - optimal)}});
    if (optimal == reports.size()) {
        return kOk;
    }
    return optimal + infeasible == reports.size() ? kInfeasible : kFailure;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"atomgrid: multi-carrier capacity expansion with nuclear cogeneration"};
    app.require_subcommand(1);
    bool quiet = false;
    app.add_flag("-q,--quiet", quiet, "Suppress log lines on stderr");

    CostsArgs costs;
    auto* c = app.add_subcommand("costs", "Normalize cost records into a cost book (JSON)");
    c->add_option("--records", costs.records, "Cost record CSV")->check(CLI::ExistingFile);
    c->add_option("--escalation", costs.escalation, "Escalation table CSV")->check(CLI::ExistingFile);
    c->add_option("--level", costs.level, "FOAK, NOAK_mean, NOAK_min or all");
    c->add_option("--out", costs.out, "Output JSON (stdout if omitted)");
    c->add_option("--construction-years", costs.terms.construction_years);
    c->add_option("--wacc", costs.terms.wacc);
    c->add_option("--lifetime", costs.terms.lifetime_years);
    c->add_option("--capacity-factor", costs.terms.capacity_factor);

    std::string validate_path;
    auto* v = app.add_subcommand("validate", "Load and validate a system configuration");
    v->add_option("--system", validate_path, "System JSON")->required();

    RunArgs build_args;
    std::string build_out;
    auto* b = app.add_subcommand("build", "Build one scenario LP and write it as MPS");
    b->add_option("--system", build_args.system)->required();
    b->add_option("--costs", build_args.costs, "Cost book JSON from `costs`")->required();
    b->add_option("--level", build_args.level);
    b->add_option("--availability", build_args.availability);
    b->add_option("--out", build_out, "MPS file (stdout if omitted)");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve an MPS file and write the solution (JSON)");
    s->add_option("--mps", solve.mps)->required()->check(CLI::ExistingFile);
    s->add_option("--out", solve.out, "Solution JSON (stdout if omitted)");
    s->add_option("--backend", solve.backend, "reference, highs-bridge or auto");
    s->add_option("--option", solve.options, "Backend option key=value (repeatable)");

    RunArgs report_args;
    std::string report_solution;
    std::string report_out;
    bool report_pretty = false;
    auto* r = app.add_subcommand("report", "Turn a solution of a built scenario into report files");
    r->add_option("--system", report_args.system)->required();
    r->add_option("--costs", report_args.costs)->required();
    r->add_option("--level", report_args.level);
    r->add_option("--availability", report_args.availability);
    r->add_option("--solution", report_solution)->required()->check(CLI::ExistingFile);
    r->add_option("--out", report_out, "Output directory")->required();
    r->add_flag("--pretty", report_pretty, "Round values to two decimals");

    MatrixArgs matrix;
    auto* m = app.add_subcommand("matrix", "Run the readiness x availability matrix");
    m->add_option("--system", matrix.system)->required();
    m->add_option("--costs", matrix.costs)->required();
    m->add_option("--out", matrix.out, "Output directory");
    m->add_option("--only", matrix.only, "Restrict to level:availability (repeatable)");
    m->add_option("--workers", matrix.workers, "Concurrent runs (default: available parallelism)");
    m->add_option("--backend", matrix.backend, "reference, highs-bridge or auto");
    m->add_option("--option", matrix.options, "Backend option key=value (repeatable)");
    m->add_flag("--pretty", matrix.pretty, "Round values to two decimals");
    m->add_flag("--write-mps", matrix.write_mps, "Also write each run's model.mps");
    m->add_flag("--no-reuse", matrix.no_reuse, "Solve every exclusion run from scratch");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kInvalid;
    }
    detail::set_log_enabled(!quiet);

    try {
        if (*c) return run_costs(costs);
        if (*v) return run_validate(validate_path);
        if (*b) return run_build(build_args, build_out);
        if (*s) return run_solve(solve);
        if (*r) return run_report(report_args, report_solution, report_out, report_pretty);
        if (*m) return run_matrix_cmd(matrix);
    } catch (const BackendUnavailable& e) {
        detail::log("error", "backend_unavailable", {{"message", e.what()}});
        return kNoBackend;
    } catch (const ValidationError& e) {
        detail::log("error", "invalid_input", {{"message", e.what()}});
        return kInvalid;
    } catch (const RangeError& e) {
        detail::log("error", "invalid_input", {{"message", e.what()}});
        return kInvalid;
    } catch (const DomainError& e) {
        detail::log("error", "invalid_input", {{"message", e.what()}});
        return kInvalid;
    } catch (const MissingDataError& e) {
        detail::log("error", "missing_data", {{"message", e.what()}});
        return kInvalid;
    } catch (const nlohmann::json::exception& e) {
        detail::log("error", "invalid_input", {{"message", e.what()}});
        return kInvalid;
    } catch (const std::exception& e) {
        detail::log("error", "failed", {{"message", e.what()}});
        return kFailure;
    }
    return kFailure;
}
