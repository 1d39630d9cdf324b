#include "atomgrid/scenarios.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "atomgrid/detail/log.hpp"
#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/lp_build.hpp"

namespace atomgrid::scenarios {

namespace {

using costkit::ReadinessLevel;

RunSpec make_run(ReadinessLevel level, const std::string& availability)
{
    RunSpec r;
    r.spec = sys::scenario_from_names(level, availability);
    r.id = report::run_id(r.spec);
    r.subdir = std::filesystem::path(std::string(costkit::to_string(level))) / availability;
    return r;
}

double nuclear_capacity(const report::RunReport& r)
{
    return r.sum("capacity_electricity_primary") + r.sum("capacity_heat_primary");
}

bool no_higher(double value, double reference)
{
    return value <= reference + kMonotoneTol * (1.0 + std::abs(reference));
}

/// True when every nuclear cost entry is nonincreasing from a to b.
bool costs_ordered(const costkit::TechCostSet& a, const costkit::TechCostSet& b)
{
    for (const auto& [type, ca] : a.techs) {
        if (!b.contains(type)) {
            return false;
        }
        const auto& cb = b.at(type);
        if (cb.annualized_capex > ca.annualized_capex || cb.om > ca.om || cb.fuel > ca.fuel) {
            return false;
        }
    }
    return a.techs.size() == b.techs.size();
}

} // namespace

RunMatrix::RunMatrix(std::vector<ReadinessLevel> levels, std::vector<std::string> availability)
{
    std::set<std::string> ids;
    for (const auto level : levels) {
        for (const auto& a : availability) {
            auto run = make_run(level, a);
            if (!ids.insert(run.id).second) {
                throw ValidationError(fmt::format("duplicate run '{}' in matrix", run.id));
            }
            runs_.push_back(std::move(run));
        }
    }
}

RunMatrix RunMatrix::from_system(const sys::EnergySystem& system)
{
    return RunMatrix(system.matrix.levels, system.matrix.availability);
}

RunMatrix RunMatrix::only(const std::vector<std::string>& selectors) const
{
    std::set<std::string> wanted;
    for (const auto& sel : selectors) {
        for (const auto part : detail::split_csv_line(sel)) {
            const auto s = detail::trim(part);
            const auto colon = s.find(':');
            if (colon == std::string_view::npos || colon == 0 || colon + 1 == s.size()) {
                throw ValidationError(fmt::format("run selector '{}' is not level:availability", s));
            }
            const auto level = costkit::parse_readiness_level(s.substr(0, colon));
            wanted.insert(fmt::format("{}/{}", costkit::to_string(level), s.substr(colon + 1)));
        }
    }
    RunMatrix out;
    for (const auto& r : runs_) {
        if (wanted.count(r.id)) {
            out.runs_.push_back(r);
            wanted.erase(r.id);
        }
    }
    if (!wanted.empty()) {
        throw ValidationError(fmt::format("run selector matches no run: {}", *wanted.begin()));
    }
    return out;
}

void write_run_artifacts(const report::RunReport& r, const std::filesystem::path& dir, bool pretty)
{
    report::emit({r}, report::Format::CSV, dir / "report.csv", pretty);
    report::emit({r}, report::Format::JSON, dir / "report.json");
}

namespace {

struct Parent {
    std::string run;
    solver::Solution solution;
};

// A parent optimum that satisfies the child's tighter bounds is optimal for
// the child as well; verify_optimality on the child LP is the certificate.
std::optional<solver::Solution> certified_reuse(const lp::LPProblem& lp, const Parent* parent)
{
    if (parent == nullptr || parent->solution.status != solver::SolveStatus::Optimal ||
        parent->solution.primal.size() != lp.num_variables() || parent->solution.dual.size() != lp.num_rows()) {
        return std::nullopt;
    }
    // round-off outside the child's bounds is clamped; anything larger
    // fails the verification below
    auto sol = parent->solution;
    for (std::size_t j = 0; j < lp.num_variables(); ++j) {
        const auto& v = lp.variable(j);
        sol.primal[j] = std::clamp(sol.primal[j], v.lower, v.upper);
    }
    sol.objective = lp.objective(sol.primal);
    if (!solver::verify_optimality(lp, sol).ok()) {
        return std::nullopt;
    }
    return sol;
}

report::RunReport execute(const sys::EnergySystem& system, const costkit::CostBook& costs, const RunSpec& run,
                          const MatrixOptions& options, const Parent* parent, std::optional<Parent>* keep)
{
    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&start] {
        return fmt::format("{:.2f}", std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    };
    try {
        const auto scenario = sys::apply_scenario(system, run.spec, costs.at(run.spec.readiness));
        const auto model = lp_build::build_lp(scenario);
        detail::log("info", "run_built",
                    {{"run", run.id},
                     {"variables", std::to_string(model.lp.num_variables())},
                     {"rows", std::to_string(model.lp.num_rows())}});
        if (options.write_mps && options.out_dir) {
            lp::export_mps(model.lp, *options.out_dir / run.subdir / "model.mps");
        }
        auto reused = certified_reuse(model.lp, parent);
        const auto sol =
            reused ? *reused : solver::solve_backend(model.lp, options.backend, options.backend_options);
        if (sol.status != solver::SolveStatus::Optimal) {
            detail::log("warn", "run_done",
                        {{"run", run.id}, {"status", std::string(solver::to_string(sol.status))}, {"seconds", elapsed()}});
            return report::failed_report(scenario, run.spec, std::string(solver::to_string(sol.status)),
                                         "solver reported " + std::string(solver::to_string(sol.status)));
        }
        const auto verification = solver::verify_optimality(model.lp, sol);
        auto rep = report::make_report(scenario, run.spec, model, sol, verification);
        if (reused) {
            rep.message = "optimum of " + parent->run + " certified for this run";
        }
        if (keep != nullptr) {
            *keep = Parent{run.id, sol};
        }
        detail::log("info", "run_done",
                    {{"run", run.id},
                     {"status", rep.status},
                     {"backend", sol.backend},
                     {"reused", reused ? parent->run : std::string("-")},
                     {"cost", detail::format_double(rep.total_cost)},
                     {"seconds", elapsed()}});
        return rep;
    } catch (const std::exception& e) {
        detail::log("error", "run_failed", {{"run", run.id}, {"message", e.what()}, {"seconds", elapsed()}});
        return report::failed_report(system, run.spec, "Error", e.what());
    }
}

} // namespace

report::RunReport run_one(const sys::EnergySystem& system, const costkit::CostBook& costs, const RunSpec& run,
                          const MatrixOptions& options)
{
    return execute(system, costs, run, options, nullptr, nullptr);
}

std::vector<report::RunReport> run_matrix(const sys::EnergySystem& system, const costkit::CostBook& costs,
                                          const RunMatrix& matrix, const MatrixOptions& options)
{
    const auto& runs = matrix.runs();
    std::vector<report::RunReport> reports(runs.size());
    if (runs.empty()) {
        return reports;
    }
    std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    if (options.backend != "auto" && solver::BackendRegistry::instance().contains(options.backend) &&
        !solver::BackendRegistry::instance().get(options.backend).concurrent()) {
        workers = 1;
    }

    // "all" runs go first so their optima can be offered to the exclusion runs
    std::vector<std::size_t> first;
    std::vector<std::size_t> second;
    std::map<ReadinessLevel, std::size_t> parent_of;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        if (options.reuse_parent && runs[i].spec.excluded.empty() && !parent_of.count(runs[i].spec.readiness)) {
            parent_of[runs[i].spec.readiness] = i;
            first.push_back(i);
        } else {
            second.push_back(i);
        }
    }
    std::vector<std::optional<Parent>> parents(runs.size());

    auto execute_all = [&](const std::vector<std::size_t>& batch) {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            for (auto k = next.fetch_add(1); k < batch.size(); k = next.fetch_add(1)) {
                const auto i = batch[k];
                const Parent* parent = nullptr;
                if (const auto it = parent_of.find(runs[i].spec.readiness); it != parent_of.end() && it->second != i &&
                                                                           parents[it->second]) {
                    parent = &*parents[it->second];
                }
                const bool is_parent = parent_of.count(runs[i].spec.readiness) &&
                                       parent_of.at(runs[i].spec.readiness) == i;
                reports[i] = execute(system, costs, runs[i], options, parent, is_parent ? &parents[i] : nullptr);
                if (options.out_dir) {
                    write_run_artifacts(reports[i], *options.out_dir / runs[i].subdir, options.pretty);
                }
            }
        };
        const auto n = std::min(workers, batch.size());
        if (n <= 1) {
            work();
            return;
        }
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n; ++w) {
            pool.emplace_back(work);
        }
        for (auto& t : pool) {
            t.join();
        }
    };
    execute_all(first);
    execute_all(second);

    if (options.out_dir) {
        const auto& dir = *options.out_dir;
        report::emit(reports, report::Format::CSV, dir / "reports.csv", options.pretty);
        report::emit(reports, report::Format::JSON, dir / "reports.json");
        std::optional<Comparison> cmp;
        if (reports.size() >= 2) {
            cmp = compare_runs(reports, &costs);
            detail::write_text_file(dir / "comparison.csv", comparison_csv(*cmp));
        }
        detail::write_text_file(dir / "summary.csv", summary_csv(reports, cmp ? &*cmp : nullptr));
    }
    return reports;
}

bool Comparison::all_ok() const
{
    return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.status != "violated"; });
}

Comparison compare_runs(const std::vector<report::RunReport>& reports, const costkit::CostBook* costs)
{
    if (reports.size() < 2) {
        throw ValidationError("comparison needs at least two reports");
    }
    for (const auto& r : reports) {
        if (r.fingerprint != reports.front().fingerprint) {
            throw ValidationError(fmt::format("reports '{}' and '{}' come from different systems ({} vs {})",
                                              reports.front().run, r.run, reports.front().fingerprint,
                                              r.fingerprint));
        }
    }
    Comparison out;
    auto add_rows = [&out](const std::string& kind, const report::RunReport& ref, const report::RunReport& run) {
        auto row = [&](const std::string& metric, double a, double b) {
            out.rows.push_back({kind, ref.run, run.run, metric, a, b, b - a});
        };
        row("total_cost", ref.total_cost, run.total_cost);
        row("nuclear_capacity", nuclear_capacity(ref), nuclear_capacity(run));
        row("nuclear_share_electricity", ref.value("nuclear_share_electricity", "nuclear", "electricity"),
            run.value("nuclear_share_electricity", "nuclear", "electricity"));
        row("nuclear_share_heat", ref.value("nuclear_share_heat", "nuclear", "heat"),
            run.value("nuclear_share_heat", "nuclear", "heat"));
    };

    // exclusion: every run against the "all" run of its level (or the
    // first run of the level when "all" is absent)
    std::vector<std::string> levels;
    for (const auto& r : reports) {
        if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) {
            levels.push_back(r.level);
        }
    }
    for (const auto& level : levels) {
        const report::RunReport* base = nullptr;
        for (const auto& r : reports) {
            if (r.level == level && r.availability == "all") {
                base = &r;
                break;
            }
        }
        const bool has_all = base != nullptr;
        if (!base) {
            for (const auto& r : reports) {
                if (r.level == level) {
                    base = &r;
                    break;
                }
            }
        }
        for (const auto& r : reports) {
            if (r.level != level || &r == base) {
                continue;
            }
            add_rows("exclusion", *base, r);
            MonotonicityFlag f{"exclusion", base->run, r.run, "n/a"};
            if (has_all && base->optimal() && r.optimal()) {
                f.status = no_higher(base->total_cost, r.total_cost) ? "ok" : "violated";
            }
            out.flags.push_back(f);
        }
    }

    // readiness: same availability, consecutive levels
    static constexpr std::array<ReadinessLevel, 3> order{ReadinessLevel::FOAK, ReadinessLevel::NOAK_mean,
                                                         ReadinessLevel::NOAK_min};
    for (std::size_t k = 0; k + 1 < order.size(); ++k) {
        const auto hi = std::string(costkit::to_string(order[k]));
        const auto lo = std::string(costkit::to_string(order[k + 1]));
        bool ordered = false;
        if (costs && costs->levels.count(order[k]) && costs->levels.count(order[k + 1])) {
            ordered = costs_ordered(costs->at(order[k]), costs->at(order[k + 1]));
        }
        for (const auto& a : reports) {
            if (a.level != hi) continue;
            for (const auto& b : reports) {
                if (b.level != lo || b.availability != a.availability) continue;
                add_rows("readiness", a, b);
                MonotonicityFlag f{"readiness", a.run, b.run, "n/a"};
                if (ordered && a.optimal() && b.optimal()) {
                    f.status = no_higher(b.total_cost, a.total_cost) ? "ok" : "violated";
                }
                out.flags.push_back(f);
            }
        }
    }
    return out;
}

std::string comparison_csv(const Comparison& c)
{
    std::string out = "kind,reference,run,metric,reference_value,value,delta\n";
    for (const auto& r : c.rows) {
        out += fmt::format("{},{},{},{},{},{},{}\n", r.kind, r.reference, r.run, r.metric,
                           detail::format_double(r.reference_value), detail::format_double(r.value),
                           detail::format_double(r.delta));
    }
    out += "\nkind,reference,run,flag\n";
    for (const auto& f : c.flags) {
        out += fmt::format("{},{},{},{}\n", f.kind, f.reference, f.run, f.status);
    }
    return out;
}

std::string summary_csv(const std::vector<report::RunReport>& reports, const Comparison* comparison)
{
    std::string out = "run,level,availability,status,total_cost,nuclear_capacity,nuclear_share_electricity,"
                      "nuclear_share_heat,monotone\n";
    for (const auto& r : reports) {
        std::string flag = "n/a";
        if (comparison) {
            bool any = false;
            bool violated = false;
            for (const auto& f : comparison->flags) {
                if ((f.run == r.run || f.reference == r.run) && f.status != "n/a") {
                    any = true;
                    violated = violated || f.status == "violated";
                }
            }
            if (any) {
                flag = violated ? "violated" : "ok";
            }
        }
        out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.run, r.level, r.availability, r.status,
                           detail::format_double(r.total_cost), detail::format_double(nuclear_capacity(r)),
                           detail::format_double(r.value("nuclear_share_electricity", "nuclear", "electricity")),
                           detail::format_double(r.value("nuclear_share_heat", "nuclear", "heat")), flag);
    }
    return out;
}

} // namespace atomgrid::scenarios
