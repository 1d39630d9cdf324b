#include "atomgrid/report.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"

namespace atomgrid::report {

using nlohmann::json;

namespace {

constexpr double kGwhToTwh = 1e-3;

bool is_heat(std::string_view carrier)
{
    return std::find(sys::kHeatCarriers.begin(), sys::kHeatCarriers.end(), carrier) != sys::kHeatCarriers.end();
}

/// Annual total of a per-block series of columns, in GWh.
double annual(const sys::TimeGrid& grid, const std::vector<std::size_t>& cols, const std::vector<double>& x)
{
    double s = 0.0;
    for (std::size_t b = 0; b < cols.size(); ++b) {
        s += grid.scale(b) * x[cols[b]];
    }
    return s;
}

double share(double part, double total)
{
    return total > 0.0 ? std::clamp(part / total, 0.0, 1.0) : 0.0;
}

} // namespace

double RunReport::value(std::string_view metric, std::string_view technology, std::string_view carrier) const
{
    for (const auto& m : metrics) {
        if (m.metric == metric && m.technology == technology && m.carrier == carrier) {
            return m.value;
        }
    }
    return 0.0;
}

double RunReport::sum(std::string_view metric, std::optional<std::string_view> carrier) const
{
    double s = 0.0;
    for (const auto& m : metrics) {
        if (m.metric == metric && (!carrier || m.carrier == *carrier)) {
            s += m.value;
        }
    }
    return s;
}

std::string run_id(const sys::ScenarioSpec& spec)
{
    return fmt::format("{}/{}", costkit::to_string(spec.readiness), spec.availability);
}

std::map<std::pair<std::string, std::string>, double> generation_twh(const sys::EnergySystem& system,
                                                                     const lp_build::BuiltModel& model,
                                                                     const std::vector<double>& x)
{
    std::map<std::pair<std::string, std::string>, double> out;
    const auto& grid = system.grid;
    for (std::size_t t = 0; t < system.technologies.size(); ++t) {
        const auto& tech = system.technologies[t];
        double activity = 0.0;
        for (const auto& series : model.conversion[t].act) {
            activity += annual(grid, series, x);
        }
        for (const auto& [carrier, eff] : tech.outputs) {
            out[{tech.id, carrier}] += eff * activity * kGwhToTwh;
        }
    }
    for (std::size_t t = 0; t < system.nuclear.size(); ++t) {
        const auto& idx = model.nuclear[t];
        for (std::size_t k = 0; k < idx.outputs.size(); ++k) {
            double s = 0.0;
            for (const auto& per_region : idx.gen) {
                for (std::size_t b = 0; b < per_region.size(); ++b) {
                    s += grid.scale(b) * x[per_region[b][k]];
                }
            }
            out[{system.nuclear[t].id(), idx.outputs[k]}] += s * kGwhToTwh;
        }
    }
    return out;
}

NuclearShares nuclear_shares(const solver::Solution& solution, const sys::EnergySystem& system,
                             const lp_build::BuiltModel& model)
{
    if (solution.status != solver::SolveStatus::Optimal) {
        throw ValidationError("nuclear shares need an optimal solution");
    }
    const auto gen = generation_twh(system, model, solution.primal);
    double elec_total = 0.0;
    double heat_total = 0.0;
    std::map<std::string, double> elec_nuclear;
    std::map<std::string, double> heat_nuclear;
    std::set<std::string> reactors;
    for (const auto& n : system.nuclear) {
        reactors.insert(n.id());
    }
    for (const auto& [key, twh] : gen) {
        const auto& [tech, carrier] = key;
        const bool nuclear = reactors.count(tech) != 0;
        if (carrier == "electricity") {
            elec_total += twh;
            if (nuclear) elec_nuclear[tech] += twh;
        } else if (is_heat(carrier)) {
            heat_total += twh;
            if (nuclear) heat_nuclear[tech] += twh;
        }
    }
    NuclearShares s;
    s.electricity_undefined = !(elec_total > 0.0);
    s.heat_undefined = !(heat_total > 0.0);
    double e_sum = 0.0;
    double h_sum = 0.0;
    for (const auto& n : system.nuclear) {
        const auto id = n.id();
        s.electricity[id] = share(elec_nuclear[id], elec_total);
        s.heat[id] = share(heat_nuclear[id], heat_total);
        e_sum += elec_nuclear[id];
        h_sum += heat_nuclear[id];
    }
    s.electricity_total = share(e_sum, elec_total);
    s.heat_total = share(h_sum, heat_total);
    return s;
}

RunReport failed_report(const sys::EnergySystem& system, const sys::ScenarioSpec& spec, std::string status,
                        std::string message)
{
    RunReport r;
    r.run = run_id(spec);
    r.level = std::string(costkit::to_string(spec.readiness));
    r.availability = spec.availability;
    r.status = std::move(status);
    r.message = std::move(message);
    r.fingerprint = system.fingerprint;
    return r;
}

RunReport make_report(const sys::EnergySystem& system, const sys::ScenarioSpec& spec,
                      const lp_build::BuiltModel& model, const solver::Solution& solution,
                      const solver::VerificationReport& verification)
{
    if (solution.status != solver::SolveStatus::Optimal) {
        return failed_report(system, spec, std::string(solver::to_string(solution.status)), "");
    }
    const auto& x = solution.primal;
    const auto& grid = system.grid;
    RunReport r = failed_report(system, spec, "Optimal", "");
    r.backend = solution.backend;
    r.total_cost = model.lp.objective(x);
    auto add = [&r](std::string metric, std::string tech, std::string carrier, double value, std::string unit) {
        r.metrics.push_back({std::move(metric), std::move(tech), std::move(carrier), value, std::move(unit)});
    };
    add("total_cost", "", "", r.total_cost, "MEUR2020/yr");

    // capacities
    for (std::size_t t = 0; t < system.technologies.size(); ++t) {
        double cap = 0.0;
        for (const auto col : model.conversion[t].cap) {
            cap += x[col];
        }
        add("capacity", system.technologies[t].id, "", cap, "GW");
    }
    for (std::size_t t = 0; t < system.nuclear.size(); ++t) {
        const auto& n = system.nuclear[t];
        const auto& idx = model.nuclear[t];
        double cap = 0.0;
        double elec_primary = 0.0;
        double heat_primary = 0.0;
        for (std::size_t reg = 0; reg < idx.cap.size(); ++reg) {
            const double c = x[idx.cap[reg]];
            double e = 0.0;
            double h = 0.0;
            for (std::size_t b = 0; b < idx.gen[reg].size(); ++b) {
                const auto& g = idx.gen[reg][b];
                e += grid.scale(b) * x[g[0]];
                for (std::size_t k = 1; k < g.size(); ++k) {
                    h += grid.scale(b) * x[g[k]];
                }
            }
            cap += c;
            // electricity-primary when electric output covers the heat output in electric terms
            (e >= h / n.heat_bonus ? elec_primary : heat_primary) += c;
        }
        add("capacity", n.id(), "", cap, "GW");
        add("capacity_electricity_primary", n.id(), "", elec_primary, "GW");
        add("capacity_heat_primary", n.id(), "", heat_primary, "GW");
    }
    for (std::size_t s = 0; s < system.storage.size(); ++s) {
        const auto& st = system.storage[s];
        double power = 0.0;
        double energy = 0.0;
        for (std::size_t reg = 0; reg < system.regions.size(); ++reg) {
            power += x[model.storage[s].power_cap[reg]];
            energy += x[model.storage[s].energy_cap[reg]];
        }
        add("storage_power", st.id, st.carrier, power, "GW");
        add("storage_energy", st.id, st.carrier, energy, "GWh");
    }

    // energy
    const auto gen = generation_twh(system, model, x);
    auto emit_generation = [&](const std::string& tech) {
        for (const auto& [key, twh] : gen) {
            if (key.first == tech) {
                add("generation", tech, key.second, twh, "TWh");
            }
        }
    };
    for (const auto& t : system.technologies) {
        emit_generation(t.id);
    }
    for (const auto& n : system.nuclear) {
        emit_generation(n.id());
    }
    for (std::size_t t = 0; t < system.technologies.size(); ++t) {
        const auto& tech = system.technologies[t];
        double activity = 0.0;
        for (const auto& series : model.conversion[t].act) {
            activity += annual(grid, series, x);
        }
        for (const auto& [carrier, share_in] : tech.inputs) {
            add("consumption", tech.id, carrier, share_in * activity * kGwhToTwh, "TWh");
        }
    }
    for (std::size_t k = 0; k < system.limits.imports.size(); ++k) {
        double s = 0.0;
        for (const auto& series : model.imports[k].amount) {
            s += annual(grid, series, x);
        }
        add("import", system.limits.imports[k].id, system.limits.imports[k].carrier, s * kGwhToTwh, "TWh");
    }
    for (std::size_t c = 0; c < system.transmission.size(); ++c) {
        const auto& corr = system.transmission[c];
        double expansion = 0.0;
        for (const auto col : model.corridors[c].tranche) {
            expansion += x[col];
        }
        add("transmission_expansion", corr.id, corr.carrier(), expansion, "GW");
        const double sent = annual(grid, model.corridors[c].flow[0], x) + annual(grid, model.corridors[c].flow[1], x);
        add("transmission_flow", corr.id, corr.carrier(), sent * kGwhToTwh, "TWh");
    }
    std::map<std::string, double> demand;
    for (const auto& d : system.demands) {
        double s = 0.0;
        for (std::size_t b = 0; b < d.values.size(); ++b) {
            s += grid.scale(b) * d.values[b];
        }
        demand[d.carrier] += s * kGwhToTwh;
    }
    for (const auto& c : system.carriers) {
        if (demand.count(c.id)) {
            add("demand", "", c.id, demand[c.id], "TWh");
        }
    }

    // shares
    const auto shares = nuclear_shares(solution, system, model);
    for (const auto& n : system.nuclear) {
        add("nuclear_share_electricity", n.id(), "electricity", shares.electricity.at(n.id()), "fraction");
    }
    add("nuclear_share_electricity", "nuclear", "electricity", shares.electricity_total, "fraction");
    for (const auto& n : system.nuclear) {
        add("nuclear_share_heat", n.id(), "heat", shares.heat.at(n.id()), "fraction");
    }
    add("nuclear_share_heat", "nuclear", "heat", shares.heat_total, "fraction");
    add("share_undefined", "nuclear", "electricity", shares.electricity_undefined ? 1.0 : 0.0, "flag");
    add("share_undefined", "nuclear", "heat", shares.heat_undefined ? 1.0 : 0.0, "flag");

    // diagnostics
    const auto act = model.lp.activities(x);
    double balance = 0.0;
    for (const auto& per_region : model.balance_rows) {
        for (const auto& per_carrier : per_region) {
            for (const auto row : per_carrier) {
                if (row != lp_build::kNone) {
                    balance = std::max(balance, model.lp.row(row).rhs - act[row]);
                }
            }
        }
    }
    double closure = 0.0;
    for (const auto& st : model.storage) {
        for (const auto& rows : st.level_rows) {
            for (const auto row : rows) {
                closure = std::max(closure, std::abs(act[row] - model.lp.row(row).rhs));
            }
        }
    }
    add("balance_residual", "", "", balance, "GWh");
    add("storage_closure_residual", "", "", closure, "GWh");
    add("primal_residual", "", "", verification.primal_residual, "abs");
    add("duality_gap", "", "", verification.duality_gap, "rel");
    return r;
}

std::vector<MixRow> mix_table(const std::vector<RunReport>& reports, std::string_view carrier)
{
    std::vector<MixRow> rows;
    const bool pooled = carrier == "heat";
    for (const auto& r : reports) {
        std::map<std::string, double> by_tech;
        std::vector<std::string> order;
        for (const auto& m : r.metrics) {
            if (m.metric != "generation") continue;
            if (pooled ? !is_heat(m.carrier) : m.carrier != carrier) continue;
            if (!(m.value > 0.0)) continue;
            if (!by_tech.count(m.technology)) order.push_back(m.technology);
            by_tech[m.technology] += m.value;
        }
        double total = 0.0;
        for (const auto& t : order) {
            total += by_tech[t];
        }
        for (const auto& t : order) {
            rows.push_back({r.run, std::string(carrier), t, by_tech[t], by_tech[t] / total});
        }
    }
    return rows;
}

std::string to_csv(const std::vector<RunReport>& reports, bool pretty)
{
    std::string out = "run,level,availability,metric,technology,carrier,value,unit\n";
    auto value = [pretty](double v) {
        return pretty ? fmt::format("{:.2f}", v) : detail::format_double(v);
    };
    for (const auto& r : reports) {
        out += fmt::format("{},{},{},status,{},,{},flag\n", r.run, r.level, r.availability, r.status,
                           r.optimal() ? 1 : 0);
        for (const auto& m : r.metrics) {
            out += fmt::format("{},{},{},{},{},{},{},{}\n", r.run, r.level, r.availability, m.metric, m.technology,
                               m.carrier, value(m.value), m.unit);
        }
    }
    return out;
}

json to_json(const std::vector<RunReport>& reports)
{
    json runs = json::array();
    for (const auto& r : reports) {
        json metrics = json::array();
        for (const auto& m : r.metrics) {
            metrics.push_back({{"metric", m.metric},
                               {"technology", m.technology},
                               {"carrier", m.carrier},
                               {"value", m.value},
                               {"unit", m.unit}});
        }
        runs.push_back({{"run", r.run},
                        {"level", r.level},
                        {"availability", r.availability},
                        {"status", r.status},
                        {"message", r.message},
                        {"fingerprint", r.fingerprint},
                        {"backend", r.backend},
                        {"total_cost", r.total_cost},
                        {"metrics", std::move(metrics)}});
    }
    return {{"schema_version", kSchemaVersion}, {"runs", std::move(runs)}};
}

std::vector<RunReport> reports_from_json(const json& j)
{
    try {
        const auto version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion) {
            throw ValidationError(fmt::format("unsupported report schema_version {}", version));
        }
        std::vector<RunReport> out;
        for (const auto& r : j.at("runs")) {
            RunReport rep;
            rep.run = r.at("run").get<std::string>();
            rep.level = r.at("level").get<std::string>();
            rep.availability = r.at("availability").get<std::string>();
            rep.status = r.at("status").get<std::string>();
            rep.message = r.value("message", "");
            rep.fingerprint = r.value("fingerprint", "");
            rep.backend = r.value("backend", "");
            rep.total_cost = r.at("total_cost").get<double>();
            for (const auto& m : r.at("metrics")) {
                rep.metrics.push_back({m.at("metric").get<std::string>(), m.at("technology").get<std::string>(),
                                       m.at("carrier").get<std::string>(), m.at("value").get<double>(),
                                       m.at("unit").get<std::string>()});
            }
            out.push_back(std::move(rep));
        }
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("malformed report JSON: {}", e.what()));
    }
}

void emit(const std::vector<RunReport>& reports, Format format, const std::filesystem::path& path, bool pretty)
{
    if (reports.empty()) {
        throw ValidationError("no reports to emit");
    }
    if (format == Format::CSV) {
        detail::write_text_file(path, to_csv(reports, pretty));
    } else {
        detail::write_text_file(path, to_json(reports).dump(2) + "\n");
    }
}

std::vector<RunReport> read_reports_json(const std::filesystem::path& path)
{
    json j;
    try {
        j = json::parse(detail::read_text_file(path));
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return reports_from_json(j);
}

} // namespace atomgrid::report
