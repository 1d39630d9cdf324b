#pragma once

// Reportable quantities of a solved run and their CSV/JSON emission.
//
// Units: TWh for energy, GW for capacity (GWh for storage energy), million
// EUR-2020 per year for cost, fractions for shares.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomgrid/lp_build.hpp"
#include "atomgrid/solver.hpp"
#include "atomgrid/sysmodel.hpp"

namespace atomgrid::report {

inline constexpr int kSchemaVersion = 1;

/// One long-format data point.
struct Metric {
    std::string metric;
    std::string technology;
    std::string carrier;
    double value = 0.0;
    std::string unit;

    friend bool operator==(const Metric&, const Metric&) = default;
};

struct RunReport {
    std::string run;          ///< "<level>/<availability>"
    std::string level;
    std::string availability;
    std::string status;       ///< Optimal, Infeasible, Unbounded or Error
    std::string message;      ///< failure detail, empty on success
    std::string fingerprint;  ///< system fingerprint the run was built from
    std::string backend;
    double total_cost = 0.0;  ///< MEUR-2020/yr
    std::vector<Metric> metrics;

    bool optimal() const { return status == "Optimal"; }
    /// Value of a metric row, 0 when absent.
    double value(std::string_view metric, std::string_view technology = "", std::string_view carrier = "") const;
    /// Sum of every row of a metric, optionally restricted to one carrier.
    double sum(std::string_view metric, std::optional<std::string_view> carrier = std::nullopt) const;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Nuclear share of electricity and of pooled heat, per reactor type.
struct NuclearShares {
    std::map<std::string, double> electricity; ///< reactor id -> fraction
    std::map<std::string, double> heat;
    double electricity_total = 0.0;
    double heat_total = 0.0;
    bool electricity_undefined = false; ///< zero total electricity generation
    bool heat_undefined = false;        ///< zero total heat generation
};

/// Annual generation (TWh) of every conversion and nuclear technology per
/// output carrier, read from the solution vector.
std::map<std::pair<std::string, std::string>, double> generation_twh(const sys::EnergySystem& system,
                                                                     const lp_build::BuiltModel& model,
                                                                     const std::vector<double>& x);

/// Share = nuclear generation of the carrier group / total generation of the
/// group; heat pools district heat and the three process tiers.
NuclearShares nuclear_shares(const solver::Solution& solution, const sys::EnergySystem& system,
                             const lp_build::BuiltModel& model);

/// Builds the report for an optimal solution of `model` (built from the
/// scenario-applied `system`).
RunReport make_report(const sys::EnergySystem& system, const sys::ScenarioSpec& spec,
                      const lp_build::BuiltModel& model, const solver::Solution& solution,
                      const solver::VerificationReport& verification);

/// Report of a run that did not produce an optimal solution.
RunReport failed_report(const sys::EnergySystem& system, const sys::ScenarioSpec& spec, std::string status,
                        std::string message);

std::string run_id(const sys::ScenarioSpec& spec);

struct MixRow {
    std::string run;
    std::string carrier;
    std::string technology;
    double energy_twh = 0.0;
    double share = 0.0;
};

/// Generation mix of one carrier (or the pooled "heat" group) per run.
std::vector<MixRow> mix_table(const std::vector<RunReport>& reports, std::string_view carrier);

enum class Format { CSV, JSON };

/// Long-format CSV (`run,level,availability,metric,technology,carrier,value,unit`).
/// `pretty` rounds values to two decimals; the default keeps full precision.
std::string to_csv(const std::vector<RunReport>& reports, bool pretty = false);
nlohmann::json to_json(const std::vector<RunReport>& reports);
std::vector<RunReport> reports_from_json(const nlohmann::json& j);

/// Writes the reports; throws ValidationError on an empty list.
void emit(const std::vector<RunReport>& reports, Format format, const std::filesystem::path& path,
          bool pretty = false);
std::vector<RunReport> read_reports_json(const std::filesystem::path& path);

} // namespace atomgrid::report
