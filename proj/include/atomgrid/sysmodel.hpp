#pragma once

// Structured description of a multi-carrier energy system: regions, carriers,
// conversion/nuclear/storage technologies, transmission, demands and limits.

#include <cstddef>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "atomgrid/costkit.hpp"

namespace atomgrid::sys {

using costkit::ReactorType;
using costkit::ReadinessLevel;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Carrier ids known to the model.
inline constexpr std::array<std::string_view, 10> kCarrierIds = {
    "electricity",       "districtHeat",   "processHeat_low", "processHeat_medium",
    "processHeat_high",  "hydrogen",       "syntheticMethane", "methanol",
    "biomass",           "spaceHeat"};

/// Carriers pooled as "heat" in nuclear share reporting.
inline constexpr std::array<std::string_view, 4> kHeatCarriers = {
    "districtHeat", "processHeat_low", "processHeat_medium", "processHeat_high"};

struct Carrier {
    std::string id;
    bool transportable = false;
    /// Primary carriers have no balance; consumption draws on a resource limit.
    bool primary = false;
};

struct Region {
    std::string id;
    std::string zone;
    std::string cluster;
};

struct TimeGrid {
    double block_length_h = 2.0;
    std::size_t n_blocks = 4380;
    double year_hours = 8760.0;
    std::vector<double> weights; ///< represented hours per block

    static TimeGrid uniform(double block_length_h, std::size_t n_blocks, double year_hours = 8760.0);

    double horizon_hours() const { return block_length_h * static_cast<double>(n_blocks); }
    /// Multiplier from block energy to its annual contribution.
    double scale(std::size_t block) const { return weights[block] / block_length_h; }
    void validate() const;
};

enum class ProfileMode { Mean, Sum };

/// Block-averages (mean mode) or block-sums (sum mode) an hourly series.
std::vector<double> aggregate_profile(std::span<const double> hourly, const TimeGrid& grid,
                                      ProfileMode mode);

/// Flat value or a named profile, optionally differing by region.
struct Availability {
    using Source = std::variant<double, std::string>;
    Source fallback = 1.0;
    std::map<std::string, Source> per_region;

    const Source& for_region(const std::string& region) const;
};

struct ConversionTech {
    std::string id;
    std::map<std::string, double> inputs;  ///< carrier -> consumption per unit activity
    std::map<std::string, double> outputs; ///< carrier -> output per unit activity
    double annualized_capex = 0.0;         ///< EUR/kW/yr (= MEUR/GW/yr)
    double om_var = 0.0;                   ///< EUR/MWh of activity
    double fuel = 0.0;                     ///< EUR/MWh of activity
    Availability availability;
    std::map<std::string, double> potential_max; ///< region -> GW
    std::optional<double> potential_total_max;   ///< GW summed over regions
};

/// Cost slice injected from a TechCostSet (EUR-2020 unless noted).
struct NuclearCost {
    double occ_usd2019 = 0.0;
    double annualized_capex = 0.0; ///< EUR/kW/yr
    double om = 0.0;               ///< EUR/MWh of any output
    double fuel = 0.0;             ///< EUR/MWh of reactor load (electric equivalent)
};

struct NuclearTech {
    ReactorType type = ReactorType::LWR;
    std::vector<std::string> heat_outputs;
    double heat_bonus = 1.2;
    double capacity_factor = 0.9;
    std::optional<NuclearCost> cost;
    std::map<std::string, double> potential_max; ///< region -> GW(e)
    bool excluded = false;

    std::string id() const { return std::string(costkit::to_string(type)); }
};

/// Reactor-to-heat-carrier mapping used when a config omits heat outputs.
std::vector<std::string> default_heat_outputs(ReactorType type);

struct StorageTech {
    std::string id;
    std::string carrier;
    double charge_efficiency = 1.0;
    double discharge_efficiency = 1.0;
    double energy_capex = 0.0; ///< MEUR/GWh/yr
    double power_capex = 0.0;  ///< MEUR/GW/yr
    double self_discharge = 0.0; ///< fraction lost per block
    std::map<std::string, double> potential_energy_max; ///< region -> GWh
    std::map<std::string, double> potential_power_max;  ///< region -> GW
};

enum class CorridorKind { HVAC, HVDC, H2Pipeline };

std::string_view to_string(CorridorKind k);

struct Tranche {
    double limit_gw = 0.0;
    double capex_per_gw = 0.0; ///< MEUR/GW overnight
};

struct TransmissionCorridor {
    std::string id;
    std::string from;
    std::string to;
    CorridorKind kind = CorridorKind::HVAC;
    double existing_gw = 0.0;
    std::vector<Tranche> tranches;
    double length_km = 0.0;
    double loss_per_1000km = 0.0;

    std::string carrier() const;
    double loss() const { return loss_per_1000km * length_km / 1000.0; }
};

struct DemandSeries {
    std::string region;
    std::string carrier;
    std::vector<double> values; ///< GWh per block
};

struct ImportRoute {
    std::string id;
    std::string carrier;
    double price = 0.0; ///< EUR-2020/MWh
    std::optional<double> max_twh;
    std::vector<std::string> regions; ///< empty = every region
};

struct SystemLimits {
    std::optional<double> biomass_total_max_twh;
    std::vector<ImportRoute> imports;
};

/// Readiness levels and availability sets a matrix run covers.
struct MatrixConfig {
    std::vector<ReadinessLevel> levels{costkit::kReadinessLevels.begin(),
                                       costkit::kReadinessLevels.end()};
    std::vector<std::string> availability{"all", "noLWR", "noSMR", "noSFR", "noHTR"};
};

struct EnergySystem {
    std::string name;
    TimeGrid grid;
    costkit::FinancingTerms network_finance{1, 0.10, 40, 1.0};
    std::vector<Region> regions;
    std::vector<Carrier> carriers;
    std::vector<ConversionTech> technologies;
    std::vector<NuclearTech> nuclear;
    std::vector<StorageTech> storage;
    std::vector<TransmissionCorridor> transmission;
    std::vector<DemandSeries> demands;
    SystemLimits limits;
    std::map<std::string, std::vector<double>> profiles; ///< aggregated to the grid
    MatrixConfig matrix;
    std::string fingerprint; ///< stable hash of the loaded configuration

    const Carrier* find_carrier(std::string_view id) const;
    const Region* find_region(std::string_view id) const;
    std::size_t region_index(std::string_view id) const;

    /// Availability of a conversion tech in a region and block.
    double availability(const ConversionTech& tech, const std::string& region, std::size_t block) const;

    /// Structural checks; throws ValidationError naming the offending entity.
    void validate() const;
};

EnergySystem load_system(const std::filesystem::path& config_path);

struct ScenarioSpec {
    ReadinessLevel readiness = ReadinessLevel::FOAK;
    std::set<ReactorType> excluded;
    std::string availability = "all";
};

/// Parses an availability name: "all" or "no<TYPE>" (e.g. "noHTR").
ScenarioSpec scenario_from_names(ReadinessLevel level, std::string_view availability);

/// Injects the readiness level's costs (converted to EUR-2020) into every
/// nuclear technology and zeroes the potential of excluded ones.
EnergySystem apply_scenario(const EnergySystem& system, const ScenarioSpec& spec,
                            const costkit::TechCostSet& costs);

} // namespace atomgrid::sys
