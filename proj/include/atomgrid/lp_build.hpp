#pragma once

// Translation of an EnergySystem into a linear program.
//
// Units: capacity in GW, energy in GWh per block, money in MEUR-2020 per
// year. EUR/kW/yr equals MEUR/GW/yr; EUR/MWh times 1e-3 gives MEUR/GWh.
// Operating quantities are weighted by weight_b / block_length_h so the
// objective is an annual total.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "atomgrid/lp.hpp"
#include "atomgrid/sysmodel.hpp"

namespace atomgrid::lp_build {

inline constexpr std::size_t kNone = static_cast<std::size_t>(-1);

/// Column indices of a conversion technology.
struct ConversionIndex {
    std::vector<std::size_t> cap;              ///< per region
    std::vector<std::vector<std::size_t>> act; ///< [region][block], GWh of activity
};

/// Column indices of a nuclear technology. Output 0 is electricity, the
/// rest follow NuclearTech::heat_outputs.
struct NuclearIndex {
    std::vector<std::string> outputs;
    std::vector<std::size_t> cap;                           ///< per region, GW(e)
    std::vector<std::vector<std::vector<std::size_t>>> gen; ///< [region][block][output]
};

struct StorageIndex {
    std::vector<std::size_t> energy_cap; ///< per region, GWh
    std::vector<std::size_t> power_cap;  ///< per region, GW
    std::vector<std::vector<std::size_t>> charge;
    std::vector<std::vector<std::size_t>> discharge;
    std::vector<std::vector<std::size_t>> level;
    std::vector<std::vector<std::size_t>> level_rows; ///< [region][block] recursion rows
};

struct CorridorIndex {
    std::vector<std::size_t> tranche;            ///< GW invested per tranche
    std::vector<std::vector<std::size_t>> flow;  ///< [0 = from->to, 1 = to->from][block], GWh sent
};

struct ImportIndex {
    std::vector<std::size_t> regions;              ///< region indices served
    std::vector<std::vector<std::size_t>> amount;  ///< [served region][block], GWh
};

/// An LP together with the maps needed to read a solution back.
struct BuiltModel {
    lp::LPProblem lp;
    std::vector<ConversionIndex> conversion; ///< parallel to system.technologies
    std::vector<NuclearIndex> nuclear;       ///< parallel to system.nuclear
    std::vector<StorageIndex> storage;       ///< parallel to system.storage
    std::vector<CorridorIndex> corridors;    ///< parallel to system.transmission
    std::vector<ImportIndex> imports;        ///< parallel to system.limits.imports
    /// Balanced carriers in row order, and rows [region][carrier][block].
    std::vector<std::string> balance_carriers;
    std::vector<std::vector<std::vector<std::size_t>>> balance_rows;
    std::size_t biomass_row = kNone;
};

/// Single-use builder. Call the steps in order or use build_lp().
class LpBuilder {
public:
    explicit LpBuilder(const sys::EnergySystem& system);

    /// Declares every column (capacities, activities, storage, flows,
    /// tranches, imports) with its potential bounds.
    void declare_variables();
    /// Per (region, carrier, block): supply - use >= demand, in GWh.
    void add_balance_constraints();
    /// Activity of each conversion technology bounded by availability x capacity.
    void add_conversion_capacity_constraints();
    /// e_b + sum(h_b) / heat_bonus <= CF x cap x block hours.
    void add_nuclear_cogeneration_constraints();
    /// Cyclic level recursion plus power and energy capacity rows.
    void add_storage_constraints();
    /// Flow per direction and block bounded by existing plus invested capacity.
    void add_transmission_expansion();
    /// Regional totals, biomass budget and import caps.
    void add_resource_limits();
    /// Annual cost. Throws ValidationError naming an investable nuclear
    /// technology without cost data.
    void build_objective();

    BuiltModel take();

private:
    void add_balance_term(std::size_t region, const std::string& carrier, std::size_t block,
                          std::size_t col, double coef);
    std::size_t carrier_slot(const std::string& carrier) const;

    const sys::EnergySystem& sys_;
    BuiltModel model_;
    std::vector<std::vector<std::vector<std::vector<lp::Term>>>> balance_terms_;
    bool declared_ = false;
};

/// Runs every builder step.
BuiltModel build_lp(const sys::EnergySystem& system);

/// Annualization factor for transmission tranches under the system's
/// network finance terms.
double network_annualization(const sys::EnergySystem& system);

} // namespace atomgrid::lp_build
