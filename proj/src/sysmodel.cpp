#include "atomgrid/sysmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>
#include <json.hpp>

#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"

namespace atomgrid::sys {

using nlohmann::json;

TimeGrid TimeGrid::uniform(double block_length_h, std::size_t n_blocks, double year_hours)
{
    TimeGrid g;
    g.block_length_h = block_length_h;
    g.n_blocks = n_blocks;
    g.year_hours = year_hours;
    g.weights.assign(n_blocks, n_blocks ? year_hours / static_cast<double>(n_blocks) : 0.0);
    return g;
}

void TimeGrid::validate() const
{
    if (!(block_length_h > 0.0)) {
        throw ValidationError("grid: block_length_h must be positive");
    }
    if (n_blocks == 0) {
        throw ValidationError("grid: n_blocks must be at least 1");
    }
    if (weights.size() != n_blocks) {
        throw ValidationError(
            fmt::format("grid: {} weights for {} blocks", weights.size(), n_blocks));
    }
    double total = 0.0;
    for (const double w : weights) {
        if (!(w > 0.0)) {
            throw ValidationError("grid: block weights must be positive");
        }
        total += w;
    }
    if (std::abs(total - year_hours) > 1e-9 * year_hours) {
        throw ValidationError(
            fmt::format("grid: block weights sum to {} h, expected {} h", total, year_hours));
    }
}

std::vector<double> aggregate_profile(std::span<const double> hourly, const TimeGrid& grid,
                                      ProfileMode mode)
{
    const double bl = grid.block_length_h;
    if (bl < 1.0 || bl != std::floor(bl)) {
        throw ValidationError(
            fmt::format("cannot aggregate hourly data to {}-hour blocks", bl));
    }
    const auto len = static_cast<std::size_t>(bl);
    if (hourly.empty() || hourly.size() % len != 0) {
        throw ValidationError(fmt::format(
            "{} hourly values are not divisible into {}-hour blocks", hourly.size(), len));
    }
    std::vector<double> out(hourly.size() / len, 0.0);
    for (std::size_t b = 0; b < out.size(); ++b) {
        double sum = 0.0;
        for (std::size_t h = 0; h < len; ++h) {
            sum += hourly[b * len + h];
        }
        out[b] = mode == ProfileMode::Sum ? sum : sum / bl;
    }
    return out;
}

const Availability::Source& Availability::for_region(const std::string& region) const
{
    const auto it = per_region.find(region);
    return it == per_region.end() ? fallback : it->second;
}

std::vector<std::string> default_heat_outputs(ReactorType type)
{
    switch (type) {
    case ReactorType::LWR:
        return {"districtHeat"};
    case ReactorType::SMR:
        return {"processHeat_low"};
    case ReactorType::SFR:
        return {"processHeat_medium"};
    case ReactorType::HTR:
        return {"processHeat_medium", "processHeat_high"};
    default:
        throw ValidationError(
            fmt::format("reactor type {} is not part of the system model", costkit::to_string(type)));
    }
}

std::string_view to_string(CorridorKind k)
{
    switch (k) {
    case CorridorKind::HVAC:
        return "HVAC";
    case CorridorKind::HVDC:
        return "HVDC";
    case CorridorKind::H2Pipeline:
        return "H2pipeline";
    }
    return "?";
}

std::string TransmissionCorridor::carrier() const
{
    return kind == CorridorKind::H2Pipeline ? "hydrogen" : "electricity";
}

const Carrier* EnergySystem::find_carrier(std::string_view id) const
{
    for (const auto& c : carriers) {
        if (c.id == id) {
            return &c;
        }
    }
    return nullptr;
}

const Region* EnergySystem::find_region(std::string_view id) const
{
    for (const auto& r : regions) {
        if (r.id == id) {
            return &r;
        }
    }
    return nullptr;
}

std::size_t EnergySystem::region_index(std::string_view id) const
{
    for (std::size_t i = 0; i < regions.size(); ++i) {
        if (regions[i].id == id) {
            return i;
        }
    }
    throw ValidationError(fmt::format("unknown region '{}'", id));
}

double EnergySystem::availability(const ConversionTech& tech, const std::string& region,
                                  std::size_t block) const
{
    const auto& src = tech.availability.for_region(region);
    if (const auto* flat = std::get_if<double>(&src)) {
        return *flat;
    }
    const auto& name = std::get<std::string>(src);
    const auto it = profiles.find(name);
    if (it == profiles.end()) {
        throw ValidationError(fmt::format("technology '{}': unknown profile '{}'", tech.id, name));
    }
    return it->second.at(block);
}

namespace {

void check_identifier(const std::string& id, std::string_view what)
{
    if (id.empty()) {
        throw ValidationError(fmt::format("{}: empty id", what));
    }
    for (const char c : id) {
        if (c == ' ' || c == '\t' || c == ',' || c == '[' || c == ']' || c == '"') {
            throw ValidationError(
                fmt::format("{} '{}': ids may not contain spaces, commas, brackets or quotes", what, id));
        }
    }
}

void check_regions_exist(const EnergySystem& s, const std::map<std::string, double>& m,
                         std::string_view owner)
{
    for (const auto& [region, value] : m) {
        if (!s.find_region(region)) {
            throw ValidationError(fmt::format("{}: unknown region '{}'", owner, region));
        }
        if (!(value >= 0.0)) {
            throw ValidationError(fmt::format("{}: potential for '{}' must be nonnegative", owner, region));
        }
    }
}

void check_availability_source(const EnergySystem& s, const Availability::Source& src,
                               std::string_view owner)
{
    if (const auto* flat = std::get_if<double>(&src)) {
        if (!(*flat >= 0.0 && *flat <= 1.0)) {
            throw ValidationError(fmt::format("{}: availability {} outside [0,1]", owner, *flat));
        }
        return;
    }
    const auto& name = std::get<std::string>(src);
    const auto it = s.profiles.find(name);
    if (it == s.profiles.end()) {
        throw ValidationError(fmt::format("{}: unknown profile '{}'", owner, name));
    }
    for (const double v : it->second) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError(
                fmt::format("{}: profile '{}' has availability {} outside [0,1]", owner, name, v));
        }
    }
}

} // namespace

void EnergySystem::validate() const
{
    grid.validate();
    network_finance.validate();
    if (regions.empty()) {
        throw ValidationError("no regions defined");
    }
    std::set<std::string> seen;
    for (const auto& r : regions) {
        check_identifier(r.id, "region");
        if (r.zone.empty() || r.cluster.empty()) {
            throw ValidationError(fmt::format("region '{}': zone and cluster are required", r.id));
        }
        if (!seen.insert(r.id).second) {
            throw ValidationError(fmt::format("duplicate region '{}'", r.id));
        }
    }
    seen.clear();
    for (const auto& c : carriers) {
        if (std::find(kCarrierIds.begin(), kCarrierIds.end(), c.id) == kCarrierIds.end()) {
            throw ValidationError(fmt::format("unknown carrier '{}'", c.id));
        }
        if (!seen.insert(c.id).second) {
            throw ValidationError(fmt::format("duplicate carrier '{}'", c.id));
        }
    }
    auto require_carrier = [&](const std::string& id, std::string_view owner, bool balanced) {
        const auto* c = find_carrier(id);
        if (!c) {
            throw ValidationError(fmt::format("{}: unknown carrier '{}'", owner, id));
        }
        if (balanced && c->primary) {
            throw ValidationError(
                fmt::format("{}: primary carrier '{}' cannot be produced or stored", owner, id));
        }
    };

    if (technologies.empty()) {
        throw ValidationError("no supply technologies");
    }
    seen.clear();
    for (const auto& t : technologies) {
        const auto owner = fmt::format("technology '{}'", t.id);
        check_identifier(t.id, "technology");
        if (!seen.insert(t.id).second) {
            throw ValidationError(fmt::format("duplicate technology '{}'", t.id));
        }
        if (t.outputs.empty()) {
            throw ValidationError(owner + ": at least one output is required");
        }
        for (const auto& [c, eff] : t.outputs) {
            require_carrier(c, owner, true);
            if (!(eff > 0.0) || !std::isfinite(eff)) {
                throw ValidationError(fmt::format("{}: output efficiency for '{}' must be positive", owner, c));
            }
        }
        for (const auto& [c, share] : t.inputs) {
            require_carrier(c, owner, false);
            if (!(share > 0.0) || !std::isfinite(share)) {
                throw ValidationError(fmt::format("{}: input share for '{}' must be positive", owner, c));
            }
        }
        if (!(t.annualized_capex >= 0.0 && t.om_var >= 0.0 && t.fuel >= 0.0)) {
            throw ValidationError(owner + ": costs must be nonnegative");
        }
        check_availability_source(*this, t.availability.fallback, owner);
        for (const auto& [region, src] : t.availability.per_region) {
            if (!find_region(region)) {
                throw ValidationError(fmt::format("{}: unknown region '{}'", owner, region));
            }
            check_availability_source(*this, src, owner);
        }
        check_regions_exist(*this, t.potential_max, owner);
        if (t.potential_total_max && !(*t.potential_total_max >= 0.0)) {
            throw ValidationError(owner + ": potential_total_max must be nonnegative");
        }
    }

    std::set<ReactorType> types;
    for (const auto& n : nuclear) {
        const auto owner = fmt::format("nuclear '{}'", n.id());
        if (!types.insert(n.type).second) {
            throw ValidationError(fmt::format("duplicate nuclear technology '{}'", n.id()));
        }
        if (seen.count(n.id())) {
            throw ValidationError(fmt::format("nuclear id '{}' clashes with a technology", n.id()));
        }
        if (n.heat_outputs.empty()) {
            throw ValidationError(owner + ": heat outputs must be nonempty");
        }
        for (const auto& c : n.heat_outputs) {
            require_carrier(c, owner, true);
        }
        if (!find_carrier("electricity")) {
            throw ValidationError(owner + ": carrier 'electricity' is not defined");
        }
        if (!(n.heat_bonus > 1.0)) {
            throw ValidationError(owner + ": heat bonus must exceed 1");
        }
        if (!(n.capacity_factor > 0.0 && n.capacity_factor <= 1.0)) {
            throw ValidationError(owner + ": capacity factor must lie in (0,1]");
        }
        check_regions_exist(*this, n.potential_max, owner);
    }

    std::set<std::string> storage_ids;
    for (const auto& s : storage) {
        const auto owner = fmt::format("storage '{}'", s.id);
        check_identifier(s.id, "storage");
        if (!storage_ids.insert(s.id).second) {
            throw ValidationError(fmt::format("duplicate storage '{}'", s.id));
        }
        require_carrier(s.carrier, owner, true);
        if (!(s.charge_efficiency > 0.0 && s.charge_efficiency <= 1.0) ||
            !(s.discharge_efficiency > 0.0 && s.discharge_efficiency <= 1.0)) {
            throw ValidationError(owner + ": efficiencies must lie in (0,1]");
        }
        if (!(s.self_discharge >= 0.0 && s.self_discharge < 1.0)) {
            throw ValidationError(owner + ": self discharge must lie in [0,1)");
        }
        if (!(s.energy_capex >= 0.0 && s.power_capex >= 0.0)) {
            throw ValidationError(owner + ": costs must be nonnegative");
        }
        check_regions_exist(*this, s.potential_energy_max, owner);
        check_regions_exist(*this, s.potential_power_max, owner);
    }

    std::set<std::string> corridor_ids;
    for (const auto& c : transmission) {
        const auto owner = fmt::format("corridor '{}'", c.id);
        check_identifier(c.id, "corridor");
        if (!corridor_ids.insert(c.id).second) {
            throw ValidationError(fmt::format("duplicate corridor '{}'", c.id));
        }
        if (!find_region(c.from) || !find_region(c.to)) {
            throw ValidationError(fmt::format("{}: unknown region '{}'", owner,
                                              find_region(c.from) ? c.to : c.from));
        }
        if (c.from == c.to) {
            throw ValidationError(owner + ": endpoints must differ");
        }
        require_carrier(c.carrier(), owner, true);
        if (!(c.existing_gw >= 0.0) || !(c.length_km >= 0.0)) {
            throw ValidationError(owner + ": capacity and length must be nonnegative");
        }
        if (!(c.loss() >= 0.0 && c.loss() < 1.0)) {
            throw ValidationError(fmt::format("{}: loss {} outside [0,1)", owner, c.loss()));
        }
        double prev = -kInf;
        for (std::size_t k = 0; k < c.tranches.size(); ++k) {
            const auto& t = c.tranches[k];
            if (!(t.limit_gw > 0.0)) {
                throw ValidationError(fmt::format("{}: tranche {} has nonpositive limit", owner, k + 1));
            }
            if (!(t.capex_per_gw >= 0.0)) {
                throw ValidationError(fmt::format("{}: tranche {} has negative capex", owner, k + 1));
            }
            if (t.capex_per_gw < prev) {
                throw ValidationError(fmt::format("{}: tranche capex must be nondecreasing", owner));
            }
            prev = t.capex_per_gw;
        }
    }

    std::set<std::pair<std::string, std::string>> demand_keys;
    for (const auto& d : demands) {
        const auto owner = fmt::format("demand {}/{}", d.region, d.carrier);
        if (!find_region(d.region)) {
            throw ValidationError(fmt::format("{}: unknown region '{}'", owner, d.region));
        }
        require_carrier(d.carrier, owner, true);
        if (!demand_keys.insert({d.region, d.carrier}).second) {
            throw ValidationError(owner + ": duplicate demand series");
        }
        if (d.values.size() != grid.n_blocks) {
            throw ValidationError(fmt::format("{}: {} values for {} blocks", owner, d.values.size(),
                                              grid.n_blocks));
        }
        for (const double v : d.values) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ValidationError(owner + ": values must be finite and nonnegative");
            }
        }
    }

    if (limits.biomass_total_max_twh && !(*limits.biomass_total_max_twh >= 0.0)) {
        throw ValidationError("limits: biomass_total_max_twh must be nonnegative");
    }
    std::set<std::string> route_ids;
    for (const auto& r : limits.imports) {
        const auto owner = fmt::format("import '{}'", r.id);
        check_identifier(r.id, "import");
        if (!route_ids.insert(r.id).second) {
            throw ValidationError(fmt::format("duplicate import route '{}'", r.id));
        }
        require_carrier(r.carrier, owner, true);
        if (!(r.price >= 0.0)) {
            throw ValidationError(owner + ": price must be nonnegative");
        }
        if (r.max_twh && !(*r.max_twh >= 0.0)) {
            throw ValidationError(owner + ": max_twh must be nonnegative");
        }
        for (const auto& region : r.regions) {
            if (!find_region(region)) {
                throw ValidationError(fmt::format("{}: unknown region '{}'", owner, region));
            }
        }
    }

    for (const auto& [name, values] : profiles) {
        if (values.size() != grid.n_blocks) {
            throw ValidationError(fmt::format("profile '{}': {} values for {} blocks", name,
                                              values.size(), grid.n_blocks));
        }
    }
    for (const auto& a : matrix.availability) {
        (void)scenario_from_names(ReadinessLevel::FOAK, a);
    }
}

// ---------------------------------------------------------------------------
// Loading

namespace {

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ULL)
{
    for (const unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback)
{
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::map<std::string, double> region_values(const json& j, const EnergySystem& s)
{
    std::map<std::string, double> out;
    if (j.is_number()) {
        for (const auto& r : s.regions) {
            out[r.id] = j.get<double>();
        }
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            out[k] = v.get<double>();
        }
    } else if (!j.is_null()) {
        throw ValidationError("potential must be a number or a region map");
    }
    return out;
}

Availability::Source availability_source(const json& j)
{
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_string()) {
        return j.get<std::string>();
    }
    throw ValidationError("availability must be a number or a profile name");
}

Availability parse_availability(const json& j)
{
    Availability a;
    if (j.is_null()) {
        return a;
    }
    if (j.is_object()) {
        if (j.contains("default")) {
            a.fallback = availability_source(j.at("default"));
        }
        if (j.contains("regions")) {
            for (const auto& [k, v] : j.at("regions").items()) {
                a.per_region[k] = availability_source(v);
            }
        }
        return a;
    }
    a.fallback = availability_source(j);
    return a;
}

std::vector<double> load_profile(const std::filesystem::path& file, const std::string& name,
                                 ProfileMode mode, double scale, const TimeGrid& grid)
{
    const auto table = detail::read_csv(file);
    if (table.header.size() != 2 || table.header[1] != "value" ||
        (table.header[0] != "block" && table.header[0] != "hour")) {
        throw ValidationError(fmt::format(
            "profile '{}': expected header 'block,value' or 'hour,value' in {}", name, file.string()));
    }
    std::vector<double> values;
    values.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        values.push_back(scale * detail::parse_double(row[1], fmt::format("profile '{}'", name)));
    }
    if (table.header[0] == "hour") {
        if (values.size() != static_cast<std::size_t>(grid.horizon_hours())) {
            throw ValidationError(fmt::format("profile '{}': {} hourly values, grid horizon is {} h",
                                              name, values.size(), grid.horizon_hours()));
        }
        values = aggregate_profile(values, grid, mode);
    }
    if (values.size() != grid.n_blocks) {
        throw ValidationError(fmt::format("profile '{}': {} values for {} blocks", name,
                                          values.size(), grid.n_blocks));
    }
    return values;
}

CorridorKind parse_corridor_kind(const std::string& s)
{
    if (s == "HVAC") {
        return CorridorKind::HVAC;
    }
    if (s == "HVDC") {
        return CorridorKind::HVDC;
    }
    if (s == "H2pipeline") {
        return CorridorKind::H2Pipeline;
    }
    throw ValidationError(fmt::format("unknown corridor kind '{}'", s));
}

double default_loss(CorridorKind k)
{
    switch (k) {
    case CorridorKind::HVAC:
        return 0.05;
    case CorridorKind::HVDC:
        return 0.03;
    case CorridorKind::H2Pipeline:
        return 0.0244;
    }
    return 0.0;
}

double price_to_eur2020(double price, const std::string& currency)
{
    if (currency == "EUR2020") {
        return price;
    }
    if (currency == "USD2019") {
        return costkit::convert_usd2019_to_eur2020(price);
    }
    throw ValidationError(fmt::format("unsupported price currency '{}'", currency));
}

EnergySystem parse_system(const json& cfg, const std::filesystem::path& base_dir)
{
    EnergySystem s;
    s.name = get_or<std::string>(cfg, "name", "system");

    const auto& g = cfg.at("grid");
    s.grid = TimeGrid::uniform(get_or<double>(g, "block_length_h", 2.0),
                               get_or<std::size_t>(g, "n_blocks", 4380),
                               get_or<double>(g, "year_hours", 8760.0));
    if (g.contains("weights")) {
        s.grid.weights = g.at("weights").get<std::vector<double>>();
    }
    s.grid.validate();

    if (cfg.contains("network_finance")) {
        const auto& f = cfg.at("network_finance");
        s.network_finance.wacc = get_or<double>(f, "wacc", 0.10);
        s.network_finance.lifetime_years = get_or<int>(f, "lifetime_years", 40);
        s.network_finance.construction_years = get_or<int>(f, "construction_years", 1);
    }

    for (const auto& r : cfg.at("regions")) {
        const auto id = r.at("id").get<std::string>();
        s.regions.push_back({id, get_or<std::string>(r, "zone", id), get_or<std::string>(r, "cluster", id)});
    }
    for (const auto& c : cfg.at("carriers")) {
        Carrier carrier;
        carrier.id = c.at("id").get<std::string>();
        carrier.transportable = get_or<bool>(c, "transportable", false);
        carrier.primary = get_or<bool>(c, "primary", carrier.id == "biomass");
        s.carriers.push_back(carrier);
    }

    if (cfg.contains("profiles")) {
        for (const auto& [name, p] : cfg.at("profiles").items()) {
            const auto mode_name = get_or<std::string>(p, "mode", "mean");
            if (mode_name != "mean" && mode_name != "sum") {
                throw ValidationError(fmt::format("profile '{}': mode must be 'mean' or 'sum'", name));
            }
            const auto mode = mode_name == "sum" ? ProfileMode::Sum : ProfileMode::Mean;
            s.profiles[name] = load_profile(base_dir / p.at("file").get<std::string>(), name, mode,
                                            get_or<double>(p, "scale", 1.0), s.grid);
        }
    }

    for (const auto& t : cfg.at("technologies")) {
        ConversionTech tech;
        tech.id = t.at("id").get<std::string>();
        if (t.contains("inputs")) {
            tech.inputs = t.at("inputs").get<std::map<std::string, double>>();
        }
        tech.outputs = t.at("outputs").get<std::map<std::string, double>>();
        tech.annualized_capex = t.at("annualized_capex").get<double>();
        tech.om_var = get_or<double>(t, "om_var", 0.0);
        tech.fuel = get_or<double>(t, "fuel", 0.0);
        tech.availability = parse_availability(t.value("availability", json()));
        tech.potential_max = region_values(t.value("potential_max", json()), s);
        if (t.contains("potential_total_max")) {
            tech.potential_total_max = t.at("potential_total_max").get<double>();
        }
        s.technologies.push_back(std::move(tech));
    }

    if (cfg.contains("nuclear")) {
        for (const auto& n : cfg.at("nuclear")) {
            NuclearTech tech;
            tech.type = costkit::parse_reactor_type(n.at("type").get<std::string>());
            tech.heat_outputs = n.contains("heat_outputs")
                                    ? n.at("heat_outputs").get<std::vector<std::string>>()
                                    : default_heat_outputs(tech.type);
            tech.heat_bonus = get_or<double>(n, "heat_bonus", 1.2);
            tech.capacity_factor = get_or<double>(n, "capacity_factor", 0.9);
            tech.potential_max = region_values(n.value("potential_max", json()), s);
            s.nuclear.push_back(std::move(tech));
        }
    }

    if (cfg.contains("storage")) {
        for (const auto& st : cfg.at("storage")) {
            StorageTech tech;
            tech.id = st.at("id").get<std::string>();
            tech.carrier = st.at("carrier").get<std::string>();
            tech.charge_efficiency = get_or<double>(st, "charge_efficiency", 1.0);
            tech.discharge_efficiency = get_or<double>(st, "discharge_efficiency", 1.0);
            tech.energy_capex = st.at("energy_capex").get<double>();
            tech.power_capex = st.at("power_capex").get<double>();
            tech.self_discharge = get_or<double>(st, "self_discharge", 0.0);
            tech.potential_energy_max = region_values(st.value("potential_energy_max", json()), s);
            tech.potential_power_max = region_values(st.value("potential_power_max", json()), s);
            s.storage.push_back(std::move(tech));
        }
    }

    if (cfg.contains("transmission")) {
        for (const auto& c : cfg.at("transmission")) {
            TransmissionCorridor corridor;
            corridor.id = c.at("id").get<std::string>();
            corridor.from = c.at("from").get<std::string>();
            corridor.to = c.at("to").get<std::string>();
            corridor.kind = parse_corridor_kind(c.at("kind").get<std::string>());
            corridor.existing_gw = get_or<double>(c, "existing_gw", 0.0);
            corridor.length_km = c.at("length_km").get<double>();
            corridor.loss_per_1000km = get_or<double>(c, "loss_per_1000km", default_loss(corridor.kind));
            if (c.contains("tranches")) {
                for (const auto& t : c.at("tranches")) {
                    corridor.tranches.push_back(
                        {t.at("limit_gw").get<double>(), t.at("capex_per_gw").get<double>()});
                }
            }
            if (c.contains("capex_per_gw_km")) {
                // pipelines: a single tranche priced per GW and km
                const double limit = get_or<double>(c, "expansion_limit_gw", kInf);
                corridor.tranches.push_back(
                    {limit, c.at("capex_per_gw_km").get<double>() * corridor.length_km});
            }
            s.transmission.push_back(std::move(corridor));
        }
    }

    if (cfg.contains("demands")) {
        for (const auto& d : cfg.at("demands")) {
            DemandSeries series;
            series.region = d.at("region").get<std::string>();
            series.carrier = d.at("carrier").get<std::string>();
            const double scale = get_or<double>(d, "scale", 1.0);
            if (d.contains("values")) {
                series.values = d.at("values").get<std::vector<double>>();
            } else if (d.contains("constant")) {
                series.values.assign(s.grid.n_blocks, d.at("constant").get<double>());
            } else {
                const auto name = d.at("profile").get<std::string>();
                const auto it = s.profiles.find(name);
                if (it == s.profiles.end()) {
                    throw ValidationError(fmt::format("demand {}/{}: unknown profile '{}'",
                                                      series.region, series.carrier, name));
                }
                series.values = it->second;
            }
            for (auto& v : series.values) {
                v *= scale;
            }
            s.demands.push_back(std::move(series));
        }
    }

    if (cfg.contains("limits")) {
        const auto& l = cfg.at("limits");
        if (l.contains("biomass_total_max_twh") && !l.at("biomass_total_max_twh").is_null()) {
            s.limits.biomass_total_max_twh = l.at("biomass_total_max_twh").get<double>();
        }
        if (l.contains("imports")) {
            for (const auto& r : l.at("imports")) {
                ImportRoute route;
                route.id = r.at("id").get<std::string>();
                route.carrier = r.at("carrier").get<std::string>();
                route.price = price_to_eur2020(r.at("price").get<double>(),
                                               get_or<std::string>(r, "currency", "EUR2020"));
                if (r.contains("max_twh") && !r.at("max_twh").is_null()) {
                    route.max_twh = r.at("max_twh").get<double>();
                }
                if (r.contains("regions")) {
                    route.regions = r.at("regions").get<std::vector<std::string>>();
                }
                s.limits.imports.push_back(std::move(route));
            }
        }
    }

    if (cfg.contains("scenarios")) {
        const auto& m = cfg.at("scenarios");
        if (m.contains("levels")) {
            s.matrix.levels.clear();
            for (const auto& l : m.at("levels")) {
                s.matrix.levels.push_back(costkit::parse_readiness_level(l.get<std::string>()));
            }
        }
        if (m.contains("availability")) {
            s.matrix.availability = m.at("availability").get<std::vector<std::string>>();
        }
    }
    return s;
}

} // namespace

EnergySystem load_system(const std::filesystem::path& config_path)
{
    const auto text = detail::read_text_file(config_path);
    json cfg;
    try {
        cfg = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(fmt::format("{}: {}", config_path.string(), e.what()));
    }
    EnergySystem s;
    try {
        s = parse_system(cfg, config_path.parent_path());
    } catch (const json::exception& e) {
        throw ValidationError(fmt::format("{}: {}", config_path.string(), e.what()));
    }
    s.validate();

    auto h = fnv1a(cfg.dump());
    for (const auto& [name, values] : s.profiles) {
        h = fnv1a(name, h);
        for (const double v : values) {
            h = fnv1a(detail::format_double(v), h);
        }
    }
    s.fingerprint = fmt::format("{:016x}", h);
    return s;
}

ScenarioSpec scenario_from_names(ReadinessLevel level, std::string_view availability)
{
    ScenarioSpec spec;
    spec.readiness = level;
    spec.availability = std::string(availability);
    if (availability == "all") {
        return spec;
    }
    if (availability.substr(0, 2) != "no" || availability.size() < 3) {
        throw ValidationError(fmt::format("unknown availability set '{}'", availability));
    }
    auto rest = availability.substr(2);
    // "noLWR+SMR" excludes several types at once
    while (!rest.empty()) {
        const auto plus = rest.find('+');
        spec.excluded.insert(costkit::parse_reactor_type(rest.substr(0, plus)));
        if (plus == std::string_view::npos) {
            break;
        }
        rest.remove_prefix(plus + 1);
    }
    return spec;
}

EnergySystem apply_scenario(const EnergySystem& system, const ScenarioSpec& spec,
                            const costkit::TechCostSet& costs)
{
    EnergySystem out = system;
    for (auto& n : out.nuclear) {
        n.excluded = spec.excluded.count(n.type) != 0;
        if (n.excluded) {
            for (const auto& r : out.regions) {
                n.potential_max[r.id] = 0.0;
            }
        }
        if (costs.contains(n.type)) {
            const auto& tc = costs.at(n.type);
            n.cost = NuclearCost{tc.occ, tc.annualized_capex_eur2020(), tc.om_eur2020(), tc.fuel_eur2020()};
        } else {
            n.cost.reset();
        }
    }
    return out;
}

} // namespace atomgrid::sys
