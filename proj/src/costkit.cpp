#include "atomgrid/costkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"

namespace atomgrid::costkit {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& names,
             std::string_view what)
{
    for (const auto& [value, name] : names) {
        if (name == s) {
            return value;
        }
    }
    throw ValidationError(fmt::format("unknown {} '{}'", what, s));
}

template <typename E, std::size_t N>
std::string_view enum_name(E v, const std::array<std::pair<E, std::string_view>, N>& names)
{
    for (const auto& [value, name] : names) {
        if (value == v) {
            return name;
        }
    }
    return "?";
}

constexpr std::array<std::pair<ReactorType, std::string_view>, 7> kReactorNames = {{
    {ReactorType::LWR, "LWR"},
    {ReactorType::SMR, "SMR"},
    {ReactorType::SFR, "SFR"},
    {ReactorType::HTR, "HTR"},
    {ReactorType::LFR, "LFR"},
    {ReactorType::MSR, "MSR"},
    {ReactorType::MSFR, "MSFR"},
}};

constexpr std::array<std::pair<Readiness, std::string_view>, 2> kReadinessNames = {{
    {Readiness::FOAK, "FOAK"},
    {Readiness::NOAK, "NOAK"},
}};

constexpr std::array<std::pair<ValueKind, std::string_view>, 4> kValueKindNames = {{
    {ValueKind::OccPerKw, "OCC_per_kW"},
    {ValueKind::OmFixedPerKwYr, "OM_fixed_per_kW_yr"},
    {ValueKind::OmVariablePerMwh, "OM_variable_per_MWh"},
    {ValueKind::FuelPerMwh, "fuel_per_MWh"},
}};

constexpr std::array<std::pair<Currency, std::string_view>, 2> kCurrencyNames = {{
    {Currency::USD, "USD"},
    {Currency::EUR, "EUR"},
}};

constexpr std::array<std::pair<ReadinessLevel, std::string_view>, 3> kLevelNames = {{
    {ReadinessLevel::FOAK, "FOAK"},
    {ReadinessLevel::NOAK_mean, "NOAK_mean"},
    {ReadinessLevel::NOAK_min, "NOAK_min"},
}};

constexpr double kHoursPerYear = 8760.0;

} // namespace

std::string_view to_string(ReactorType t) { return enum_name(t, kReactorNames); }
std::string_view to_string(Readiness r) { return enum_name(r, kReadinessNames); }
std::string_view to_string(ValueKind k) { return enum_name(k, kValueKindNames); }
std::string_view to_string(Currency c) { return enum_name(c, kCurrencyNames); }
std::string_view to_string(ReadinessLevel l) { return enum_name(l, kLevelNames); }

ReactorType parse_reactor_type(std::string_view s) { return parse_enum(s, kReactorNames, "reactor type"); }
Readiness parse_readiness(std::string_view s) { return parse_enum(s, kReadinessNames, "readiness"); }
ValueKind parse_value_kind(std::string_view s) { return parse_enum(s, kValueKindNames, "value kind"); }
Currency parse_currency(std::string_view s) { return parse_enum(s, kCurrencyNames, "currency"); }
ReadinessLevel parse_readiness_level(std::string_view s)
{
    return parse_enum(s, kLevelNames, "readiness level");
}

EscalationTable::EscalationTable(std::map<int, Row> rows, int base_year)
    : rows_(std::move(rows)), base_year_(base_year)
{
    if (rows_.empty()) {
        throw ValidationError("escalation table is empty");
    }
    const auto base = rows_.find(base_year_);
    if (base == rows_.end()) {
        throw ValidationError(fmt::format("escalation table has no row for base year {}", base_year_));
    }
    if (base->second.inflation_factor != 1.0 || base->second.combined_factor != 1.0) {
        throw ValidationError(
            fmt::format("escalation factors at base year {} must be exactly 1", base_year_));
    }
    for (const auto& [year, row] : rows_) {
        if (!(row.inflation_factor > 0.0) || !(row.combined_factor > 0.0)) {
            throw ValidationError(fmt::format("escalation factors for {} must be positive", year));
        }
    }
}

const EscalationTable::Row& EscalationTable::at(int year) const
{
    const auto it = rows_.find(year);
    if (it == rows_.end()) {
        throw RangeError(fmt::format("currency year {} outside escalation table range {}-{}", year,
                                     first_year(), last_year()));
    }
    return it->second;
}

void FinancingTerms::validate() const
{
    if (construction_years < 1) {
        throw ValidationError(fmt::format("construction years must be >= 1, got {}", construction_years));
    }
    if (!(wacc >= 0.0 && wacc < 1.0)) {
        throw ValidationError(fmt::format("wacc must lie in [0,1), got {}", wacc));
    }
    if (lifetime_years < 1) {
        throw ValidationError(fmt::format("lifetime must be >= 1, got {}", lifetime_years));
    }
    if (!(capacity_factor > 0.0 && capacity_factor <= 1.0)) {
        throw ValidationError(fmt::format("capacity factor must lie in (0,1], got {}", capacity_factor));
    }
}

double escalate_to_base_year(const CostRecord& record, const EscalationTable& table, bool use_combined)
{
    const auto& row = table.at(record.currency_year);
    return record.amount * (use_combined ? row.combined_factor : row.inflation_factor);
}

double convert_usd2019_to_eur2020(double usd2019)
{
    return usd2019 * kUsdInflation2019To2020 * kUsdToEurExchange2020;
}

double noak_from_foak(const LearningSpec& spec)
{
    if (!(spec.learning_rate >= 0.0 && spec.learning_rate < 1.0)) {
        throw DomainError(fmt::format("learning rate must lie in [0,1), got {}", spec.learning_rate));
    }
    if (!(spec.units >= 1.0)) {
        throw DomainError(fmt::format("unit count must be >= 1, got {}", spec.units));
    }
    if (spec.foak_cost < 0.0) {
        throw DomainError("FOAK cost must be nonnegative");
    }
    const double doublings = std::log2(spec.units);
    return spec.foak_cost * std::pow(1.0 - spec.learning_rate, doublings);
}

double idc_multiplier(const FinancingTerms& terms)
{
    terms.validate();
    const double r = terms.wacc;
    const double t = terms.construction_years;
    if (r == 0.0) {
        return 1.0;
    }
    // expm1/log1p keep precision for very small rates
    return std::expm1(t * std::log1p(r)) / (t * r);
}

double annuity_factor(const FinancingTerms& terms)
{
    terms.validate();
    const double r = terms.wacc;
    const double l = terms.lifetime_years;
    if (r == 0.0) {
        return 1.0 / l;
    }
    const double growth = std::exp(l * std::log1p(r));
    return r * growth / std::expm1(l * std::log1p(r));
}

std::vector<CostRecord> normalize_records(std::span<const CostRecord> records,
                                          const EscalationTable& table)
{
    std::vector<CostRecord> out;
    out.reserve(records.size());
    for (const auto& rec : records) {
        if (!(rec.amount >= 0.0)) {
            throw ValidationError(fmt::format("record '{}': amount must be nonnegative", rec.source_id));
        }
        CostRecord n = rec;
        n.amount = escalate_to_base_year(rec, table, rec.value_kind == ValueKind::OccPerKw);
        if (rec.currency == Currency::EUR) {
            n.amount /= kUsdToEurExchange2020;
        }
        n.currency = Currency::USD;
        n.currency_year = table.base_year();
        out.push_back(std::move(n));
    }
    return out;
}

Stats summarize(std::span<const double> values)
{
    Stats s;
    s.count = values.size();
    if (values.empty()) {
        return s;
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    // the mean of floating values can drift a few ulps past an extreme
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

const TechCost& TechCostSet::at(ReactorType t) const
{
    const auto it = techs.find(t);
    if (it == techs.end()) {
        throw MissingDataError(
            fmt::format("no cost data for {} at level {}", to_string(t), to_string(level)));
    }
    return it->second;
}

namespace {

std::optional<Stats> stats_of(std::span<const CostRecord> records, ReactorType type,
                              Readiness readiness, ValueKind kind)
{
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.reactor_type == type && r.readiness == readiness && r.value_kind == kind) {
            values.push_back(r.amount);
        }
    }
    if (values.empty()) {
        return std::nullopt;
    }
    return summarize(values);
}

std::optional<Stats> pooled_stats(std::span<const CostRecord> records, Readiness readiness,
                                  ValueKind kind)
{
    std::vector<double> values;
    for (const auto& r : records) {
        if (r.readiness == readiness && r.value_kind == kind) {
            values.push_back(r.amount);
        }
    }
    if (values.empty()) {
        return std::nullopt;
    }
    return summarize(values);
}

double pick(const Stats& s, ReadinessLevel level)
{
    return level == ReadinessLevel::NOAK_min ? s.min : s.mean;
}

} // namespace

TechCostSet build_tech_cost_set(std::span<const CostRecord> records, const FinancingTerms& terms,
                                ReadinessLevel level, std::span<const ReactorType> types)
{
    terms.validate();
    for (const auto& r : records) {
        if (r.currency != Currency::USD) {
            throw ValidationError(
                fmt::format("record '{}' is not normalized to USD", r.source_id));
        }
    }
    const Readiness group = level == ReadinessLevel::FOAK ? Readiness::FOAK : Readiness::NOAK;
    const double capital_factor = idc_multiplier(terms) * annuity_factor(terms);
    const double full_load_hours_kmwh = kHoursPerYear * terms.capacity_factor / 1000.0;
    const auto shared_fuel = pooled_stats(records, group, ValueKind::FuelPerMwh);

    TechCostSet set;
    set.level = level;
    set.terms = terms;
    std::vector<std::string> gaps;
    for (const auto type : types) {
        const auto occ = stats_of(records, type, group, ValueKind::OccPerKw);
        const auto om_fixed = stats_of(records, type, group, ValueKind::OmFixedPerKwYr);
        const auto om_var = stats_of(records, type, group, ValueKind::OmVariablePerMwh);
        const auto fuel = stats_of(records, type, group, ValueKind::FuelPerMwh);
        if (!occ) {
            gaps.push_back(fmt::format("{}/{}: {}", to_string(type), to_string(group),
                                       to_string(ValueKind::OccPerKw)));
        }
        if (!om_fixed && !om_var) {
            gaps.push_back(fmt::format("{}/{}: OM (fixed or variable)", to_string(type), to_string(group)));
        }
        if (!fuel && !shared_fuel) {
            gaps.push_back(fmt::format("{}/{}: {}", to_string(type), to_string(group),
                                       to_string(ValueKind::FuelPerMwh)));
        }
        if (!occ || (!om_fixed && !om_var) || (!fuel && !shared_fuel)) {
            continue;
        }
        TechCost tc;
        tc.occ_stats = *occ;
        tc.om_fixed_stats = om_fixed;
        tc.om_variable_stats = om_var;
        tc.fuel_stats = fuel ? fuel : shared_fuel;
        tc.fuel_shared = !fuel.has_value();
        tc.occ = pick(*occ, level);
        tc.om = (om_fixed ? pick(*om_fixed, level) / full_load_hours_kmwh : 0.0) +
                (om_var ? pick(*om_var, level) : 0.0);
        tc.fuel = pick(*tc.fuel_stats, level);
        tc.annualized_capex = tc.occ * capital_factor;
        set.techs.emplace(type, tc);
    }
    if (!gaps.empty()) {
        std::string msg = fmt::format("missing cost data for level {}:", to_string(level));
        for (const auto& g : gaps) {
            msg += "\n  " + g;
        }
        throw MissingDataError(msg);
    }
    return set;
}

const TechCostSet& CostBook::at(ReadinessLevel l) const
{
    const auto it = levels.find(l);
    if (it == levels.end()) {
        throw MissingDataError(fmt::format("cost book has no level {}", to_string(l)));
    }
    return it->second;
}

CostBook build_cost_book(std::span<const CostRecord> normalized, const FinancingTerms& terms,
                         std::span<const ReadinessLevel> levels)
{
    CostBook book;
    book.terms = terms;
    for (const auto level : levels) {
        book.levels.emplace(level, build_tech_cost_set(normalized, terms, level));
    }
    return book;
}

std::vector<CostRecord> read_cost_records(const std::filesystem::path& csv)
{
    const auto table = detail::read_csv(csv);
    const auto c_source = table.column("source_id");
    const auto c_type = table.column("reactor_type");
    const auto c_ready = table.column("readiness");
    const auto c_kind = table.column("value_kind");
    const auto c_cur = table.column("currency");
    const auto c_year = table.column("currency_year");
    const auto c_amount = table.column("amount");
    std::vector<CostRecord> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const auto where = fmt::format("{} row {}", csv.string(), i + 2);
        try {
            CostRecord r;
            r.source_id = row[c_source];
            r.reactor_type = parse_reactor_type(row[c_type]);
            r.readiness = parse_readiness(row[c_ready]);
            r.value_kind = parse_value_kind(row[c_kind]);
            r.currency = parse_currency(row[c_cur]);
            r.currency_year = static_cast<int>(detail::parse_int(row[c_year], "currency_year"));
            r.amount = detail::parse_double(row[c_amount], "amount");
            if (!(r.amount >= 0.0)) {
                throw ValidationError("amount must be nonnegative");
            }
            out.push_back(std::move(r));
        } catch (const ValidationError& e) {
            throw ValidationError(fmt::format("{}: {}", where, e.what()));
        }
    }
    return out;
}

EscalationTable read_escalation_table(const std::filesystem::path& csv, int base_year)
{
    const auto table = detail::read_csv(csv);
    const auto c_year = table.column("year");
    const auto c_infl = table.column("inflation_factor");
    const auto c_comb = table.column("combined_factor");
    std::map<int, EscalationTable::Row> rows;
    for (const auto& row : table.rows) {
        const int year = static_cast<int>(detail::parse_int(row[c_year], "year"));
        EscalationTable::Row r{detail::parse_double(row[c_infl], "inflation_factor"),
                               detail::parse_double(row[c_comb], "combined_factor")};
        if (!rows.emplace(year, r).second) {
            throw ValidationError(fmt::format("{}: duplicate year {}", csv.string(), year));
        }
    }
    return EscalationTable(std::move(rows), base_year);
}

namespace {

nlohmann::json stats_json(const Stats& s)
{
    return {{"count", s.count}, {"min", s.min}, {"mean", s.mean}, {"max", s.max}};
}

Stats stats_from_json(const nlohmann::json& j)
{
    return Stats{j.at("count").get<std::size_t>(), j.at("min").get<double>(),
                 j.at("mean").get<double>(), j.at("max").get<double>()};
}

} // namespace

nlohmann::json to_json(const CostBook& book)
{
    nlohmann::json j;
    j["schema_version"] = 1;
    j["currency"] = "USD2019";
    j["financing"] = {{"construction_years", book.terms.construction_years},
                      {"wacc", book.terms.wacc},
                      {"lifetime_years", book.terms.lifetime_years},
                      {"capacity_factor", book.terms.capacity_factor},
                      {"idc_multiplier", idc_multiplier(book.terms)},
                      {"annuity_factor", annuity_factor(book.terms)}};
    j["conversion"] = {{"usd2019_to_eur2020", convert_usd2019_to_eur2020(1.0)}};
    nlohmann::json levels = nlohmann::json::object();
    for (const auto& [level, set] : book.levels) {
        nlohmann::json techs = nlohmann::json::object();
        for (const auto& [type, tc] : set.techs) {
            nlohmann::json t;
            t["occ"] = tc.occ;
            t["om"] = tc.om;
            t["fuel"] = tc.fuel;
            t["annualized_capex"] = tc.annualized_capex;
            t["eur2020"] = {{"occ", tc.occ_eur2020()},
                            {"om", tc.om_eur2020()},
                            {"fuel", tc.fuel_eur2020()},
                            {"annualized_capex", tc.annualized_capex_eur2020()}};
            t["occ_stats"] = stats_json(tc.occ_stats);
            if (tc.om_fixed_stats) {
                t["om_fixed_stats"] = stats_json(*tc.om_fixed_stats);
            }
            if (tc.om_variable_stats) {
                t["om_variable_stats"] = stats_json(*tc.om_variable_stats);
            }
            if (tc.fuel_stats) {
                t["fuel_stats"] = stats_json(*tc.fuel_stats);
            }
            t["fuel_shared"] = tc.fuel_shared;
            techs[std::string(to_string(type))] = std::move(t);
        }
        levels[std::string(to_string(level))] = std::move(techs);
    }
    j["levels"] = std::move(levels);
    return j;
}

CostBook cost_book_from_json(const nlohmann::json& j)
{
    try {
        if (j.at("schema_version").get<int>() != 1) {
            throw ValidationError("unsupported cost document schema_version");
        }
        CostBook book;
        const auto& f = j.at("financing");
        book.terms.construction_years = f.at("construction_years").get<int>();
        book.terms.wacc = f.at("wacc").get<double>();
        book.terms.lifetime_years = f.at("lifetime_years").get<int>();
        book.terms.capacity_factor = f.at("capacity_factor").get<double>();
        book.terms.validate();
        for (const auto& [lname, techs] : j.at("levels").items()) {
            TechCostSet set;
            set.level = parse_readiness_level(lname);
            set.terms = book.terms;
            for (const auto& [tname, t] : techs.items()) {
                TechCost tc;
                tc.occ = t.at("occ").get<double>();
                tc.om = t.at("om").get<double>();
                tc.fuel = t.at("fuel").get<double>();
                tc.annualized_capex = t.at("annualized_capex").get<double>();
                tc.occ_stats = stats_from_json(t.at("occ_stats"));
                if (t.contains("om_fixed_stats")) {
                    tc.om_fixed_stats = stats_from_json(t.at("om_fixed_stats"));
                }
                if (t.contains("om_variable_stats")) {
                    tc.om_variable_stats = stats_from_json(t.at("om_variable_stats"));
                }
                if (t.contains("fuel_stats")) {
                    tc.fuel_stats = stats_from_json(t.at("fuel_stats"));
                }
                tc.fuel_shared = t.value("fuel_shared", false);
                if (tc.occ < 0 || tc.om < 0 || tc.fuel < 0 || tc.annualized_capex < 0) {
                    throw ValidationError(fmt::format("negative cost for {} at {}", tname, lname));
                }
                set.techs.emplace(parse_reactor_type(tname), tc);
            }
            book.levels.emplace(set.level, std::move(set));
        }
        return book;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("cost document: {}", e.what()));
    }
}

CostBook read_cost_book(const std::filesystem::path& path)
{
    const auto text = detail::read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return cost_book_from_json(j);
}

} // namespace atomgrid::costkit
