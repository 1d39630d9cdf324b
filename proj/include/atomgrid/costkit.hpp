#pragma once

// Nuclear cost normalization: escalation to a common base year, learning
// curves, financing factors and the per-readiness-level cost set that feeds
// the system model.

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace atomgrid::costkit {

enum class ReactorType { LWR, SMR, SFR, HTR, LFR, MSR, MSFR };
enum class Readiness { FOAK, NOAK };
enum class ValueKind { OccPerKw, OmFixedPerKwYr, OmVariablePerMwh, FuelPerMwh };
enum class Currency { USD, EUR };

/// Cost parameterization of a scenario family.
enum class ReadinessLevel { FOAK, NOAK_mean, NOAK_min };

/// The four reactor types represented in the energy system model.
inline constexpr std::array<ReactorType, 4> kModelReactors = {
    ReactorType::LWR, ReactorType::SMR, ReactorType::SFR, ReactorType::HTR};

inline constexpr std::array<ReadinessLevel, 3> kReadinessLevels = {
    ReadinessLevel::FOAK, ReadinessLevel::NOAK_mean, ReadinessLevel::NOAK_min};

std::string_view to_string(ReactorType t);
std::string_view to_string(Readiness r);
std::string_view to_string(ValueKind k);
std::string_view to_string(Currency c);
std::string_view to_string(ReadinessLevel l);

ReactorType parse_reactor_type(std::string_view s);
Readiness parse_readiness(std::string_view s);
ValueKind parse_value_kind(std::string_view s);
Currency parse_currency(std::string_view s);
ReadinessLevel parse_readiness_level(std::string_view s);

/// One literature cost point as published.
struct CostRecord {
    std::string source_id;
    ReactorType reactor_type = ReactorType::LWR;
    Readiness readiness = Readiness::FOAK;
    ValueKind value_kind = ValueKind::OccPerKw;
    Currency currency = Currency::USD;
    int currency_year = 2019;
    double amount = 0.0;
};

/// Year-indexed factors that bring a cost to base-year money.
///
/// `inflation_factor` is plain consumer-price inflation; `combined_factor`
/// additionally folds in construction-cost escalation and is applied to
/// overnight construction costs.
class EscalationTable {
public:
    struct Row {
        double inflation_factor = 1.0;
        double combined_factor = 1.0;
    };

    explicit EscalationTable(std::map<int, Row> rows, int base_year = 2019);

    const Row& at(int year) const;
    bool contains(int year) const { return rows_.count(year) != 0; }
    int base_year() const { return base_year_; }
    int first_year() const { return rows_.begin()->first; }
    int last_year() const { return rows_.rbegin()->first; }
    const std::map<int, Row>& rows() const { return rows_; }

private:
    std::map<int, Row> rows_;
    int base_year_;
};

struct LearningSpec {
    double foak_cost = 0.0;
    double learning_rate = 0.0; ///< fractional reduction per doubling, in [0,1)
    double units = 1.0;         ///< cumulative units n >= 1
};

struct FinancingTerms {
    int construction_years = 7;
    double wacc = 0.10;
    int lifetime_years = 40;
    double capacity_factor = 0.90;

    /// Throws ValidationError on out-of-range terms.
    void validate() const;
};

inline constexpr double kUsdInflation2019To2020 = 1.014;
inline constexpr double kUsdToEurExchange2020 = 0.8929;

/// Multiplies the record amount by the factor of its currency year.
double escalate_to_base_year(const CostRecord& record, const EscalationTable& table,
                             bool use_combined);

double convert_usd2019_to_eur2020(double usd2019);

/// Cost of the n-th unit: FOAK * (1 - x)^log2(n).
double noak_from_foak(const LearningSpec& spec);

/// Interest during construction for uniform end-of-year spending over T
/// years compounded to commissioning: ((1+r)^T - 1) / (T r).
double idc_multiplier(const FinancingTerms& terms);

/// Capital recovery factor r(1+r)^L / ((1+r)^L - 1); 1/L at r = 0.
double annuity_factor(const FinancingTerms& terms);

/// Escalates every record to base-year USD. OCC uses the combined factor,
/// OM and fuel the inflation-only factor. EUR records are converted at the
/// 2020 exchange rate after escalation.
std::vector<CostRecord> normalize_records(std::span<const CostRecord> records,
                                          const EscalationTable& table);

struct Stats {
    std::size_t count = 0;
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
};

Stats summarize(std::span<const double> values);

/// Cost parameters of one reactor type at one readiness level, USD-2019.
struct TechCost {
    double occ = 0.0;              ///< USD/kW
    double om = 0.0;               ///< USD/MWh, fixed and variable combined
    double fuel = 0.0;             ///< USD/MWh
    double annualized_capex = 0.0; ///< USD/kW/yr incl. interest during construction
    Stats occ_stats;
    std::optional<Stats> om_fixed_stats;
    std::optional<Stats> om_variable_stats;
    std::optional<Stats> fuel_stats;
    bool fuel_shared = false; ///< fuel taken from the pooled level value

    double occ_eur2020() const { return convert_usd2019_to_eur2020(occ); }
    double om_eur2020() const { return convert_usd2019_to_eur2020(om); }
    double fuel_eur2020() const { return convert_usd2019_to_eur2020(fuel); }
    double annualized_capex_eur2020() const { return convert_usd2019_to_eur2020(annualized_capex); }
};

struct TechCostSet {
    ReadinessLevel level = ReadinessLevel::FOAK;
    FinancingTerms terms;
    std::map<ReactorType, TechCost> techs;

    const TechCost& at(ReactorType t) const;
    bool contains(ReactorType t) const { return techs.count(t) != 0; }
};

/// Aggregates normalized records into the cost set of one readiness level.
/// FOAK and NOAK_mean take means of the matching readiness group, NOAK_min
/// takes minima of the NOAK group. Fixed OM (per kW-yr) is folded into a
/// per-MWh value at the financing capacity factor and added to variable OM.
TechCostSet build_tech_cost_set(std::span<const CostRecord> records, const FinancingTerms& terms,
                                ReadinessLevel level,
                                std::span<const ReactorType> types = kModelReactors);

/// Cost sets for several readiness levels sharing one set of financing terms.
struct CostBook {
    FinancingTerms terms;
    std::map<ReadinessLevel, TechCostSet> levels;

    const TechCostSet& at(ReadinessLevel l) const;
};

CostBook build_cost_book(std::span<const CostRecord> normalized, const FinancingTerms& terms,
                         std::span<const ReadinessLevel> levels = kReadinessLevels);

std::vector<CostRecord> read_cost_records(const std::filesystem::path& csv);
EscalationTable read_escalation_table(const std::filesystem::path& csv, int base_year = 2019);

nlohmann::json to_json(const CostBook& book);
CostBook cost_book_from_json(const nlohmann::json& j);
CostBook read_cost_book(const std::filesystem::path& path);

} // namespace atomgrid::costkit
