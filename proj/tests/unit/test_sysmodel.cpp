#include <fstream>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "atomgrid/costkit.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/sysmodel.hpp"
#include "test_support.hpp"

using namespace atomgrid;
using namespace atomgrid::sys;
using nlohmann::json;

namespace {

const auto kTiny = testkit::source_path("tests/data/tiny/system.json");

json tiny_config()
{
    std::ifstream in(kTiny);
    return json::parse(in);
}

// Writes a variant of the tiny config next to copies of its profiles.
std::filesystem::path write_variant(const json& cfg, const std::string& name)
{
    const auto dir = testkit::scratch_dir("sys_" + name);
    for (const char* f : {"solar.csv", "load.csv"}) {
        std::filesystem::copy_file(testkit::source_path(std::string("tests/data/tiny/") + f), dir / f);
    }
    const auto path = dir / "system.json";
    std::ofstream(path) << cfg.dump(2);
    return path;
}

const DemandSeries& demand(const EnergySystem& s, const std::string& region, const std::string& carrier)
{
    for (const auto& d : s.demands) {
        if (d.region == region && d.carrier == carrier) {
            return d;
        }
    }
    throw std::runtime_error("no demand");
}

} // namespace

TEST(TimeGrid, UniformWeightsCoverTheYear)
{
    const auto g = TimeGrid::uniform(2.0, 336, 8760.0);
    ASSERT_EQ(g.weights.size(), 336u);
    double total = 0.0;
    for (double w : g.weights) {
        total += w;
    }
    EXPECT_NEAR(total, 8760.0, 1e-9);
    EXPECT_NEAR(g.scale(0), 8760.0 / 336.0 / 2.0, 1e-12);
    EXPECT_DOUBLE_EQ(g.horizon_hours(), 672.0);
}

TEST(Profiles, MeanAndSumAggregation)
{
    const std::vector<double> hourly = {0, 0.2, 0.6, 0.4, 0.1, 0.0, 0.3, 0.5};
    const auto g = TimeGrid::uniform(2.0, 4, 8.0);
    const auto mean = aggregate_profile(hourly, g, ProfileMode::Mean);
    const auto sum = aggregate_profile(hourly, g, ProfileMode::Sum);
    const std::vector<double> want_mean = {0.1, 0.5, 0.05, 0.4};
    ASSERT_EQ(mean.size(), 4u);
    for (std::size_t b = 0; b < 4; ++b) {
        EXPECT_NEAR(mean[b], want_mean[b], 1e-15);
        EXPECT_NEAR(sum[b], 2.0 * want_mean[b], 1e-15);
    }
}

TEST(Profiles, AggregationPreservesEnergy)
{
    std::vector<double> hourly(96);
    for (std::size_t h = 0; h < hourly.size(); ++h) {
        hourly[h] = static_cast<double>((h * 37) % 11) / 10.0;
    }
    for (double len : {1.0, 2.0, 3.0, 4.0, 6.0}) {
        const auto g = TimeGrid::uniform(len, static_cast<std::size_t>(96 / len), 96.0);
        const auto sum = aggregate_profile(hourly, g, ProfileMode::Sum);
        double a = 0.0;
        double b = 0.0;
        for (double v : hourly) {
            a += v;
        }
        for (double v : sum) {
            b += v;
        }
        EXPECT_NEAR(a, b, 1e-12);
    }
}

TEST(Load, TinySystem)
{
    const auto s = load_system(kTiny);
    EXPECT_EQ(s.regions.size(), 2u);
    EXPECT_EQ(s.carriers.size(), 4u);
    EXPECT_TRUE(s.find_carrier("biomass")->primary);
    EXPECT_FALSE(s.find_carrier("hydrogen")->primary);

    const auto& pv = s.technologies.at(0);
    EXPECT_NEAR(s.availability(pv, "a", 1), 0.5, 1e-15);
    EXPECT_NEAR(s.availability(pv, "b", 2), 0.05, 1e-15);
    EXPECT_EQ(s.availability(s.technologies.at(1), "a", 0), 1.0);

    const std::vector<double> load_a = {4.0, 6.0, 2.0, 4.0};
    EXPECT_EQ(demand(s, "a", "electricity").values, load_a);
    EXPECT_EQ(demand(s, "b", "electricity").values, std::vector<double>(4, 3.0));

    ASSERT_EQ(s.transmission.size(), 2u);
    EXPECT_NEAR(s.transmission[0].loss(), 0.025, 1e-15);
    EXPECT_NEAR(s.transmission[1].loss(), 0.0244, 1e-15);
    ASSERT_EQ(s.transmission[1].tranches.size(), 1u);
    EXPECT_NEAR(s.transmission[1].tranches[0].capex_per_gw, 400.0, 1e-12);
    EXPECT_EQ(s.transmission[1].carrier(), "hydrogen");

    ASSERT_EQ(s.limits.imports.size(), 1u);
    EXPECT_NEAR(s.limits.imports[0].price, 131.8 * 1.014 * 0.8929, 1e-9);

    ASSERT_EQ(s.matrix.levels.size(), 1u);
    EXPECT_EQ(s.matrix.levels[0], ReadinessLevel::NOAK_min);
    EXPECT_EQ(s.matrix.availability, (std::vector<std::string>{"all", "noHTR"}));
    EXPECT_EQ(s.nuclear.at(0).heat_outputs, default_heat_outputs(ReactorType::LWR));
}

TEST(Load, FingerprintIsStableAndContentSensitive)
{
    const auto a = load_system(kTiny);
    const auto b = load_system(write_variant(tiny_config(), "same"));
    EXPECT_EQ(a.fingerprint, b.fingerprint);

    auto cfg = tiny_config();
    cfg["technologies"][0]["annualized_capex"] = 41;
    EXPECT_NE(load_system(write_variant(cfg, "changed")).fingerprint, a.fingerprint);
}

TEST(Load, DefaultHeatMapping)
{
    EXPECT_EQ(default_heat_outputs(ReactorType::LWR), (std::vector<std::string>{"districtHeat"}));
    EXPECT_EQ(default_heat_outputs(ReactorType::SMR), (std::vector<std::string>{"processHeat_low"}));
    EXPECT_EQ(default_heat_outputs(ReactorType::SFR), (std::vector<std::string>{"processHeat_medium"}));
    EXPECT_EQ(default_heat_outputs(ReactorType::HTR),
              (std::vector<std::string>{"processHeat_medium", "processHeat_high"}));
}

TEST(LoadErrors, MissingFile)
{
    EXPECT_THROW(load_system("/nonexistent/system.json"), Error);
}

TEST(LoadErrors, UnknownProfile)
{
    auto cfg = tiny_config();
    cfg["demands"][0]["profile"] = "nope";
    EXPECT_THROW(load_system(write_variant(cfg, "profile")), ValidationError);
}

TEST(LoadErrors, ProfileLengthMismatch)
{
    auto cfg = tiny_config();
    cfg["grid"]["n_blocks"] = 3;
    cfg["grid"]["year_hours"] = 6;
    EXPECT_THROW(load_system(write_variant(cfg, "length")), ValidationError);
}

TEST(LoadErrors, UnknownCarrierInTechnology)
{
    auto cfg = tiny_config();
    cfg["technologies"][2]["outputs"] = {{"steam", 1.0}};
    EXPECT_THROW(load_system(write_variant(cfg, "carrier")), ValidationError);
}

TEST(LoadErrors, UnknownCorridorKind)
{
    auto cfg = tiny_config();
    cfg["transmission"][0]["kind"] = "DC";
    EXPECT_THROW(load_system(write_variant(cfg, "kind")), ValidationError);
}

TEST(LoadErrors, CorridorToUnknownRegion)
{
    auto cfg = tiny_config();
    cfg["transmission"][0]["to"] = "z";
    EXPECT_THROW(load_system(write_variant(cfg, "region")), ValidationError);
}

TEST(LoadErrors, BadPriceCurrency)
{
    auto cfg = tiny_config();
    cfg["limits"]["imports"][0]["currency"] = "GBP";
    EXPECT_THROW(load_system(write_variant(cfg, "currency")), ValidationError);
}

TEST(LoadErrors, DemandLengthMismatch)
{
    auto cfg = tiny_config();
    cfg["demands"][2]["values"] = {1, 2};
    EXPECT_THROW(load_system(write_variant(cfg, "demand")), ValidationError);
}

TEST(Scenario, NamesParse)
{
    const auto all = scenario_from_names(ReadinessLevel::FOAK, "all");
    EXPECT_TRUE(all.excluded.empty());
    const auto no = scenario_from_names(ReadinessLevel::NOAK_min, "noHTR");
    EXPECT_EQ(no.excluded, (std::set<ReactorType>{ReactorType::HTR}));
    EXPECT_EQ(no.availability, "noHTR");
    EXPECT_THROW(scenario_from_names(ReadinessLevel::FOAK, "noXYZ"), ValidationError);
    EXPECT_THROW(scenario_from_names(ReadinessLevel::FOAK, "some"), ValidationError);
}

TEST(Scenario, ApplyInjectsEuroCostsAndExclusions)
{
    const auto s = load_system(kTiny);
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    const auto& set = book.at(ReadinessLevel::NOAK_min);
    const auto applied = apply_scenario(s, scenario_from_names(ReadinessLevel::NOAK_min, "noSFR"), set);

    const auto& lwr = applied.nuclear.at(0);
    ASSERT_TRUE(lwr.cost.has_value());
    const auto& src = set.at(ReactorType::LWR);
    EXPECT_NEAR(lwr.cost->annualized_capex, src.annualized_capex * 1.014 * 0.8929, 1e-9);
    EXPECT_NEAR(lwr.cost->om, src.om * 1.014 * 0.8929, 1e-12);
    EXPECT_NEAR(lwr.cost->fuel, src.fuel * 1.014 * 0.8929, 1e-12);
    EXPECT_FALSE(lwr.excluded);
    EXPECT_TRUE(applied.nuclear.at(1).excluded);
    EXPECT_EQ(applied.fingerprint, s.fingerprint);
}
