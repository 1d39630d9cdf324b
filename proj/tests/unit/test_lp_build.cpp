#include <cmath>

#include <gtest/gtest.h>

#include "atomgrid/costkit.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/lp_build.hpp"
#include "atomgrid/solver.hpp"
#include "test_support.hpp"

using namespace atomgrid;
using namespace atomgrid::lp_build;
using lp::Sense;

namespace {

double coef(const lp::LPProblem& p, std::string_view row, std::string_view var)
{
    const auto i = p.find_row(row);
    const auto j = p.find_variable(var);
    if (i == lp::LPProblem::npos || j == lp::LPProblem::npos) {
        throw std::runtime_error("missing " + std::string(row) + " / " + std::string(var));
    }
    double v = 0.0;
    for (const auto& t : p.triplets()) {
        if (t.row == i && t.col == j) {
            v += t.value;
        }
    }
    return v;
}

double cost(const lp::LPProblem& p, std::string_view var)
{
    return p.costs().at(p.find_variable(var));
}

sys::NuclearCost flat_cost(double capex, double om, double fuel)
{
    return {0.0, capex, om, fuel};
}

sys::EnergySystem costed_tiny()
{
    auto s = testkit::tiny_system();
    s.nuclear[0].cost = flat_cost(300.0, 20.0, 12.0);
    return s;
}

// One region, one block: 1 GW of LWR with CF 0.9 and 2 h blocks, nothing else.
sys::EnergySystem single_reactor()
{
    sys::EnergySystem s;
    s.name = "reactor";
    s.grid = sys::TimeGrid::uniform(2.0, 1, 2.0);
    s.regions = {{"r", "r", "r"}};
    s.carriers = {{"electricity", true, false}, {"districtHeat", false, false}};
    sys::NuclearTech lwr;
    lwr.type = sys::ReactorType::LWR;
    lwr.heat_outputs = {"districtHeat"};
    lwr.cost = flat_cost(0.0, 0.0, 0.0);
    s.nuclear.push_back(lwr);
    return s;
}

double maximize(BuiltModel m, std::string_view var)
{
    auto& p = m.lp;
    for (std::size_t j = 0; j < p.num_variables(); ++j) {
        p.set_cost(j, 0.0);
    }
    p.set_cost(p.find_variable(var), -1.0);
    const auto cap = p.find_variable("cap[LWR,r]");
    p.set_bounds(cap, 1.0, 1.0);
    const auto sol = solver::solve_reference(p);
    EXPECT_EQ(sol.status, solver::SolveStatus::Optimal);
    return -sol.objective;
}

} // namespace

TEST(Build, VariableAndRowInventory)
{
    const auto s = costed_tiny();
    const auto m = build_lp(s);
    // per region: 2 conversion caps + 2x2 activities + 1 nuclear cap + 2x2 generation
    EXPECT_EQ(m.lp.num_variables(), 2u * (2 + 4 + 1 + 4));
    EXPECT_NE(m.lp.find_row("balance[a,electricity,b0]"), lp::LPProblem::npos);
    EXPECT_NE(m.lp.find_row("cogen[LWR,b,b1]"), lp::LPProblem::npos);
    EXPECT_EQ(m.balance_carriers, (std::vector<std::string>{"electricity", "districtHeat"}));
    EXPECT_EQ(m.nuclear[0].outputs, (std::vector<std::string>{"electricity", "districtHeat"}));
}

TEST(Build, BalanceRow)
{
    const auto m = build_lp(costed_tiny());
    const auto& p = m.lp;
    const auto i = p.find_row("balance[a,electricity,b1]");
    EXPECT_EQ(p.row(i).sense, Sense::GreaterEqual);
    EXPECT_DOUBLE_EQ(p.row(i).rhs, 4.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b1]", "act[gas_turbine,a,b1]"), 1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b1]", "act[boiler,a,b1]"), -1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b1]", "gen[LWR,a,b1,electricity]"), 1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[b,districtHeat,b0]", "act[boiler,b,b0]"), 0.95);
    EXPECT_DOUBLE_EQ(coef(p, "balance[b,districtHeat,b0]", "gen[LWR,b,b0,districtHeat]"), 1.0);
    EXPECT_DOUBLE_EQ(p.row(p.find_row("balance[b,districtHeat,b0]")).rhs, 1.0);
}

TEST(Build, CapacityRowUsesAvailabilityTimesBlockHours)
{
    auto s = costed_tiny();
    s.profiles["cf"] = {0.25, 0.75};
    s.technologies[0].availability.fallback = std::string("cf");
    const auto m = build_lp(s);
    EXPECT_DOUBLE_EQ(coef(m.lp, "capacity[gas_turbine,a,b0]", "cap[gas_turbine,a]"), -0.5);
    EXPECT_DOUBLE_EQ(coef(m.lp, "capacity[gas_turbine,a,b1]", "cap[gas_turbine,a]"), -1.5);
    EXPECT_DOUBLE_EQ(coef(m.lp, "capacity[gas_turbine,a,b1]", "act[gas_turbine,a,b1]"), 1.0);
}

TEST(Build, CogenerationRow)
{
    const auto m = build_lp(costed_tiny());
    EXPECT_DOUBLE_EQ(coef(m.lp, "cogen[LWR,a,b0]", "gen[LWR,a,b0,electricity]"), 1.0);
    EXPECT_DOUBLE_EQ(coef(m.lp, "cogen[LWR,a,b0]", "gen[LWR,a,b0,districtHeat]"), 1.0 / 1.2);
    EXPECT_DOUBLE_EQ(coef(m.lp, "cogen[LWR,a,b0]", "cap[LWR,a]"), -0.9 * 2.0);
}

TEST(Build, CogenerationLimitsAreAttained)
{
    const auto m = build_lp(single_reactor());
    EXPECT_NEAR(maximize(m, "gen[LWR,r,b0,electricity]"), 1.8, 1e-12);
    EXPECT_NEAR(maximize(m, "gen[LWR,r,b0,districtHeat]"), 2.16, 1e-12);
}

TEST(Build, CogenerationMixStaysOnTheFrontier)
{
    auto m = build_lp(single_reactor());
    auto& p = m.lp;
    const auto e = p.find_variable("gen[LWR,r,b0,electricity]");
    const auto h = p.find_variable("gen[LWR,r,b0,districtHeat]");
    p.set_bounds(e, 0.9, 0.9);
    EXPECT_NEAR(maximize(std::move(m), "gen[LWR,r,b0,districtHeat]"), (1.8 - 0.9) * 1.2, 1e-12);
    (void)h;
}

TEST(Build, ConversionAndNuclearObjective)
{
    const auto m = build_lp(costed_tiny());
    const auto& p = m.lp;
    EXPECT_DOUBLE_EQ(cost(p, "cap[gas_turbine,a]"), 50.0);
    EXPECT_NEAR(cost(p, "act[gas_turbine,b,b0]"), 60.0e-3, 1e-15);
    EXPECT_DOUBLE_EQ(cost(p, "cap[LWR,b]"), 300.0);
    EXPECT_NEAR(cost(p, "gen[LWR,a,b0,electricity]"), (20.0 + 12.0) * 1e-3, 1e-15);
    EXPECT_NEAR(cost(p, "gen[LWR,a,b0,districtHeat]"), (20.0 + 12.0 / 1.2) * 1e-3, 1e-15);
}

TEST(Build, OperatingCostsAreWeightedToTheYear)
{
    auto s = costed_tiny();
    s.grid = sys::TimeGrid::uniform(2.0, 2, 8760.0);
    const auto m = build_lp(s);
    EXPECT_NEAR(cost(m.lp, "act[gas_turbine,a,b0]"), 60.0e-3 * 8760.0 / 4.0, 1e-12);
    EXPECT_DOUBLE_EQ(cost(m.lp, "cap[gas_turbine,a]"), 50.0);
}

TEST(Build, PublishedLwrFoakGenerationCost)
{
    // FOAK LWR: 27.03 OM + 11.9 fuel USD-2019/MWh, in MEUR-2020 per GWh;
    // both published figures are rounded to the cent.
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    auto s = testkit::tiny_system();
    s = sys::apply_scenario(s, sys::scenario_from_names(sys::ReadinessLevel::FOAK, "all"),
                            book.at(sys::ReadinessLevel::FOAK));
    const auto m = build_lp(s);
    EXPECT_NEAR(cost(m.lp, "gen[LWR,a,b0,electricity]"), (27.03 + 11.9) * 1.014 * 0.8929 * 1e-3,
                2 * 0.005 * 1.014 * 0.8929 * 1e-3);
}

TEST(Build, ObjectiveOfSingleTechnologySystem)
{
    sys::EnergySystem s;
    s.name = "hundred";
    s.grid = sys::TimeGrid::uniform(2.0, 1, 2.0);
    s.regions = {{"r", "r", "r"}};
    s.carriers = {{"electricity", true, false}};
    sys::ConversionTech t;
    t.id = "plant";
    t.outputs = {{"electricity", 1.0}};
    t.annualized_capex = 50.0;
    s.technologies.push_back(t);
    s.demands = {{"r", "electricity", {4.0}}};
    const auto m = build_lp(s);
    const auto sol = solver::solve_reference(m.lp);
    ASSERT_EQ(sol.status, solver::SolveStatus::Optimal);
    EXPECT_NEAR(sol.objective, 100.0, 1e-9);
    EXPECT_NEAR(sol.primal[m.conversion[0].cap[0]], 2.0, 1e-12);
}

TEST(Build, StorageRecursionIsCyclic)
{
    auto s = costed_tiny();
    sys::StorageTech st;
    st.id = "battery";
    st.carrier = "electricity";
    st.charge_efficiency = 0.9;
    st.discharge_efficiency = 0.8;
    st.self_discharge = 0.01;
    st.energy_capex = 5.0;
    st.power_capex = 7.0;
    s.storage.push_back(st);
    const auto m = build_lp(s);
    const auto& p = m.lp;
    // level[b+1] = (1 - sd) level[b] + eta_c charge[b] - discharge[b] / eta_d; the last block wraps
    EXPECT_DOUBLE_EQ(coef(p, "soc[battery,a,b1]", "level[battery,a,b0]"), 1.0);
    EXPECT_DOUBLE_EQ(coef(p, "soc[battery,a,b1]", "level[battery,a,b1]"), -0.99);
    EXPECT_DOUBLE_EQ(coef(p, "soc[battery,a,b1]", "charge[battery,a,b1]"), -0.9);
    EXPECT_DOUBLE_EQ(coef(p, "soc[battery,a,b1]", "discharge[battery,a,b1]"), 1.0 / 0.8);
    EXPECT_EQ(p.row(p.find_row("soc[battery,a,b1]")).sense, Sense::Equal);
    EXPECT_DOUBLE_EQ(coef(p, "charge_cap[battery,a,b0]", "pcap[battery,a]"), -2.0);
    EXPECT_DOUBLE_EQ(coef(p, "level_cap[battery,a,b0]", "ecap[battery,a]"), -1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b0]", "discharge[battery,a,b0]"), 1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b0]", "charge[battery,a,b0]"), -1.0);
    EXPECT_DOUBLE_EQ(cost(p, "ecap[battery,b]"), 5.0);
    EXPECT_DOUBLE_EQ(cost(p, "pcap[battery,b]"), 7.0);
}

TEST(Build, TransmissionLossesAndTranches)
{
    auto s = costed_tiny();
    sys::TransmissionCorridor c;
    c.id = "ab";
    c.from = "a";
    c.to = "b";
    c.kind = sys::CorridorKind::HVAC;
    c.existing_gw = 1.5;
    c.length_km = 1000.0;
    c.loss_per_1000km = 0.05;
    c.tranches = {{2.0, 200.0}, {5.5, 3700.0}};
    s.transmission.push_back(c);
    const auto m = build_lp(s);
    const auto& p = m.lp;
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b0]", "flow[ab,fwd,b0]"), -1.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[b,electricity,b0]", "flow[ab,fwd,b0]"), 0.95);
    EXPECT_DOUBLE_EQ(coef(p, "balance[a,electricity,b0]", "flow[ab,bwd,b0]"), 0.95);
    const auto row = p.find_row("transfer[ab,fwd,b1]");
    EXPECT_DOUBLE_EQ(p.row(row).rhs, 3.0);
    EXPECT_DOUBLE_EQ(coef(p, "transfer[ab,fwd,b1]", "inv[ab,t2]"), -2.0);
    EXPECT_DOUBLE_EQ(p.variable(p.find_variable("inv[ab,t2]")).upper, 5.5);
    // one year of construction at 10 %, 40-year annuity
    const double annuity = 0.10 * std::pow(1.1, 40) / (std::pow(1.1, 40) - 1.0);
    EXPECT_NEAR(network_annualization(s), annuity, 1e-12);
    EXPECT_NEAR(cost(p, "inv[ab,t2]"), 3700.0 * annuity, 1e-9);
}

TEST(Build, ImportsAndBiomassBudget)
{
    auto s = costed_tiny();
    s.carriers.push_back({"biomass", false, true});
    sys::ConversionTech bio;
    bio.id = "bio";
    bio.inputs = {{"biomass", 1.25}};
    bio.outputs = {{"districtHeat", 1.0}};
    s.technologies.push_back(bio);
    s.limits.biomass_total_max_twh = 0.5;
    s.limits.imports.push_back({"ship", "electricity", 80.0, 0.002, {"b"}});
    const auto m = build_lp(s);
    const auto& p = m.lp;
    EXPECT_DOUBLE_EQ(p.row(m.biomass_row).rhs, 500.0);
    EXPECT_DOUBLE_EQ(coef(p, "biomass_budget", "act[bio,a,b1]"), 1.25);
    EXPECT_EQ(p.find_variable("import[ship,a,b0]"), lp::LPProblem::npos);
    EXPECT_NEAR(cost(p, "import[ship,b,b0]"), 0.08, 1e-15);
    EXPECT_DOUBLE_EQ(p.row(p.find_row("import_cap[ship]")).rhs, 2.0);
    EXPECT_DOUBLE_EQ(coef(p, "balance[b,electricity,b0]", "import[ship,b,b0]"), 1.0);
}

TEST(Build, ExcludedReactorIsBoundedToZero)
{
    auto s = testkit::tiny_system();
    s.nuclear[0].excluded = true;
    const auto m = build_lp(s);
    const auto& p = m.lp;
    EXPECT_EQ(p.variable(p.find_variable("cap[LWR,a]")).upper, 0.0);
    EXPECT_EQ(p.variable(p.find_variable("gen[LWR,a,b0,electricity]")).upper, 0.0);
}

TEST(Build, MissingNuclearCostNamesTheTechnology)
{
    try {
        build_lp(testkit::tiny_system());
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("LWR"), std::string::npos);
    }
}

TEST(Build, NonpositiveTrancheRejected)
{
    auto s = costed_tiny();
    s.transmission.push_back({"ab", "a", "b", sys::CorridorKind::HVDC, 0.0, {{0.0, 10.0}}, 100.0, 0.03});
    EXPECT_THROW(build_lp(s), ValidationError);
}

TEST(Build, TinySystemSolvesAndBalances)
{
    const auto s = costed_tiny();
    const auto m = build_lp(s);
    const auto sol = solver::solve_reference(m.lp);
    ASSERT_EQ(sol.status, solver::SolveStatus::Optimal);
    const auto act = m.lp.activities(sol.primal);
    for (std::size_t i = 0; i < m.lp.num_rows(); ++i) {
        const auto& r = m.lp.row(i);
        if (r.name.rfind("balance", 0) == 0) {
            EXPECT_GE(act[i], r.rhs - 1e-9) << r.name;
        }
    }
    EXPECT_TRUE(solver::verify_optimality(m.lp, sol).ok());
}
