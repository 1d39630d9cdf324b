#include <gtest/gtest.h>

#include "atomgrid/costkit.hpp"
#include "atomgrid/detail/text.hpp"
#include "atomgrid/errors.hpp"
#include "atomgrid/scenarios.hpp"
#include "test_support.hpp"

using namespace atomgrid;
using namespace atomgrid::scenarios;
using costkit::ReadinessLevel;

namespace {

const std::vector<std::string> kSets = {"all", "noLWR", "noSMR", "noSFR", "noHTR"};

RunMatrix full_matrix()
{
    return RunMatrix({costkit::kReadinessLevels.begin(), costkit::kReadinessLevels.end()}, kSets);
}

report::RunReport fake(const std::string& level, const std::string& avail, double cost, double nuclear = 0.0)
{
    report::RunReport r;
    r.run = level + "/" + avail;
    r.level = level;
    r.availability = avail;
    r.status = "Optimal";
    r.fingerprint = "fp";
    r.total_cost = cost;
    r.metrics.push_back({"capacity_heat_primary", "HTR", "", nuclear, "GW"});
    return r;
}

const report::RunReport* find(const std::vector<report::RunReport>& v, const std::string& run)
{
    for (const auto& r : v) {
        if (r.run == run) {
            return &r;
        }
    }
    return nullptr;
}

} // namespace

TEST(Matrix, FifteenRunsLevelsOutermost)
{
    const auto m = full_matrix();
    ASSERT_EQ(m.size(), 15u);
    EXPECT_EQ(m.runs().front().id, "FOAK/all");
    EXPECT_EQ(m.runs()[5].id, "NOAK_mean/all");
    EXPECT_EQ(m.runs().back().id, "NOAK_min/noHTR");
    EXPECT_EQ(m.runs().back().subdir, std::filesystem::path("NOAK_min") / "noHTR");
    EXPECT_EQ(m.runs().back().spec.excluded, (std::set<costkit::ReactorType>{costkit::ReactorType::HTR}));
}

TEST(Matrix, OnlySelectors)
{
    const auto m = full_matrix();
    const auto one = m.only({"NOAK_min:all"});
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one.runs()[0].id, "NOAK_min/all");
    const auto two = m.only({"FOAK:noHTR,NOAK_mean:noSFR"});
    ASSERT_EQ(two.size(), 2u);
    EXPECT_EQ(two.runs()[0].id, "FOAK/noHTR");
    EXPECT_THROW(m.only({"NOAK_min"}), ValidationError);
    EXPECT_THROW(m.only({"NOAK_max:all"}), ValidationError);
    EXPECT_THROW(m.only({"FOAK:noABC"}), ValidationError);
}

TEST(Matrix, FromSystemUsesConfiguredGrid)
{
    const auto s = sys::load_system(testkit::source_path("tests/data/tiny/system.json"));
    const auto m = RunMatrix::from_system(s);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.runs()[1].id, "NOAK_min/noHTR");
}

TEST(Compare, ExclusionAndReadinessFlags)
{
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    std::vector<report::RunReport> reports = {
        fake("FOAK", "all", 100.0), fake("FOAK", "noHTR", 100.0),
        fake("NOAK_mean", "all", 90.0, 5.0), fake("NOAK_mean", "noHTR", 95.0, 2.0)};
    const auto cmp = compare_runs(reports, &book);
    EXPECT_TRUE(cmp.all_ok());
    bool seen = false;
    for (const auto& row : cmp.rows) {
        if (row.kind == "exclusion" && row.run == "NOAK_mean/noHTR" && row.metric == "nuclear_capacity") {
            EXPECT_EQ(row.reference, "NOAK_mean/all");
            EXPECT_DOUBLE_EQ(row.delta, -3.0);
            seen = true;
        }
    }
    EXPECT_TRUE(seen);

    reports[3].total_cost = 89.0; // cheaper than "all": exclusion violated
    reports[2].total_cost = 101.0; // dearer than FOAK: readiness violated
    const auto bad = compare_runs(reports, &book);
    EXPECT_FALSE(bad.all_ok());
    std::size_t violated = 0;
    for (const auto& f : bad.flags) {
        violated += f.status == "violated";
    }
    EXPECT_EQ(violated, 2u);
}

TEST(Compare, ReadinessNotJudgedWithoutOrderedCosts)
{
    std::vector<report::RunReport> reports = {fake("FOAK", "all", 80.0), fake("NOAK_mean", "all", 90.0)};
    const auto cmp = compare_runs(reports, nullptr);
    ASSERT_EQ(cmp.flags.size(), 1u);
    EXPECT_EQ(cmp.flags[0].status, "n/a");
}

TEST(Compare, WithinToleranceIsOk)
{
    std::vector<report::RunReport> reports = {fake("FOAK", "all", 1000.0), fake("FOAK", "noSMR", 1000.0 - 1e-6)};
    EXPECT_TRUE(compare_runs(reports).all_ok());
}

TEST(Compare, FailedRunsAreNotJudged)
{
    std::vector<report::RunReport> reports = {fake("FOAK", "all", 100.0), fake("FOAK", "noSMR", 1.0)};
    reports[1].status = "Infeasible";
    const auto cmp = compare_runs(reports);
    EXPECT_EQ(cmp.flags.at(0).status, "n/a");
}

TEST(Compare, Errors)
{
    EXPECT_THROW(compare_runs({fake("FOAK", "all", 1.0)}), ValidationError);
    auto other = fake("FOAK", "noSMR", 1.0);
    other.fingerprint = "different";
    EXPECT_THROW(compare_runs({fake("FOAK", "all", 1.0), other}), ValidationError);
}

TEST(Compare, SummaryCsv)
{
    std::vector<report::RunReport> reports = {fake("FOAK", "all", 100.0), fake("FOAK", "noHTR", 110.0, 1.0)};
    const auto cmp = compare_runs(reports);
    const auto csv = summary_csv(reports, &cmp);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "run,level,availability,status,total_cost,nuclear_capacity,nuclear_share_electricity,"
              "nuclear_share_heat,monotone");
    EXPECT_NE(csv.find("FOAK/noHTR,FOAK,noHTR,Optimal,110,1,0,0,ok"), std::string::npos);
}

TEST(RunMatrixExec, TinySystemArtifactsAndDeterminism)
{
    const auto s = sys::load_system(testkit::source_path("tests/data/tiny/system.json"));
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    const auto m = RunMatrix::from_system(s);
    MatrixOptions opts;
    opts.backend = "reference";
    opts.workers = 2;
    opts.write_mps = true;
    const auto dir_a = testkit::scratch_dir("matrix_a");
    const auto dir_b = testkit::scratch_dir("matrix_b");
    opts.out_dir = dir_a;
    const auto a = run_matrix(s, book, m, opts);
    opts.out_dir = dir_b;
    opts.workers = 1;
    const auto b = run_matrix(s, book, m, opts);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a, b);
    for (const auto& f : {"reports.csv", "reports.json", "summary.csv", "comparison.csv",
                          "NOAK_min/all/report.csv", "NOAK_min/noHTR/report.json", "NOAK_min/all/model.mps"}) {
        ASSERT_TRUE(std::filesystem::exists(dir_a / f)) << f;
        EXPECT_EQ(detail::read_text_file(dir_a / f), detail::read_text_file(dir_b / f)) << f;
    }
    for (const auto& r : a) {
        EXPECT_TRUE(r.optimal()) << r.message;
        EXPECT_EQ(r.backend, "reference");
    }
}

TEST(RunMatrixExec, FailureIsIsolated)
{
    auto s = sys::load_system(testkit::source_path("tests/data/tiny/system.json"));
    // an unreachable hydrogen demand makes every run infeasible without aborting the matrix
    s.demands.push_back({"b", "hydrogen", std::vector<double>(s.grid.n_blocks, 1e9)});
    s.technologies.erase(s.technologies.begin() + 4); // electrolyzer
    s.limits.imports.clear();
    s.transmission.pop_back(); // hydrogen pipeline
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    MatrixOptions opts;
    opts.backend = "reference";
    const auto reports = run_matrix(s, book, RunMatrix::from_system(s), opts);
    ASSERT_EQ(reports.size(), 2u);
    for (const auto& r : reports) {
        EXPECT_EQ(r.status, "Infeasible");
    }
    const auto* r = find(reports, "NOAK_min/all");
    ASSERT_NE(r, nullptr);
    EXPECT_FALSE(r->message.empty());
}

TEST(RunMatrixExec, BuildErrorBecomesErrorReport)
{
    const auto s = sys::load_system(testkit::source_path("tests/data/tiny/system.json"));
    costkit::CostBook empty;
    MatrixOptions opts;
    opts.backend = "reference";
    const auto reports = run_matrix(s, empty, RunMatrix::from_system(s), opts);
    for (const auto& r : reports) {
        EXPECT_EQ(r.status, "Error");
    }
}

TEST(RunMatrixExec, ReusedOptimaMatchFreshSolves)
{
    const auto s = sys::load_system(testkit::source_path("tests/data/tiny/system.json"));
    const auto book = costkit::read_cost_book(testkit::source_path("data/desk_costs.json"));
    const RunMatrix m({ReadinessLevel::NOAK_min}, {"all", "noLWR", "noSMR", "noSFR", "noHTR"});
    MatrixOptions opts;
    opts.backend = "reference";
    opts.workers = 1;
    const auto reused = run_matrix(s, book, m, opts);
    opts.reuse_parent = false;
    const auto fresh = run_matrix(s, book, m, opts);
    ASSERT_EQ(reused.size(), fresh.size());
    std::size_t certified = 0;
    for (std::size_t i = 0; i < reused.size(); ++i) {
        ASSERT_TRUE(reused[i].optimal()) << reused[i].run;
        EXPECT_NEAR(reused[i].total_cost, fresh[i].total_cost, 1e-9 * std::abs(fresh[i].total_cost)) << reused[i].run;
        EXPECT_LE(reused[i].value("duality_gap"), 1e-9);
        certified += reused[i].message.find("certified") != std::string::npos;
        EXPECT_TRUE(fresh[i].message.empty());
    }
    // the tiny system has no SMR or HTR, so at least those two runs reuse
    EXPECT_GE(certified, 2u);
    EXPECT_TRUE(reused[0].message.empty());
}
