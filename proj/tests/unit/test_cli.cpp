#include <cstdio>
#include <cstdlib>
#include <string>
#include <sys/wait.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "atomgrid/detail/text.hpp"
#include "test_support.hpp"

using namespace atomgrid;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args)
{
    const std::string cmd = std::string(ATOMGRID_CLI) + " -q " + args + " 2>/dev/null";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) {
        return r;
    }
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) {
        r.out.append(buf, n);
    }
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string src(const std::string& rel)
{
    return testkit::source_path(rel).string();
}

const std::string kTiny = "--system " + testkit::source_path("tests/data/tiny/system.json").string();
const std::string kCosts = "--costs " + testkit::source_path("data/desk_costs.json").string();

} // namespace

TEST(Cli, ValidateBundledConfigs)
{
    const auto r = run("validate --system " + src("data/desk_eu3.json"));
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("regions=3 carriers=10"), std::string::npos);
    EXPECT_NE(r.out.find("blocks=336"), std::string::npos);
    EXPECT_EQ(run("validate " + kTiny).code, 0);
}

TEST(Cli, UnknownFlagAndMissingSubcommand)
{
    EXPECT_EQ(run("validate --sytem x.json").code, 2);
    EXPECT_NE(run("").code, 0);
}

TEST(Cli, CostsReproducePublishedValues)
{
    const auto dir = testkit::scratch_dir("cli_costs");
    const auto out = (dir / "costs.json").string();
    ASSERT_EQ(run("costs --records " + src("data/cost_records.csv") + " --escalation " + src("data/escalation.csv") +
                  " --level FOAK --out " + out)
                  .code,
              0);
    const auto j = nlohmann::json::parse(detail::read_text_file(out));
    const auto text = j.dump();
    EXPECT_NE(text.find("9511.47"), std::string::npos);

    ASSERT_EQ(run("costs --level NOAK_min --records " + src("data/cost_records.csv") + " --escalation " +
                  src("data/escalation.csv") + " --out " + out)
                  .code,
              0);
    EXPECT_NE(detail::read_text_file(out).find("1782.62"), std::string::npos);
}

TEST(Cli, EmptyRecordsFileFails)
{
    const auto dir = testkit::scratch_dir("cli_empty");
    detail::write_text_file(dir / "empty.csv", "");
    const auto r = run("costs --records " + (dir / "empty.csv").string() + " --escalation " +
                       src("data/escalation.csv") + " --out " + (dir / "c.json").string());
    EXPECT_NE(r.code, 0);
}

TEST(Cli, SolveInfeasibleFixture)
{
    const auto dir = testkit::scratch_dir("cli_infeasible");
    const auto out = (dir / "sol.json").string();
    const auto r = run("solve --mps " + src("tests/data/infeasible.mps") + " --backend reference --out " + out);
    EXPECT_EQ(r.code, 3);
    const auto j = nlohmann::json::parse(detail::read_text_file(out));
    EXPECT_EQ(j.at("status"), "Infeasible");
}

TEST(Cli, BackendUnavailable)
{
    const auto r = run("solve --mps " + src("tests/data/two_var.mps") +
                       " --backend highs-bridge --option python=/nonexistent/python3");
    EXPECT_EQ(r.code, 4);
    EXPECT_EQ(run("solve --mps " + src("tests/data/two_var.mps") + " --backend cplex").code, 4);
}

TEST(Cli, MalformedBackendOption)
{
    EXPECT_EQ(run("solve --mps " + src("tests/data/two_var.mps") + " --backend reference --option tol").code, 2);
    EXPECT_EQ(run("solve --mps " + src("tests/data/two_var.mps") + " --backend reference --option speed=9").code, 2);
}

TEST(Cli, SolvePrintsMachineReadableSolution)
{
    const auto r = run("solve --mps " + src("tests/data/two_var.mps") + " --backend reference");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j.at("status"), "Optimal");
    EXPECT_DOUBLE_EQ(j.at("objective").get<double>(), 9.5);
}

TEST(Cli, PipelineMatchesMatrix)
{
    const auto dir = testkit::scratch_dir("cli_pipeline");
    const auto mps = (dir / "model.mps").string();
    const auto sol = (dir / "sol.json").string();
    const std::string scenario = " --level NOAK_min --availability all";
    ASSERT_EQ(run("build " + kTiny + " " + kCosts + scenario + " --out " + mps).code, 0);
    ASSERT_EQ(run("solve --backend reference --mps " + mps + " --out " + sol).code, 0);
    ASSERT_EQ(run("report " + kTiny + " " + kCosts + scenario + " --solution " + sol + " --out " +
                  (dir / "single").string())
                  .code,
              0);
    ASSERT_EQ(run("matrix " + kTiny + " " + kCosts + " --backend reference --only NOAK_min:all --out " +
                  (dir / "matrix").string())
                  .code,
              0);
    for (const auto* f : {"report.csv", "report.json"}) {
        EXPECT_EQ(detail::read_text_file(dir / "single" / f), detail::read_text_file(dir / "matrix/NOAK_min/all" / f))
            << f;
    }
}

TEST(Cli, MatrixOnlySelectsOneRun)
{
    const auto dir = testkit::scratch_dir("cli_only");
    ASSERT_EQ(run("matrix " + kTiny + " " + kCosts + " --only NOAK_min:noHTR --workers 1 --out " + dir.string()).code,
              0);
    EXPECT_TRUE(std::filesystem::exists(dir / "NOAK_min/noHTR/report.csv"));
    EXPECT_FALSE(std::filesystem::exists(dir / "NOAK_min/all"));
    EXPECT_EQ(run("matrix " + kTiny + " " + kCosts + " --only FOAK:all --out " + dir.string()).code, 2);
}

TEST(Cli, MatrixReportsInfeasibleRuns)
{
    const auto dir = testkit::scratch_dir("cli_infeasible_matrix");
    auto cfg = nlohmann::json::parse(detail::read_text_file(testkit::source_path("tests/data/tiny/system.json")));
    cfg["demands"].push_back({{"region", "a"}, {"carrier", "districtHeat"}, {"constant", 1e9}});
    cfg["technologies"][2]["potential_max"] = {{"a", 0}, {"b", 0}};
    cfg["technologies"][3]["potential_max"] = {{"a", 0}, {"b", 0}};
    cfg["nuclear"][0]["potential_max"] = {{"a", 0}, {"b", 0}};
    for (const char* f : {"solar.csv", "load.csv"}) {
        std::filesystem::copy_file(testkit::source_path(std::string("tests/data/tiny/") + f), dir / f);
    }
    detail::write_text_file(dir / "system.json", cfg.dump());
    const auto r = run("matrix --system " + (dir / "system.json").string() + " " + kCosts + " --out " +
                       (dir / "out").string());
    EXPECT_EQ(r.code, 3);
    EXPECT_NE(detail::read_text_file(dir / "out/summary.csv").find("Infeasible"), std::string::npos);
}
