#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "atomgrid/errors.hpp"
#include "atomgrid/lp.hpp"
#include "atomgrid/solver.hpp"
#include "test_support.hpp"
#include "vertex_oracle.hpp"

using namespace atomgrid;
using namespace atomgrid::solver;
using lp::kInf;
using lp::LPProblem;
using lp::Sense;

namespace {

LPProblem two_var()
{
    return lp::read_mps(testkit::source_path("tests/data/two_var.mps"));
}

std::vector<std::filesystem::path> toy_lps()
{
    std::vector<std::filesystem::path> out;
    for (const auto& e : std::filesystem::directory_iterator(testkit::source_path("tests/data/toy"))) {
        if (e.path().extension() == ".mps") {
            out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace

TEST(Reference, TwoVariableOptimumAndDuals)
{
    const auto sol = solve_reference(two_var());
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_NEAR(sol.objective, 9.5, 1e-12);
    EXPECT_NEAR(sol.primal[0], 2.5, 1e-12);
    EXPECT_NEAR(sol.primal[1], 1.5, 1e-12);
    // sensitivity convention: >= row nonnegative, <= row nonpositive
    EXPECT_NEAR(sol.dual[0], 2.5, 1e-12);
    EXPECT_NEAR(sol.dual[1], -0.5, 1e-12);
    EXPECT_TRUE(verify_optimality(two_var(), sol).ok());
}

TEST(Reference, MatchesVertexEnumerationOnRandomLps)
{
    std::mt19937_64 rng(7);
    std::size_t optimal = 0;
    std::size_t infeasible = 0;
    for (int k = 0; k < 300; ++k) {
        const auto lp = testkit::random_boxed_lp(rng);
        const auto want = testkit::enumerate_vertices(lp);
        const auto got = solve_reference(lp);
        if (!want.feasible) {
            EXPECT_EQ(got.status, SolveStatus::Infeasible) << "instance " << k;
            ++infeasible;
            continue;
        }
        ASSERT_EQ(got.status, SolveStatus::Optimal) << "instance " << k;
        EXPECT_NEAR(got.objective, want.objective, 1e-8) << "instance " << k;
        EXPECT_TRUE(verify_optimality(lp, got).ok()) << verify_optimality(lp, got).summary();
        ++optimal;
    }
    EXPECT_GE(optimal, 100u);
    EXPECT_GT(infeasible, 0u);
}

TEST(Reference, DetectsInfeasible)
{
    LPProblem lp;
    const auto x = lp.add_variable("x", 0.0, 1.0, 1.0);
    lp.add_row("r", Sense::GreaterEqual, 2.0, {{x.index, 1.0}});
    EXPECT_EQ(solve_reference(lp).status, SolveStatus::Infeasible);
}

TEST(Reference, DetectsUnbounded)
{
    LPProblem lp;
    const auto x = lp.add_variable("x", 0.0, kInf, -1.0);
    const auto y = lp.add_variable("y", 0.0, kInf, 0.0);
    lp.add_row("r", Sense::LessEqual, 1.0, {{x.index, -1.0}, {y.index, 1.0}});
    const auto sol = solve_reference(lp);
    EXPECT_EQ(sol.status, SolveStatus::Unbounded);
    EXPECT_TRUE(std::isinf(sol.objective) && sol.objective < 0);
}

TEST(Reference, FreeAndNegativeVariables)
{
    LPProblem lp;
    const auto x = lp.add_variable("x", -kInf, kInf, 1.0);
    const auto y = lp.add_variable("y", -5.0, -1.0, -2.0);
    lp.add_row("r", Sense::Equal, 3.0, {{x.index, 1.0}, {y.index, 1.0}});
    const auto sol = solve_reference(lp);
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    // x = 3 - y; cost = 3 - 3y, minimized at y = -1
    EXPECT_NEAR(sol.primal[1], -1.0, 1e-12);
    EXPECT_NEAR(sol.objective, 6.0, 1e-12);
}

TEST(Reference, DegenerateProblemTerminates)
{
    const auto lp = lp::read_mps(testkit::source_path("tests/data/toy/degenerate.mps"));
    const auto sol = solve_reference(lp);
    ASSERT_EQ(sol.status, SolveStatus::Optimal);
    EXPECT_NEAR(sol.objective, testkit::enumerate_vertices(lp).objective, 1e-9);
}

TEST(Reference, SizeGuard)
{
    LPProblem lp;
    for (int j = 0; j < 11; ++j) {
        lp.add_variable("x" + std::to_string(j), 0.0, 1.0, 1.0);
    }
    SimplexOptions opts;
    opts.max_variables = 10;
    try {
        solve_reference(lp, opts);
        FAIL() << "guard did not trigger";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("use backend"), std::string::npos);
    }
}

TEST(Verify, DetectsPerturbedPrimal)
{
    const auto lp = two_var();
    auto sol = solve_reference(lp);
    sol.primal[0] -= 0.1;
    const auto rep = verify_optimality(lp, sol);
    EXPECT_FALSE(rep.primal_ok);
    EXPECT_NE(rep.offending.find("demand"), std::string::npos);
    EXPECT_THROW(rep.require(), VerificationFailed);
}

TEST(Verify, DetectsZeroedDuals)
{
    const auto lp = two_var();
    auto sol = solve_reference(lp);
    std::fill(sol.dual.begin(), sol.dual.end(), 0.0);
    const auto rep = verify_optimality(lp, sol);
    EXPECT_FALSE(rep.ok());
}

TEST(Verify, DetectsWrongDualSign)
{
    const auto lp = two_var();
    auto sol = solve_reference(lp);
    sol.dual[1] = 0.5;
    EXPECT_FALSE(verify_optimality(lp, sol).dual_ok);
}

TEST(Backends, RegistryHasBuiltins)
{
    auto& reg = BackendRegistry::instance();
    EXPECT_TRUE(reg.contains("reference"));
    EXPECT_TRUE(reg.contains("highs-bridge"));
    EXPECT_THROW(reg.get("cplex"), BackendUnavailable);
}

TEST(Backends, AgreeOnToyLps)
{
    auto& reg = BackendRegistry::instance();
    const auto toys = toy_lps();
    ASSERT_GE(toys.size(), 4u);
    for (const auto& path : toys) {
        const auto lp = lp::read_mps(path);
        const auto ref = solve_backend(lp, "reference");
        ASSERT_EQ(ref.status, SolveStatus::Optimal) << path;
        for (const auto& id : reg.ids()) {
            std::string why;
            if (!reg.get(id).available(&why)) {
                continue;
            }
            const auto other = solve_backend(lp, id);
            ASSERT_EQ(other.status, SolveStatus::Optimal) << id << " " << path;
            EXPECT_LE(std::abs(other.objective - ref.objective), 1e-6 * std::max(1.0, std::abs(ref.objective)))
                << id << " " << path;
        }
    }
}

TEST(Backends, BridgeReportsInfeasible)
{
    std::string why;
    if (!BackendRegistry::instance().get("highs-bridge").available(&why)) {
        GTEST_SKIP() << why;
    }
    LPProblem lp;
    const auto x = lp.add_variable("x", 0.0, 1.0, 1.0);
    lp.add_row("r", Sense::GreaterEqual, 2.0, {{x.index, 1.0}});
    EXPECT_EQ(solve_backend(lp, "highs-bridge").status, SolveStatus::Infeasible);
}

TEST(Backends, MalformedOptions)
{
    const auto lp = two_var();
    EXPECT_THROW(solve_backend(lp, "reference", {{"pivot", "steepest"}}), ValidationError);
    EXPECT_THROW(solve_backend(lp, "reference", {{"tol", "-1"}}), ValidationError);
    EXPECT_THROW(solve_backend(lp, "reference", {{"tol", "abc"}}), ValidationError);
    EXPECT_THROW(solve_backend(lp, "highs-bridge", {{"method", "barrier"}}), ValidationError);
    EXPECT_THROW(solve_backend(lp, "highs-bridge", {{"presolve", "maybe"}}), ValidationError);
    EXPECT_THROW(solve_backend(lp, "nope"), BackendUnavailable);
    EXPECT_THROW(parse_backend_options({"novalue"}), ValidationError);
    EXPECT_THROW(parse_backend_options({"a=1", "a=2"}), ValidationError);
    EXPECT_EQ(parse_backend_options({"tol=1e-7"}).at("tol"), "1e-7");
}

TEST(Backends, MissingInterpreterIsUnavailable)
{
    const auto lp = two_var();
    EXPECT_THROW(solve_backend(lp, "highs-bridge", {{"python", "/nonexistent/python3"}}), BackendUnavailable);
}

TEST(Backends, AutoResolvesBySize)
{
    const auto small = two_var();
    EXPECT_EQ(resolve_backend_id("auto", small), "reference");
    EXPECT_EQ(resolve_backend_id("highs-bridge", small), "highs-bridge");
    LPProblem big;
    for (int j = 0; j < 5001; ++j) {
        big.add_variable("x" + std::to_string(j), 0.0, 1.0, 1.0);
    }
    EXPECT_EQ(resolve_backend_id("auto", big), "highs-bridge");
}

TEST(Backends, EnvironmentSelectsDefault)
{
    ::setenv(kSolverEnv, "reference", 1);
    EXPECT_EQ(default_backend_id(), "reference");
    ::unsetenv(kSolverEnv);
    EXPECT_EQ(default_backend_id(), "auto");
}

TEST(Status, Names)
{
    for (auto s : {SolveStatus::Optimal, SolveStatus::Infeasible, SolveStatus::Unbounded}) {
        EXPECT_EQ(parse_status(to_string(s)), s);
    }
    EXPECT_THROW(parse_status("Maybe"), ValidationError);
}
