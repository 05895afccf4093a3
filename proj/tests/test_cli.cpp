#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "perseg/cli/commands.hpp"
#include "perseg/cli/config.hpp"
#include "perseg/cli/csv.hpp"

using namespace perseg;
using namespace perseg::cli;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("perseg_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

// Coarse reference configuration that keeps the commands fast.
RunConfig small_config(const std::filesystem::path& out) {
    RunConfig cfg = parse("n = 256\nsweep_points = 5\nt_end = 1\nk_schedule = 100, 1000\n");
    cfg.out = out;
    return cfg;
}

}  // namespace

TEST(Config, MinimalFileIsValid) {
    const auto cfg = parse("r0 = 1/6\nr1 = 1/6\nr2 = 1/6\nM1 = 10\nM2 = 10\nalpha = 1\nd = 1\n");
    EXPECT_DOUBLE_EQ(cfg.profile.r0, 1.0 / 6.0);
    EXPECT_EQ(cfg.profile.M1, 10.0);
}

TEST(Config, CommentsBlankLinesAndLists) {
    const auto cfg = parse("# header\n\n  k_schedule = 10, 1e3 ,2e4   # trailing\nscheme = imex_cn\nsimulate = system\n");
    EXPECT_EQ(cfg.k_schedule, (std::vector<double>{10, 1000, 20000}));
    EXPECT_EQ(cfg.evolution.scheme, Scheme::imex_cn);
    EXPECT_EQ(cfg.simulate, Simulation::system);
}

TEST(Config, GeometryViolationNamesR2) {
    try {
        parse("r2 = 0.2\n");
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "r2");
    }
}

TEST(Config, UnknownKeyNamesKeyAndLine) {
    try {
        parse("M1 = 10\nfoo = 3\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
        EXPECT_NE(std::string(e.what()).find("foo"), std::string::npos);
    }
}

TEST(Config, MalformedLineReportsLine) {
    try {
        parse("# ok\nM1 10\n");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 2u);
    }
    EXPECT_THROW(parse("M1 = ten\n"), ParseError);
    EXPECT_THROW(parse("M1 = 1/0\n"), ParseError);
    EXPECT_THROW(parse("scheme = rk4\n"), ParseError);
}

TEST(Config, ConstraintViolationsNameTheKey) {
    for (const auto& [text, key] : std::vector<std::pair<std::string, std::string>>{
             {"dt = -1\n", "dt"}, {"k_schedule = 10, 5\n", "k_schedule"}, {"alpha = 0\n", "alpha"},
             {"sweep_to = 0.5\n", "sweep_to"}, {"L_factor = 1\n", "L_factor"}}) {
        try {
            parse(text);
            FAIL() << text;
        } catch (const ValidationError& e) {
            EXPECT_EQ(e.key(), key);
        }
    }
}

TEST(Config, DefaultTextRoundTrips) {
    const auto cfg = parse(default_config_text());
    const RunConfig def;
    EXPECT_EQ(cfg.profile.r1, def.profile.r1);
    EXPECT_EQ(cfg.n, def.n);
    EXPECT_EQ(cfg.k_schedule, def.k_schedule);
    EXPECT_EQ(cfg.L, 0.0);
    EXPECT_EQ(cfg.init, def.init);
}

TEST(Config, Fractions) {
    EXPECT_DOUBLE_EQ(parse_number("1/6"), 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(parse_number(" 2.5e1 "), 25.0);
    EXPECT_THROW(parse_number("1/"), InvalidArgument);
}

TEST(Csv, FormatAndAtomicWrite) {
    CsvTable t({"a", "b"});
    t.add_row(std::vector<double>{0.1, 1.0 / 3.0});
    t.add_row(std::vector<std::string>{"x", "2"});
    EXPECT_EQ(t.str(), "a,b\n0.10000000000000001,0.33333333333333331\nx,2\n");
    EXPECT_THROW(t.add_row(std::vector<double>{1.0}), InvalidArgument);
    const auto dir = scratch("csv");
    std::filesystem::create_directories(dir);
    t.write(dir / "t.csv");
    EXPECT_EQ(slurp(dir / "t.csv"), t.str());
    EXPECT_FALSE(std::filesystem::exists(dir / "t.csv.tmp"));
}

TEST(Commands, ConstructIsDeterministic) {
    std::ostringstream log;
    const auto a = scratch("construct_a"), b = scratch("construct_b");
    ASSERT_EQ(cmd_construct(small_config(a), log), exit_ok);
    ASSERT_EQ(cmd_construct(small_config(b), log), exit_ok);
    for (const char* f : {"v.csv", "matching.csv", "eigen.csv"}) {
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
        EXPECT_FALSE(slurp(a / f).empty());
    }
    EXPECT_EQ(slurp(a / "v.csv").substr(0, 12), "x,v,mu1,mu2\n");
}

TEST(Commands, SweepIndependentOfThreadCount) {
    std::ostringstream log;
    const auto a = scratch("sweep_a"), b = scratch("sweep_b");
    ::setenv("TOOL_THREADS", "1", 1);
    ASSERT_EQ(cmd_sweep_L(small_config(a), log), exit_ok);
    ::setenv("TOOL_THREADS", "3", 1);
    ASSERT_EQ(cmd_sweep_L(small_config(b), log), exit_ok);
    ::unsetenv("TOOL_THREADS");
    EXPECT_EQ(slurp(a / "sweep_L.csv"), slurp(b / "sweep_L.csv"));
    EXPECT_EQ(slurp(a / "threshold.csv"), slurp(b / "threshold.csv"));
}

TEST(Commands, ThreadVariableValidated) {
    ::setenv("TOOL_THREADS", "0", 1);
    EXPECT_THROW(tool_threads(), ValidationError);
    ::setenv("TOOL_THREADS", "two", 1);
    EXPECT_THROW(tool_threads(), ValidationError);
    ::unsetenv("TOOL_THREADS");
    EXPECT_GE(tool_threads(), 1u);
}

TEST(Commands, ContinueAndSimulateWriteTheirFiles) {
    std::ostringstream log;
    const auto dir = scratch("continue");
    auto cfg = small_config(dir);
    ASSERT_EQ(cmd_continue_k(cfg, log), exit_ok) << log.str();
    EXPECT_TRUE(std::filesystem::exists(dir / "continuation.csv"));
    EXPECT_TRUE(std::filesystem::exists(dir / "u1u2.csv"));
    for (auto sim : {Simulation::semilinear, Simulation::quasilinear, Simulation::system}) {
        cfg.simulate = sim;
        ASSERT_EQ(cmd_simulate(cfg, log), exit_ok) << log.str();
        const auto probe = slurp(dir / "probe.csv");
        EXPECT_EQ(probe.substr(0, 20), "t,perturbation_norm\n");
    }
}

TEST(Commands, ExitCodeMapping) {
    std::ostringstream err;
    EXPECT_EQ(run_command([] () -> int { throw ParseError(3, "bad"); }, err), exit_validation);
    EXPECT_EQ(run_command([] () -> int { throw ValidationError("n", "bad"); }, err), exit_validation);
    EXPECT_EQ(run_command([] () -> int { throw SolverFailure("stuck", 1.0, 5); }, err), exit_solver);
    EXPECT_EQ(run_command([] { return 0; }, err), exit_ok);
}
