#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::initializer_list<std::string> args) {
    std::vector<std::string> storage = {"hsnl"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : storage) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = hsnl::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> v;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) v.push_back(l);
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hsnl_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST(Cli, ValidateRiesz) {
    const auto r = run({"validate", "--kernel.family=riesz_truncated", "--kernel.s=0.5", "--kernel.d=1"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("valid=true"), std::string::npos);
    EXPECT_NE(r.out.find("# kernel.family=riesz_truncated"), std::string::npos);
}

TEST(Cli, AppendixTable) {
    const auto r = run({"appendix", "--deltas", "1e-1,1e-2,1e-3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto ls = lines(r.out);
    std::vector<std::string> rows;
    for (const auto& l : ls)
        if (!l.empty() && l[0] != '#') rows.push_back(l);
    ASSERT_GE(rows.size(), 5u);
    EXPECT_EQ(rows[0], "delta,cos_integral,sin_integral,cos_integral_unit,sin_integral_unit");
    std::istringstream last(rows[3]);
    std::vector<double> v;
    for (std::string cell; std::getline(last, cell, ',');) v.push_back(std::stod(cell));
    EXPECT_NEAR(v[0], 1e-3, 1e-18);
    EXPECT_NEAR(v[2], 2 * std::numbers::pi, 0.05);
    EXPECT_LE(std::abs(v[1]), 2 * std::numbers::pi * std::numbers::pi * 1e-3);
}

TEST(Cli, UnknownFlagNamesTheKey) {
    const auto r = run({"appendix", "--bogus", "1"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("--bogus"), std::string::npos);
}

TEST(Cli, MissingSubcommandIsConfigError) { EXPECT_EQ(run({}).code, 1); }

TEST(Cli, MalformedValuesAreConfigErrors) {
    EXPECT_EQ(run({"solve", "--n", "abc"}).code, 1);
    EXPECT_EQ(run({"solve", "--kernel.family", "gaussian"}).code, 1);
    EXPECT_EQ(run({"solve", "--nu", "0.5"}).code, 1);
    EXPECT_EQ(run({"localize", "--norm", "l3"}).code, 1);
}

TEST(Cli, DashedAliases) {
    const auto a = run({"symbol", "--kernel.family=riesz_truncated", "--xi_max=10", "--points=5"});
    const auto b = run({"symbol", "--kernel-family=riesz_truncated", "--xi-max=10", "--points=5"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ConfigEchoRoundTrip) {
    const auto dir = scratch("roundtrip");
    const auto first = run({"solve", "--kernel.family=riesz_truncated", "--n=16", "--rhs=func:sin"});
    ASSERT_EQ(first.code, 0) << first.err;
    std::ofstream(dir / "echo.cfg") << first.out;
    // the echoed header plus data rows is not a config; keep only the comment lines
    std::ofstream cfg(dir / "run.cfg");
    for (const auto& l : lines(first.out))
        if (!l.empty() && l[0] == '#') cfg << l << '\n';
    cfg.close();
    const auto again = run({"solve", "--config", (dir / "run.cfg").string()});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(again.out, first.out);
}

TEST(Cli, FlagsOverrideConfigFile) {
    const auto dir = scratch("override");
    std::ofstream(dir / "a.cfg") << "n=16\nkernel.family=local\n";
    const auto r = run({"solve", "--config", (dir / "a.cfg").string(), "--n=8"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# n=8"), std::string::npos);
    EXPECT_NE(r.out.find("unknowns=7"), std::string::npos);
}

TEST(Cli, UnknownConfigKeyRejected) {
    const auto dir = scratch("unknown");
    std::ofstream(dir / "b.cfg") << "n=16\nbogus_key=3\n";
    const auto r = run({"solve", "--config", (dir / "b.cfg").string()});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("bogus_key"), std::string::npos);
}

TEST(Cli, LocalSolveIsNodallyExact) {
    const auto r = run({"solve", "--kernel.family=local", "--n=8"});
    ASSERT_EQ(r.code, 0) << r.err;
    int checked = 0;
    for (const auto& l : lines(r.out)) {
        if (l.empty() || l[0] == '#' || l[0] == 'x' || l.find('=') != std::string::npos) continue;
        const auto comma = l.find(',');
        const double x = std::stod(l.substr(0, comma)), u = std::stod(l.substr(comma + 1));
        EXPECT_NEAR(u, 0.5 * x * (1 - x), 1e-14);
        ++checked;
    }
    EXPECT_EQ(checked, 9);
}

TEST(Cli, SameConfigSameBytesAcrossThreadCounts) {
    const auto a = run({"poincare", "--n=64", "--deltas=0.2,0.1", "--threads=1"});
    const auto b = run({"poincare", "--n=64", "--deltas=0.2,0.1", "--threads=4"});
    const auto c = run({"poincare", "--n=64", "--deltas=0.2,0.1", "--threads=4"});
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(b.out, c.out);
}

TEST(Cli, ControlWritesStateAndControlFiles) {
    const auto dir = scratch("control");
    const auto r = run({"control", "--out", dir.string(), "--n=16", "--delta=0.1"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("objective=", 0), 0u);
    const auto state = slurp(dir / "state.csv"), control = slurp(dir / "control.csv");
    EXPECT_NE(state.find("x,u\n"), std::string::npos);
    EXPECT_NE(control.find("cell,g\n"), std::string::npos);
    EXPECT_EQ(lines(control).back().rfind("15,", 0), 0u);
}

TEST(Cli, ControlNonconvergenceExitsTwo) {
    const auto dir = scratch("control_cap");
    const auto r = run({"control", "--out", dir.string(), "--n=16", "--lam=1", "--alpha=-100", "--beta=100",
                        "--max_iter=1", "--tol=1e-15"});
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("nonconvergence"), std::string::npos);
}

TEST(Cli, ControlRejectsCrossedBounds) {
    const auto dir = scratch("control_bounds");
    EXPECT_EQ(run({"control", "--out", dir.string(), "--alpha=1", "--beta=-1"}).code, 1);
}

TEST(Cli, BoundsSuitePasses) {
    const auto r = run({"bounds"});
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("violations=0"), std::string::npos);
}

TEST(Cli, BasisRandomDirection) {
    const auto r = run({"basis", "--mu=random", "--d=4", "--seed=3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("row,v_1,v_2,v_3,mu"), std::string::npos);
    EXPECT_EQ(run({"basis", "--mu=-1,0"}).code, 1);
}

TEST(Cli, AcLocalSummary) {
    const auto r = run({"ac", "--deltas=0.2,0.1", "--hs=1/16,1/32"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("param,h,l2_error"), std::string::npos);
    EXPECT_NE(r.out.find("diagonal_trend=decreasing"), std::string::npos);
}

TEST(Cli, OutputFile) {
    const auto dir = scratch("outfile");
    const auto r = run({"localize", "--deltas=0.2,0.1", "--out", (dir / "loc.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.out.rfind("fitted_rate=", 0), 0u);
    EXPECT_NE(slurp(dir / "loc.csv").find("delta,error,rate"), std::string::npos);
}
