#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "regcal/config.hpp"
#include "regcal/io.hpp"

namespace regcal {
namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const config_error& e) {
    return e.what();
  }
  return "";
}

TEST(ConfigTest, SeedOnlyGivesDefaults) {
  const RunConfig c = parse_config("seed = 42\n");
  EXPECT_EQ(c.scenario.seed, 42u);
  EXPECT_EQ(c.scenario.steps, 4096u);
  EXPECT_EQ(c.scenario.horizon, 1.0);
  EXPECT_EQ(c.scenario.members, 200u);
  EXPECT_EQ(c.scenario.ladder, EpsLadder::standard());
  EXPECT_TRUE(c.scenarios.empty());
}

TEST(ConfigTest, CommentsAndWhitespace) {
  const RunConfig c = parse_config(
      "# a run\n\n  seed=7   # trailing\ngrid_n = 512\n eps_ladder = 32, 16,8 \n"
      "scenarios = volterra_qv,levy_area_bm\nquadrature = grid\n");
  EXPECT_EQ(c.scenario.seed, 7u);
  EXPECT_EQ(c.scenario.steps, 512u);
  EXPECT_EQ(c.scenario.ladder, (EpsLadder{{32, 16, 8}}));
  EXPECT_EQ(c.scenarios, (std::vector<std::string>{"volterra_qv", "levy_area_bm"}));
  EXPECT_EQ(c.scenario.quadrature, Quadrature::grid);
}

TEST(ConfigTest, Errors) {
  EXPECT_NE(error_of("seed = 1\ngrid_n = 1\n").find("grid_n"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nseed = 2\n").find("duplicate key 'seed'"), std::string::npos);
  const std::string unknown = error_of("seed = 1\ncolour = red\nsize = 3\n");
  EXPECT_NE(unknown.find("colour"), std::string::npos);
  EXPECT_NE(unknown.find("size"), std::string::npos);
  EXPECT_NE(error_of("grid_n = 64\n").find("seed"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nhorizon = soon\n").find("horizon"), std::string::npos);
  EXPECT_NE(error_of("seed = -3\n").find("seed"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nensemble = 2.5\n").find("ensemble"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nquadrature = midpoint\n").find("quadrature"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\neps_ladder = 4,8\n").find("eps_ladder"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nscenarios = nope\n").find("nope"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\njust text\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nthreshold.x = 1\n").find("threshold"), std::string::npos);
}

TEST(ConfigTest, RoundTripIsLossless) {
  RunConfig c;
  c.scenario.seed = 18446744073709551615ULL;
  c.scenario.horizon = 0.1 + 0.2;
  c.scenario.steps = 2048;
  c.scenario.members = 64;
  c.scenario.ladder = EpsLadder{{100, 10, 5}};
  c.scenario.quadrature = Quadrature::grid;
  c.scenario.relative_threshold = 1.0 / 3.0;
  c.scenario.lattice_pitch = 0.07;
  c.scenario.cantor_depth = 12;
  c.scenario.curve_members = 3;
  c.scenario.curve_points = 100;
  c.scenario.thresholds["volterra_qv.bracket_at_T_abs_error"] = 0.125;
  c.scenarios = {"fbm_qv_sweep", "bv_counterexample"};
  c.out = "some/dir";
  const std::string text = to_config_text(c);
  const RunConfig back = parse_config(text);
  EXPECT_TRUE(back == c);
  EXPECT_EQ(to_config_text(back), text);
  EXPECT_TRUE(parse_config(to_config_text(parse_config("seed = 3\n"))) ==
              parse_config("seed = 3\n"));
}

TEST(IoTest, SummaryCsvRoundTrip) {
  std::vector<experiments::SummaryRow> rows{
      {"volterra_qv", "bracket_at_T", 0.49, 0.5, 0.1, experiments::Check::within,
       experiments::TargetSource::analytic}};
  std::ostringstream o;
  io::write_summary_csv(o, rows);
  EXPECT_EQ(o.str(),
            "scenario,metric,value,target,threshold,verdict\n"
            "volterra_qv,bracket_at_T,0.49,0.5,0.1,pass\n");
  const auto parsed = io::parse_summary_csv(o.str(), "x");
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].target, "0.5");
}

TEST(IoTest, CurvesAreThinnedButKeepTheEndpoint) {
  const Grid g = make_grid(10.0, 10);
  experiments::CurveSet set{"x", {{0, 0.4, sample_function(g, [](double t) { return t; })}}};
  std::ostringstream o;
  io::write_curves_csv(o, set, 4);
  EXPECT_EQ(o.str(),
            "member,eps,t,value\n0,0.4,0,0\n0,0.4,3,3\n0,0.4,6,6\n0,0.4,9,9\n0,0.4,10,10\n");
}

TEST(IoTest, ReportRejectsEmptyAndIncompleteDirectories) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "regcal-io-test";
  fs::remove_all(dir);
  fs::create_directories(dir / "volterra_qv");
  EXPECT_THROW(io::markdown_report(dir / "missing"), io::io_error);
  EXPECT_THROW(io::markdown_report(dir), io::io_error);
  io::write_file(dir / "volterra_qv" / "manifest.txt", "scenario = volterra_qv\n");
  try {
    io::markdown_report(dir);
    FAIL() << "expected an error";
  } catch (const io::io_error& e) {
    EXPECT_NE(std::string(e.what()).find("summary.csv"), std::string::npos);
  }
  io::write_file(dir / "volterra_qv" / "summary.csv",
                 "scenario,metric,value,target,threshold,verdict\n"
                 "volterra_qv,bracket_at_T,0.49,0.5,0.1,pass\n"
                 "volterra_qv,bracket_vs_target.slope,0.4,0,0,info\n");
  const std::string md = io::markdown_report(dir);
  EXPECT_NE(md.find("| volterra_qv | pass | 1/1 | bracket_vs_target 0.4 |"), std::string::npos);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace regcal
