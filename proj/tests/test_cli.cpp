#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "regcal/io.hpp"

namespace {

namespace fs = std::filesystem;
using regcal::io::read_file;

fs::path kRoot;

struct CliResult {
  int status = -1;
  std::string out;
};

CliResult cli(const std::string& args) {
  const fs::path log = kRoot / "stdout.txt";
  fs::create_directories(kRoot);
  const std::string cmd =
      std::string(REGCAL_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  return CliResult{WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, read_file(log)};
}

const std::string kSmall = "--grid-n 1024 --ensemble 30 --eps-ladder 32,16,8,4";

std::vector<fs::path> files_under(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir));
  }
  std::sort(out.begin(), out.end());
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    kRoot = fs::temp_directory_path() /
            ("regcal-cli-" + std::string(
                                 ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(kRoot);
  }
  void TearDown() override { fs::remove_all(kRoot); }
};

TEST_F(CliTest, RerunIsByteIdentical) {
  const auto a = kRoot / "a", b = kRoot / "b";
  ASSERT_EQ(cli("run --scenario cantor_counterexample --seed 42 " + kSmall + " --out " +
                a.string()).status, 0);
  ASSERT_EQ(cli("scenario run --scenario cantor_counterexample --seed 42 " + kSmall + " --out " +
                b.string()).status, 0);
  const auto fa = files_under(a), fb = files_under(b);
  ASSERT_EQ(fa, fb);
  ASSERT_GT(fa.size(), 3u);
  for (const auto& f : fa) EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
}

TEST_F(CliTest, VolterraSummaryCarriesTarget) {
  const auto out = kRoot / "v";
  const CliResult r = cli("run --scenario volterra_qv --seed 1 " + kSmall + " --out " + out.string());
  EXPECT_EQ(r.status, 0) << r.out;
  const std::string summary = read_file(out / "volterra_qv" / "summary.csv");
  EXPECT_NE(summary.find("volterra_qv,bracket_at_T,"), std::string::npos);
  EXPECT_NE(summary.find(",0.5,0.1,pass"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "volterra_qv" / "report_bracket_vs_target.csv"));
  EXPECT_TRUE(fs::exists(out / "volterra_qv" / "curves_bracket.csv"));
  EXPECT_EQ(read_file(out / "volterra_qv" / "curves_bracket.csv").rfind("member,eps,t,value\n", 0),
            0u);
}

TEST_F(CliTest, AllScenariosGiveOneReportRowEach) {
  const auto out = kRoot / "all";
  const CliResult r = cli("run --all --seed 5 " + kSmall + " --out " + out.string());
  EXPECT_TRUE(r.status == 0 || r.status == 1) << r.out;
  const CliResult rep = cli("report " + out.string());
  ASSERT_EQ(rep.status, 0) << rep.out;
  const std::string head = rep.out.substr(0, rep.out.find("\n\n| scenario | metric"));
  std::size_t rows = 0;
  for (const char* id :
       {"cantor_counterexample", "bv_counterexample", "rational_indicator", "substitution",
        "volterra_qv", "independence_bracket", "fbm_qv_sweep", "levy_area_bm"}) {
    EXPECT_NE(head.find(std::string("| ") + id + " |"), std::string::npos) << id;
    ++rows;
  }
  EXPECT_EQ(rows, 8u);
  EXPECT_NE(rep.out.find("| scenario | metric | value | target | threshold | verdict |"),
            std::string::npos);
  EXPECT_TRUE(fs::exists(out / "report.md"));
}

TEST_F(CliTest, ExitStatusFollowsVerdicts) {
  const auto out = kRoot / "x";
  EXPECT_EQ(cli("run --scenario bv_counterexample --seed 3 " + kSmall + " --out " +
                out.string()).status, 0);
  regcal::io::write_file(kRoot / "strict.cfg",
                         "seed = 3\nthreshold.bv_counterexample.forward_at_T_max = 0\n"
                         "scenarios = bv_counterexample\n");
  EXPECT_EQ(cli("run --config " + (kRoot / "strict.cfg").string() + " --out " + out.string())
                .status, 1);
}

TEST_F(CliTest, Errors) {
  EXPECT_EQ(cli("run --scenario nope --seed 1 --out " + (kRoot / "e").string()).status, 2);
  EXPECT_EQ(cli("run --scenario volterra_qv --out " + (kRoot / "e").string()).status, 2);
  EXPECT_EQ(cli("run --scenario cantor_counterexample --seed 1 --quadrature grid " + kSmall +
                " --out " + (kRoot / "e").string()).status, 2);
  fs::create_directories(kRoot / "empty");
  EXPECT_NE(cli("report " + (kRoot / "empty").string()).status, 0);
  regcal::io::write_file(kRoot / "blocker", "not a directory");
  EXPECT_EQ(cli("run --scenario bv_counterexample --seed 1 --out " +
                (kRoot / "blocker" / "sub").string()).status, 2);
}

TEST_F(CliTest, ModuleSubcommands) {
  const auto out = kRoot / "m";
  const std::string common = " --seed 9 " + kSmall + " --out " + out.string();
  ASSERT_EQ(cli("simulate --process fbm --hurst 0.7" + common).status, 0);
  EXPECT_EQ(read_file(out / "simulate_fbm.csv").rfind("member,t,value\n0,0,0\n", 0), 0u);
  const CliResult q = cli("qv --process bm" + common);
  ASSERT_EQ(q.status, 0) << q.out;
  EXPECT_NE(q.out.find("eps,median_D,p90_D,exceed_frac"), std::string::npos);
  EXPECT_EQ(cli("integrate --functional forward --integrand self" + common).status, 0);
  EXPECT_EQ(cli("levy" + common).status, 0);
  EXPECT_EQ(cli("young --hurst-x 0.7 --hurst-y 0.7 --rho 0.2" + common).status, 0);
  EXPECT_EQ(read_file(out / "holder.csv").rfind("alpha,N_alpha,s_star,t_star\n", 0), 0u);
}

}  // namespace
