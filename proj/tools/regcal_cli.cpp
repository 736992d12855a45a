#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "regcal/config.hpp"
#include "regcal/experiments.hpp"
#include "regcal/io.hpp"
#include "regcal/oracle.hpp"
#include "regcal/pathgen.hpp"
#include "regcal/regcalc.hpp"
#include "regcal/young.hpp"

namespace {

using namespace regcal;
namespace fs = std::filesystem;

constexpr int kExitUnmet = 1;
constexpr int kExitError = 2;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_n;
  std::optional<double> horizon;
  std::optional<std::size_t> ensemble;
  std::string ladder;
  std::string out;
  std::string quadrature;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Config file (flat key = value)");
  app->add_option("--seed", f.seed, "Master seed");
  app->add_option("--grid-n", f.grid_n, "Grid steps n");
  app->add_option("--horizon", f.horizon, "Horizon T");
  app->add_option("--ensemble", f.ensemble, "Ensemble size m");
  app->add_option("--eps-ladder", f.ladder, "Eps multiples of the grid step, e.g. 128,64,32");
  app->add_option("--out", f.out, "Output directory");
  app->add_option("--quadrature", f.quadrature, "grid or jittered")
      ->check(CLI::IsMember({"grid", "jittered"}));
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c;
  if (!f.config.empty()) {
    c = parse_config(io::read_file(f.config));
  } else if (!f.seed) {
    throw config_error("a seed is required: pass --seed or a --config file with 'seed'");
  }
  auto& s = c.scenario;
  if (f.seed) s.seed = *f.seed;
  if (f.grid_n) s.steps = *f.grid_n;
  if (f.horizon) s.horizon = *f.horizon;
  if (f.ensemble) s.members = *f.ensemble;
  if (!f.ladder.empty()) s.ladder = parse_ladder(f.ladder);
  if (!f.out.empty()) c.out = f.out;
  if (!f.quadrature.empty()) s.quadrature = parse_quadrature(f.quadrature);
  validate(c);
  return c;
}

// ---------------------------------------------------------------------------
// Path generation shared by the module subcommands
// ---------------------------------------------------------------------------

struct ProcessFlags {
  std::string process = "bm";
  double hurst = 0.5;
};

void add_process(CLI::App* app, ProcessFlags& p, std::vector<std::string> kinds) {
  app->add_option("--process", p.process, "Process to sample")
      ->check(CLI::IsMember(std::move(kinds)));
  app->add_option("--hurst", p.hurst, "Hurst index for fbm")->check(CLI::Range(0.01, 0.99));
}

SamplePath sample(const ProcessFlags& p, const Grid& g, Stream s) {
  if (p.process == "bm") return sample_bm(g, s);
  if (p.process == "fbm") return sample_fbm(g, p.hurst, s);
  if (p.process == "volterra") return sample_volterra(g, s, s).x;
  if (p.process == "cantor") {
    if (g.horizon() != 1.0) throw config_error("the cantor time change needs horizon 1");
    return time_change(sample_bm(g, s), [](double t) { return cantor_function(t); });
  }
  if (p.process == "euler") {
    return sample_sde_euler(
        g, [](double, double x) { return 1.0 + 0.5 * std::sin(x); },
        [](double, double x) { return -0.5 * x; }, 0.0, s);
  }
  throw config_error("unknown process '" + p.process + "'");
}

void print_report(const std::string& title, const ConvergenceReport& rep) {
  std::cout << title << ": verdict " << to_string(rep.verdict) << ", slope "
            << io::format_double(rep.fit.slope) << ", delta " << io::format_double(rep.delta)
            << '\n';
  io::write_report_csv(std::cout, rep);
}

void emit_family(const fs::path& file, const std::vector<EpsFamily>& fams, std::size_t members,
                 std::size_t points) {
  io::write_file(file, io::render([&](std::ostream& o) {
                   o << "member,eps,t,value\n";
                   for (std::size_t m = 0; m < std::min(members, fams.size()); ++m) {
                     for (std::size_t k = 0; k < fams[m].eps.size(); ++k) {
                       const auto& c = fams[m].curves[k];
                       io::write_curve_rows(o, m, fams[m].eps[k], c,
                                            io::thin_stride(c.grid(), points));
                     }
                   }
                 }));
}

void emit_report(const fs::path& file, const ConvergenceReport& rep) {
  io::write_file(file, io::render([&](std::ostream& o) { io::write_report_csv(o, rep); }));
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& c, const ProcessFlags& p) {
  const Grid g = c.scenario.grid();
  io::ensure_dir(c.out);
  const fs::path file = fs::path(c.out) / ("simulate_" + p.process + ".csv");
  io::write_file(file, io::render([&](std::ostream& o) {
                   o << "member,t,value\n";
                   for (std::size_t m = 0; m < c.scenario.members; ++m) {
                     const SamplePath x = sample(p, g, Stream{c.scenario.seed, m});
                     for (std::size_t j = 0; j < g.size(); ++j) {
                       o << m << ',' << io::format_double(g.time(j)) << ','
                         << io::format_double(x[j]) << '\n';
                     }
                   }
                 }));
  std::cout << file.string() << '\n';
  return 0;
}

int cmd_integrate(const RunConfig& c, const ProcessFlags& p, const std::string& functional,
                  const std::string& integrand) {
  const auto& s = c.scenario;
  const Grid g = s.grid();
  std::vector<EpsFamily> fams;
  std::vector<SamplePath> refs;
  for (std::size_t m = 0; m < s.members; ++m) {
    const Stream st{s.seed, m};
    const SamplePath x = sample(p, g, st.child(1));
    const SamplePath y = integrand == "self"          ? x
                         : integrand == "unit"        ? SamplePath(g, 1.0)
                                                      : sample_bm(g, st.child(2));
    const QuadratureRule rule =
        s.quadrature == Quadrature::grid ? QuadratureRule{} : jittered(st.child(3));
    fams.push_back(make_family(g, s.ladder, [&](double e) {
      if (functional == "forward") return forward_eps(y, x, e, rule);
      if (functional == "backward") return backward_eps(y, x, e, rule);
      return symmetric_eps(y, x, e, rule);
    }));
    if (functional == "forward") refs.push_back(ito_sum(y, x));
  }
  UcpOptions opts;
  opts.relative_delta = s.relative_threshold;
  const auto rep = ucp_limit(fams, refs, opts);
  io::ensure_dir(c.out);
  const fs::path out(c.out);
  emit_family(out / "curves_integrate.csv", fams, s.curve_members, s.curve_points);
  emit_report(out / "report_integrate.csv", rep);
  print_report(functional + (refs.empty() ? " (Cauchy)" : " vs Ito sums"), rep);
  return 0;
}

int cmd_qv(const RunConfig& c, const ProcessFlags& p) {
  const auto& s = c.scenario;
  const Grid g = s.grid();
  std::optional<SamplePath> target;
  if (p.process == "bm" || (p.process == "fbm" && p.hurst == 0.5)) {
    target = sample_function(g, [](double t) { return t; });
  } else if (p.process == "fbm" && p.hurst > 0.5) {
    target = SamplePath(g, 0.0);
  } else if (p.process == "volterra") {
    target = sample_function(g, [](double t) { return 0.5 * t * t; });
  }
  std::vector<EpsFamily> fams;
  for (std::size_t m = 0; m < s.members; ++m) {
    const SamplePath x = sample(p, g, Stream{s.seed, m}.child(1));
    fams.push_back(make_family(g, s.ladder, [&](double e) { return cov_eps(x, x, e); }));
  }
  UcpOptions opts;
  opts.delta = s.relative_threshold * std::max(1.0, target ? target->sup_abs() : 1.0);
  const std::vector<SamplePath> refs =
      target ? std::vector<SamplePath>(fams.size(), *target) : std::vector<SamplePath>{};
  const auto rep = ucp_limit(fams, refs, opts);
  io::ensure_dir(c.out);
  const fs::path out(c.out);
  emit_family(out / "curves_qv.csv", fams, s.curve_members, s.curve_points);
  emit_report(out / "report_qv.csv", rep);
  print_report("bracket of " + p.process + (target ? " vs known limit" : " (Cauchy)"), rep);
  return 0;
}

int cmd_levy(const RunConfig& c) {
  const auto& s = c.scenario;
  const Grid g = s.grid();
  std::vector<EpsFamily> fams;
  std::vector<SamplePath> refs;
  for (std::size_t m = 0; m < s.members; ++m) {
    const Stream st{s.seed, m};
    const SamplePath x = sample_bm(g, st.child(1));
    const SamplePath y = sample_bm(g, st.child(2));
    fams.push_back(make_family(g, s.ladder, [&](double e) { return levy_area_eps(x, y, e); }));
    refs.push_back(
        zip_paths(ito_sum(x, y), ito_sum(y, x), [](double a, double b) { return a - b; }));
  }
  UcpOptions opts;
  opts.relative_delta = s.relative_threshold;
  const auto rep = ucp_limit(fams, refs, opts);
  io::ensure_dir(c.out);
  const fs::path out(c.out);
  emit_family(out / "curves_levy.csv", fams, s.curve_members, s.curve_points);
  emit_report(out / "report_levy.csv", rep);
  print_report("Levy area vs Ito sums", rep);
  return 0;
}

int cmd_young(const RunConfig& c, double hx, double hy, double rho) {
  const auto& s = c.scenario;
  const Grid g = s.grid();
  const double alpha = hx - 0.01, beta = hy - 0.01;
  check_young_exponents(alpha, beta);
  io::ensure_dir(c.out);
  const fs::path out(c.out);
  std::vector<HolderEstimate> holders;
  std::ostringstream bounds, curves;
  bounds << "member,ratio,a_star,sup_integral,holder_x,holder_y\n";
  curves << "member,eps,t,value\n";
  double worst = 0.0;
  for (std::size_t m = 0; m < s.members; ++m) {
    const Stream st{s.seed, m};
    const SamplePath x = sample_fbm(g, hx, st.child(1));
    const SamplePath y = sample_fbm(g, hy, st.child(2));
    const auto rep = young_bound_report(x, y, alpha, beta, rho, s.ladder);
    worst = std::max(worst, rep.ratio);
    bounds << m << ',' << io::format_double(rep.ratio) << ',' << io::format_double(rep.a_star)
           << ',' << io::format_double(rep.sup_integral) << ','
           << io::format_double(rep.holder_x) << ',' << io::format_double(rep.holder_y) << '\n';
    if (m < s.curve_members) {
      holders.push_back(holder_norm(x, alpha));
      holders.push_back(holder_norm(y, beta));
      const auto yi = young_integral(y, x, alpha, beta, s.ladder);
      io::write_curve_rows(curves, m, s.ladder.finest(g), yi.curve,
                           io::thin_stride(g, s.curve_points));
    }
  }
  io::write_file(out / "young_bound.csv", bounds.str());
  io::write_file(out / "curves_young.csv", curves.str());
  io::write_file(out / "holder.csv",
                 io::render([&](std::ostream& o) { io::write_holder_csv(o, holders); }));
  std::cout << "max bound ratio over " << s.members << " pairs: " << io::format_double(worst)
            << '\n';
  return 0;
}

int cmd_run(RunConfig c, const std::vector<std::string>& ids, bool all) {
  if (!ids.empty()) c.scenarios = ids;
  if (all) c.scenarios.clear();
  validate(c);
  std::vector<std::string> selected = c.scenarios;
  if (selected.empty()) {
    for (const auto& e : experiments::scenarios()) selected.emplace_back(e.id);
  }
  const fs::path out(c.out);
  io::ensure_dir(out);
  io::write_file(out / "config.txt", to_config_text(c, false));
  std::vector<experiments::SummaryRow> rows;
  bool ok = true;
  for (const auto& id : selected) {
    const auto res = experiments::run_scenario(id, c.scenario);
    io::write_scenario(out, res, c.scenario.curve_points);
    rows.insert(rows.end(), res.rows.begin(), res.rows.end());
    ok = ok && res.meets_expectation();
    std::cout << id << ": " << (res.meets_expectation() ? "meets expectation" : "FAILS expectation")
              << '\n';
  }
  io::write_file(out / "summary.csv",
                 io::render([&](std::ostream& o) { io::write_summary_csv(o, rows); }));
  io::write_summary_csv(std::cout, rows);
  return ok ? 0 : kExitUnmet;
}

int cmd_report(const std::string& dir) {
  const std::string md = io::markdown_report(dir);
  io::write_file(fs::path(dir) / "report.md", md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized stochastic calculus on sampled paths"};
  app.require_subcommand(1);

  CommonFlags sim_f, int_f, qv_f, levy_f, young_f, run_f, scen_f;
  ProcessFlags sim_p, int_p, qv_p;

  auto* sim = app.add_subcommand("simulate", "Sample paths and write member,t,value CSV");
  add_common(sim, sim_f);
  add_process(sim, sim_p, {"bm", "fbm", "volterra", "cantor", "euler"});

  std::string functional = "forward", integrand = "self";
  auto* integ = app.add_subcommand("integrate", "Eps-regularized integrals along the ladder");
  add_common(integ, int_f);
  add_process(integ, int_p, {"bm", "fbm", "cantor", "euler"});
  integ->add_option("--functional", functional)
      ->check(CLI::IsMember({"forward", "backward", "symmetric"}));
  integ->add_option("--integrand", integrand, "self, unit, or an independent bm")
      ->check(CLI::IsMember({"self", "unit", "independent"}));

  auto* qv = app.add_subcommand("qv", "Eps-covariation of a process with itself");
  add_common(qv, qv_f);
  add_process(qv, qv_p, {"bm", "fbm", "volterra", "cantor", "euler"});

  auto* levy = app.add_subcommand("levy", "Levy area of two independent Brownian motions");
  add_common(levy, levy_f);

  double hx = 0.7, hy = 0.7, rho = 0.2;
  auto* young = app.add_subcommand("young", "Young integrals and bound ratios for fBm pairs");
  add_common(young, young_f);
  young->add_option("--hurst-x", hx)->check(CLI::Range(0.01, 0.99));
  young->add_option("--hurst-y", hy)->check(CLI::Range(0.01, 0.99));
  young->add_option("--rho", rho);

  std::string scenario_list;
  bool all = false;
  auto add_run_flags = [&](CLI::App* a, CommonFlags& f) {
    add_common(a, f);
    a->add_option("--scenario", scenario_list, "Scenario id(s), comma separated");
    a->add_flag("--all", all, "Run every scenario");
  };
  auto* scenario = app.add_subcommand("scenario", "Scenario commands");
  scenario->require_subcommand(1);
  auto* scen_run = scenario->add_subcommand("run", "Run scenarios and write outputs");
  add_run_flags(scen_run, scen_f);
  auto* run = app.add_subcommand("run", "Same as 'scenario run'");
  add_run_flags(run, run_f);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Markdown summary of a run directory");
  report->add_option("dir", report_dir, "Run directory");
  report->add_option("--out", report_dir, "Run directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(resolve(sim_f), sim_p);
    if (integ->parsed()) return cmd_integrate(resolve(int_f), int_p, functional, integrand);
    if (qv->parsed()) return cmd_qv(resolve(qv_f), qv_p);
    if (levy->parsed()) return cmd_levy(resolve(levy_f));
    if (young->parsed()) return cmd_young(resolve(young_f), hx, hy, rho);
    if (scen_run->parsed() || run->parsed()) {
      const CommonFlags& f = run->parsed() ? run_f : scen_f;
      const RunConfig c = resolve(f);
      if (scenario_list.empty() && !all && f.config.empty()) {
        throw config_error("choose scenarios with --scenario ID[,ID...] or --all");
      }
      return cmd_run(c, detail::split_list(scenario_list), all);
    }
    if (report->parsed()) {
      if (report_dir.empty()) throw config_error("report needs a run directory");
      return cmd_report(report_dir);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
