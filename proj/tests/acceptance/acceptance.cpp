// Acceptance suite: one PASS/FAIL line per criterion.
//
//   regcal-acceptance          run all twelve
//   regcal-acceptance 3 7      run the listed criteria
//
// Exit status is 0 iff every selected criterion passes.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "regcal/experiments.hpp"
#include "regcal/io.hpp"
#include "regcal/oracle.hpp"
#include "regcal/pathgen.hpp"
#include "regcal/regcalc.hpp"
#include "regcal/young.hpp"

namespace {

using namespace regcal;
namespace ex = regcal::experiments;

constexpr std::uint64_t kSeed = 20240611;
constexpr std::size_t kSteps = 4096;
constexpr std::size_t kMembers = 200;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Grid grid() { return make_grid(1.0, kSteps); }
EpsLadder ladder() { return EpsLadder::standard(); }

ex::ScenarioConfig scenario_config() {
  ex::ScenarioConfig c;
  c.seed = kSeed;
  c.steps = kSteps;
  c.members = kMembers;
  c.ladder = ladder();
  return c;
}

const ex::SummaryRow& row(const ex::ScenarioResult& r, const std::string& metric) {
  for (const auto& x : r.rows) {
    if (x.metric == metric) return x;
  }
  throw std::runtime_error("scenario " + r.id + " has no metric " + metric);
}

// Pass iff every listed row passes; detail lists value vs threshold.
Outcome rows_outcome(const ex::ScenarioResult& r, const std::vector<std::string>& metrics) {
  Outcome o{true, ""};
  for (const auto& m : metrics) {
    const auto& x = row(r, m);
    o.pass = o.pass && x.passed();
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += m + "=" + fmt(x.value);
    switch (x.check) {
      case ex::Check::at_most: o.detail += " (<= " + fmt(x.threshold) + ")"; break;
      case ex::Check::at_least: o.detail += " (>= " + fmt(x.threshold) + ")"; break;
      case ex::Check::within:
        o.detail += " (" + fmt(x.target) + " +- " + fmt(x.threshold) + ")";
        break;
      case ex::Check::info: break;
    }
    o.detail += x.passed() ? "" : " FAIL";
  }
  return o;
}

// Four rough and smooth indices, so the fBm factor cache never evicts.
SamplePath path_for(std::size_t m, Stream s) {
  constexpr double kHurst[] = {0.3, 0.4, 0.6, 0.7};
  return m % 2 == 0 ? sample_bm(grid(), s) : sample_fbm(grid(), kHurst[(m / 2) % 4], s);
}

double rel_err(double a, double b, double scale) { return std::abs(a - b) / (1.0 + scale); }

// ---------------------------------------------------------------------------

Outcome c1_exact_algebra() {
  const Grid g = grid();
  const auto eps = ladder().values(g);
  const double tol = 1e-12;
  double worst_sym = 0, worst_bil = 0, worst_tel = 0;
  std::size_t cov_asym = 0, levy_asym = 0, levy_diag = 0;
  for (std::size_t m = 0; m < kMembers; ++m) {
    const Stream s{kSeed, m};
    const SamplePath x = path_for(m, s.child(1));
    const SamplePath y = path_for(m + 1, s.child(2));
    const SamplePath z = sample_bm(g, s.child(3));
    const SamplePath comb = zip_paths(x, z, [](double a, double b) { return 2.5 * a - 0.75 * b; });
    for (double e : eps) {
      const auto f = forward_eps(y, x, e), b = backward_eps(y, x, e), sy = symmetric_eps(y, x, e);
      const auto cxy = cov_eps(x, y, e), cyx = cov_eps(y, x, e);
      const auto cc = cov_eps(comb, y, e), cz = cov_eps(z, y, e);
      const auto lxy = levy_area_eps(x, y, e), lyx = levy_area_eps(y, x, e);
      const auto lxx = levy_area_eps(x, x, e);
      for (std::size_t j = 0; j < g.size(); ++j) {
        worst_sym = std::max(worst_sym,
                             rel_err(sy[j], 0.5 * (f[j] + b[j]), std::abs(f[j]) + std::abs(b[j])));
        worst_bil = std::max(worst_bil, rel_err(cc[j], 2.5 * cxy[j] - 0.75 * cz[j],
                                                std::abs(cc[j]) + std::abs(cxy[j])));
        cov_asym += cxy[j] != cyx[j];
        levy_asym += lxy[j] != -lyx[j];
        levy_diag += lxx[j] != 0.0;
      }
    }
    for (std::size_t stride : {1u, 7u, 64u}) {
      const auto tel = ito_sum([](double) { return 1.0; }, x, Partition::every(g, stride));
      for (std::size_t j = 0; j < g.size(); ++j) {
        worst_tel = std::max(worst_tel, rel_err(tel[j], x[j] - x[0], std::abs(x[j])));
      }
    }
  }
  Outcome o;
  o.pass = worst_sym < tol && worst_bil < tol && worst_tel < tol && cov_asym == 0 &&
           levy_asym == 0 && levy_diag == 0;
  o.detail = "symmetric " + fmt(worst_sym) + ", bilinear " + fmt(worst_bil) + ", telescoping " +
             fmt(worst_tel) + " (tol " + fmt(tol) + "); exact mismatches: cov " +
             std::to_string(cov_asym) + ", levy " + std::to_string(levy_asym) + ", diagonal " +
             std::to_string(levy_diag);
  return o;
}

Outcome c2_kunita_watanabe() {
  const Grid g = grid();
  const auto eps = ladder().values(g);
  std::size_t checked = 0, violations = 0;
  for (std::size_t m = 0; m < kMembers; ++m) {
    const Stream s{kSeed, m};
    const SamplePath x = sample_bm(g, s.child(1));
    const SamplePath y = m % 2 ? sample_fbm(g, 0.7, s.child(2)) : sample_bm(g, s.child(2));
    const SamplePath yy = zip_paths(x, y, [](double a, double b) { return 0.6 * a + b; });
    for (double e : eps) {
      const auto cxy = cov_eps(x, yy, e), cxx = cov_eps(x, x, e), cyy = cov_eps(yy, yy, e);
      for (std::size_t j = 0; j < g.size(); ++j) {
        ++checked;
        if (std::abs(cxy[j]) > std::sqrt(cxx[j] * cyy[j]) * (1.0 + 1e-12)) ++violations;
      }
    }
  }
  return {violations == 0, std::to_string(checked - violations) + "/" + std::to_string(checked) +
                               " (path, eps, t) triples satisfy the inequality"};
}

Outcome c3_brownian_qv() {
  const Grid g = grid();
  const auto eps = ladder().values(g);
  std::vector<std::vector<double>> gaps(eps.size());
  for (std::size_t m = 0; m < kMembers; ++m) {
    const SamplePath w = sample_bm(g, Stream{kSeed, m}.child(1));
    for (std::size_t k = 0; k < eps.size(); ++k) {
      gaps[k].push_back(std::abs(cov_eps(w, w, eps[k]).back() - 1.0));
    }
  }
  std::vector<double> med;
  for (auto& v : gaps) med.push_back(stats::median(v));
  const auto fit = stats::fit_loglog(eps, med);
  return {med.back() < 0.1 && fit.slope > 0.0,
          "median |C(W,W)(1) - 1| at finest eps " + fmt(med.back()) +
              " (< 0.1); decay slope " + fmt(fit.slope) + " (> 0)"};
}

Outcome c4_ito_formulas() {
  const Grid g = grid();
  std::vector<SamplePath> ws, es;
  for (std::size_t m = 0; m < kMembers; ++m) {
    const Stream s{kSeed, m};
    ws.push_back(sample_bm(g, s.child(1)));
    es.push_back(sample_sde_euler(
        g, [](double, double x) { return 1.0 + 0.5 * std::sin(x); },
        [](double, double x) { return -0.5 * x; }, 0.0, s.child(2)));
  }
  const SmoothFunction square{[](double x) { return x * x; }, [](double x) { return 2 * x; },
                              [](double) { return 2.0; }};
  const SmoothFunction cosine{[](double x) { return std::cos(x); },
                              [](double x) { return -std::sin(x); },
                              [](double x) { return -std::cos(x); }};
  const SmoothFunction half_abs{[](double x) { return 0.5 * x * std::abs(x); },
                                [](double x) { return std::abs(x); }, {}};
  Outcome o{true, ""};
  auto add = [&](const std::string& name, const ConvergenceReport& rep, double scale,
                 double rel, bool need_decay) {
    const double ratio = rep.finest().median / scale;
    const bool decays = rep.finest().median < rep.coarsest().median && rep.fit.slope > 0.0;
    const bool ok = ratio < rel && (!need_decay || decays);
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += name + " " + fmt(100 * ratio) + "% (< " + fmt(100 * rel) + "%)";
    if (need_decay) o.detail += ", slope " + fmt(rep.fit.slope);
    o.detail += ok ? "" : " FAIL";
  };
  add("C2 x^2 on BM", ito_formula_residual_c2(square, ws, ladder()), response_scale(square, ws),
      0.02, false);
  add("C2 cos on BM", ito_formula_residual_c2(cosine, ws, ladder()), response_scale(cosine, ws),
      0.02, false);
  add("C1 x|x|/2 on BM", ito_formula_residual_c1(half_abs, ws, ladder()),
      response_scale(half_abs, ws), 0.05, true);
  add("C1 x|x|/2 on Euler", ito_formula_residual_c1(half_abs, es, ladder()),
      response_scale(half_abs, es), 0.05, true);
  return o;
}

Outcome c5_cantor() {
  const auto r = ex::run_cantor_counterexample(scenario_config());
  return rows_outcome(r, {"forward_sup_ratio_max", "ito_target_gap", "gap_over_forward"});
}

Outcome c6_bv() {
  const auto r = ex::run_bv_counterexample(scenario_config());
  return rows_outcome(r, {"forward_at_T_max", "stieltjes_at_T"});
}

Outcome c7_rational() {
  const auto r = ex::run_rational_indicator(scenario_config());
  return rows_outcome(r, {"rational_partition_error", "shifted_partition_sum",
                          "forward_sup_ratio"});
}

Outcome c8_volterra() {
  const auto r = ex::run_volterra_qv(scenario_config());
  return rows_outcome(r, {"bracket_at_T_abs_error"});
}

Outcome c9_fbm_sweep() {
  const auto r = ex::run_fbm_qv_sweep(scenario_config());
  return rows_outcome(r, {"h070_at_T", "h050_at_T", "h040_monotone_growth", "h040_growth_ratio"});
}

Outcome c10_levy() {
  const auto r = ex::run_levy_area_bm(scenario_config());
  return rows_outcome(r, {"area_vs_symmetric_form", "area_vs_forward_difference",
                          "symmetric_form_vs_forward_difference", "area_vs_ito_oracle"});
}

Outcome c11_young() {
  Outcome o{true, ""};
  auto note = [&](bool ok, const std::string& text) {
    o.pass = o.pass && ok;
    if (!o.detail.empty()) o.detail += "; ";
    o.detail += text + (ok ? "" : " FAIL");
  };

  // Smoothing lemma: N_{1/2}(Z_eps - Z) ~ eps^{H - 1/2} for fBm H = 0.6.
  const Grid g = grid();
  const auto eps = ladder().values(g);
  std::vector<std::vector<double>> norms(eps.size());
  for (std::size_t m = 0; m < kMembers; ++m) {
    const SamplePath z = sample_fbm(g, 0.6, Stream{kSeed, m}.child(1));
    for (std::size_t k = 0; k < eps.size(); ++k) {
      const SamplePath d = zip_paths(smooth_eps(z, eps[k]), z, [](double a, double b) {
        return a - b;
      });
      norms[k].push_back(holder_norm(d, 0.5).norm);
    }
  }
  std::vector<double> med;
  for (auto& v : norms) med.push_back(stats::median(v));
  const double slope = stats::fit_loglog(eps, med).slope;
  note(std::abs(slope - 0.1) <= 0.15, "smoothing slope " + fmt(slope) + " (0.1 +- 0.15)");

  // C^1 inputs: error against the exact integral, and its halving with the grid step.
  auto c1_error = [](std::size_t n) {
    const Grid gg = make_grid(1.0, n);
    const SamplePath x = sample_function(gg, [](double t) { return t * t; });
    const SamplePath y = sample_function(gg, [](double t) { return std::cos(t); });
    const SamplePath exact = sample_function(
        gg, [](double t) { return 2.0 * (t * std::sin(t) + std::cos(t) - 1.0); });
    return sup_distance(young_integral(y, x, 1.0, 1.0).curve, exact);
  };
  const double e_fine = c1_error(kSteps), e_coarse = c1_error(kSteps / 2);
  const double per_step = e_fine * static_cast<double>(kSteps);
  const double halving = e_coarse / e_fine;
  // sup|Y| sup|X'| = 2 and sup|Y| sup|X''| = 2 here, so 10 steps' worth is generous.
  note(per_step <= 10.0 && halving > 1.6 && halving < 2.4,
       "C1 error " + fmt(per_step) + " grid steps, ratio on grid halving " + fmt(halving));

  const double lin = holder_norm(sample_function(g, [](double t) { return t; }), 1.0).norm;
  const double cst = holder_norm(SamplePath(g, 1.5), 0.3).norm;
  const auto sq = holder_norm(sample_function(g, [](double t) { return std::sqrt(t); }), 0.5);
  note(std::abs(lin - 1.0) < 1e-12 && cst == 0.0 && std::abs(sq.norm - 1.0) < 1e-12 &&
           sq.s_star == 0.0,
       "holder t:" + fmt(lin) + " const:" + fmt(cst) + " sqrt:" + fmt(sq.norm) + " at s*=" +
           fmt(sq.s_star));
  return o;
}

Outcome c12_determinism() {
  namespace fs = std::filesystem;
  const fs::path base = fs::temp_directory_path() / ("regcal-acceptance-" +
                                                     std::to_string(::getpid()));
  const auto cfg = scenario_config();
  std::size_t files = 0, differing = 0;
  for (const auto& e : ex::scenarios()) {
    const auto a = io::write_scenario(base / "a", e.run(cfg), cfg.curve_points);
    const auto b = io::write_scenario(base / "b", e.run(cfg), cfg.curve_points);
    if (a.size() != b.size()) {
      ++differing;
      continue;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      ++files;
      if (io::read_file(a[i]) != io::read_file(b[i])) ++differing;
    }
  }
  fs::remove_all(base);
  return {differing == 0 && files > 0, std::to_string(files - differing) + "/" +
                                           std::to_string(files) +
                                           " output files byte-identical across reruns"};
}

struct Criterion {
  const char* title;
  Outcome (*run)();
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> all{
      {"exact finite-eps algebra", &c1_exact_algebra},
      {"Kunita-Watanabe inequality", &c2_kunita_watanabe},
      {"Brownian quadratic variation", &c3_brownian_qv},
      {"Ito formula residuals", &c4_ito_formulas},
      {"Cantor counterexample", &c5_cantor},
      {"bounded-variation counterexample", &c6_bv},
      {"rational indicator", &c7_rational},
      {"Volterra bracket", &c8_volterra},
      {"fBm bracket sweep", &c9_fbm_sweep},
      {"Levy area agreement", &c10_levy},
      {"Young module", &c11_young},
      {"determinism", &c12_determinism},
  };
  return all;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) {
    char* end = nullptr;
    const long v = std::strtol(argv[i], &end, 10);
    if (*end != '\0' || v < 1 || v > static_cast<long>(criteria().size())) {
      std::fprintf(stderr, "usage: %s [criterion 1-12 ...]\n", argv[0]);
      return 2;
    }
    selected.push_back(static_cast<std::size_t>(v));
  }
  if (selected.empty()) {
    for (std::size_t i = 1; i <= criteria().size(); ++i) selected.push_back(i);
  }
  bool all_pass = true;
  for (std::size_t n : selected) {
    const auto& c = criteria()[n - 1];
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all_pass = all_pass && o.pass;
    std::printf("criterion %2zu %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return all_pass ? 0 : 1;
}
