#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "regcal/grid.hpp"
#include "regcal/random.hpp"
#include "regcal/stats.hpp"

namespace regcal {

// ---------------------------------------------------------------------------
// epsilon handling
// ---------------------------------------------------------------------------

/// Smallest admissible epsilon, in grid steps.
inline constexpr std::size_t kMinEpsSteps = 4;

/// Converts eps to a number of grid steps; eps must be k * dt with k >= 4.
inline std::size_t eps_steps(const Grid& grid, double eps) {
  const double ratio = eps / grid.step();
  const double k = std::round(ratio);
  if (!(eps > 0.0) || std::abs(ratio - k) > 1e-9 * std::max(1.0, k)) {
    throw std::invalid_argument("eps=" + std::to_string(eps) +
                                " is not an integer multiple of the grid step");
  }
  if (k < static_cast<double>(kMinEpsSteps)) {
    throw std::invalid_argument("eps must be at least 4 grid steps");
  }
  return static_cast<std::size_t>(k);
}

/// Decreasing ladder of eps values, stored as multiples of the grid step.
struct EpsLadder {
  std::vector<std::size_t> multiples;

  static EpsLadder standard() { return EpsLadder{{128, 64, 32, 16, 8, 4}}; }

  void validate() const {
    if (multiples.empty()) throw std::invalid_argument("empty eps ladder");
    for (std::size_t i = 0; i < multiples.size(); ++i) {
      if (multiples[i] < kMinEpsSteps) {
        throw std::invalid_argument("eps ladder entries must be >= 4 grid steps");
      }
      if (i > 0 && multiples[i] >= multiples[i - 1]) {
        throw std::invalid_argument("eps ladder must be strictly decreasing");
      }
    }
  }

  std::vector<double> values(const Grid& grid) const {
    validate();
    std::vector<double> out;
    out.reserve(multiples.size());
    for (auto k : multiples) out.push_back(static_cast<double>(k) * grid.step());
    return out;
  }

  std::size_t size() const noexcept { return multiples.size(); }
  double finest(const Grid& grid) const {
    validate();
    return static_cast<double>(multiples.back()) * grid.step();
  }

  bool operator==(const EpsLadder&) const = default;
};

// ---------------------------------------------------------------------------
// ds-quadrature
// ---------------------------------------------------------------------------

enum class Quadrature { grid, jittered };

/// Left-endpoint grid sums by default. Jittered evaluates the integrand at
/// t_i + U_i dt, U_i iid uniform, for integrands that are only defined
/// Lebesgue-a.e. and may be atypical on grid nodes.
struct QuadratureRule {
  Quadrature mode = Quadrature::grid;
  Stream jitter{};
};

inline QuadratureRule jittered(Stream s) { return QuadratureRule{Quadrature::jittered, s}; }

namespace detail {

template <class Y>
double integrand_at_node(const Y& y, const Grid& grid, std::size_t i) {
  if constexpr (std::is_same_v<std::remove_cvref_t<Y>, SamplePath>) {
    return y[i];
  } else {
    return static_cast<double>(y(grid.time(i)));
  }
}

template <class Y>
double integrand_at(const Y& y, double t) {
  if constexpr (std::is_same_v<std::remove_cvref_t<Y>, SamplePath>) {
    return y.at(t);
  } else {
    return static_cast<double>(y(t));
  }
}

template <class Y>
void check_integrand_grid(const Y& y, const Grid& grid) {
  if constexpr (std::is_same_v<std::remove_cvref_t<Y>, SamplePath>) {
    if (!(y.grid() == grid)) {
      throw std::invalid_argument("integrand and integrator live on different grids");
    }
  }
}

enum class Direction { forward, backward, symmetric };

// curve(t_j) = sum_{i<j} Y(s_i) * incr(s_i) * dt / eps, with s_i = t_i on the
// grid rule and s_i = t_i + U_i dt on the jittered rule.
template <class Y>
SamplePath regularized(const Y& y, const SamplePath& x, double eps,
                       const QuadratureRule& rule, Direction dir) {
  const Grid& grid = x.grid();
  check_integrand_grid(y, grid);
  const auto k = static_cast<std::ptrdiff_t>(eps_steps(grid, eps));
  const std::size_t n = grid.steps();
  const double w = grid.step() / eps;
  std::vector<double> out(n + 1);
  out[0] = 0.0;
  if (rule.mode == Quadrature::grid) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      double incr = 0.0;
      switch (dir) {
        case Direction::forward: incr = x.node(ii + k) - x[i]; break;
        case Direction::backward: incr = x[i] - x.node(ii - k); break;
        case Direction::symmetric: incr = 0.5 * (x.node(ii + k) - x.node(ii - k)); break;
      }
      out[i + 1] = out[i] + integrand_at_node(y, grid, i) * incr * w;
    }
  } else {
    Engine eng = make_engine(rule.jitter, GeneratorId::jitter);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = grid.time(i) + unif(eng) * grid.step();
      double incr = 0.0;
      switch (dir) {
        case Direction::forward: incr = x.at(s + eps) - x.at(s); break;
        case Direction::backward: incr = x.at(s) - x.at(s - eps); break;
        case Direction::symmetric: incr = 0.5 * (x.at(s + eps) - x.at(s - eps)); break;
      }
      const double yv = incr == 0.0 ? 0.0 : integrand_at(y, s);
      out[i + 1] = out[i] + yv * incr * w;
    }
  }
  return SamplePath(grid, std::move(out));
}

}  // namespace detail

/// Integrand: a SamplePath on the integrator's grid, or any callable t -> y.
template <class Y>
concept Integrand = std::is_same_v<std::remove_cvref_t<Y>, SamplePath> ||
                    std::is_invocable_r_v<double, const Y&, double>;

/// t -> int_0^t Y(s) (X(s+eps) - X(s)) / eps ds.
template <Integrand Y>
SamplePath forward_eps(const Y& y, const SamplePath& x, double eps,
                       const QuadratureRule& rule = {}) {
  return detail::regularized(y, x, eps, rule, detail::Direction::forward);
}

/// t -> int_0^t Y(s) (X(s) - X(s-eps)) / eps ds.
template <Integrand Y>
SamplePath backward_eps(const Y& y, const SamplePath& x, double eps,
                        const QuadratureRule& rule = {}) {
  return detail::regularized(y, x, eps, rule, detail::Direction::backward);
}

/// t -> int_0^t Y(s) (X(s+eps) - X(s-eps)) / (2 eps) ds.
template <Integrand Y>
SamplePath symmetric_eps(const Y& y, const SamplePath& x, double eps,
                         const QuadratureRule& rule = {}) {
  return detail::regularized(y, x, eps, rule, detail::Direction::symmetric);
}

/// t -> int_0^t (X(s+eps) - X(s)) (Y(s+eps) - Y(s)) / eps ds.
inline SamplePath cov_eps(const SamplePath& x, const SamplePath& y, double eps) {
  require_same_grid(x, y);
  const Grid& grid = x.grid();
  const auto k = static_cast<std::ptrdiff_t>(eps_steps(grid, eps));
  const std::size_t n = grid.steps();
  const double w = grid.step() / eps;
  std::vector<double> out(n + 1);
  out[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    out[i + 1] = out[i] + (x.node(ii + k) - x[i]) * (y.node(ii + k) - y[i]) * w;
  }
  return SamplePath(grid, std::move(out));
}

/// t -> int_0^t (X(s) Y(s+eps) - X(s+eps) Y(s)) / eps ds.
inline SamplePath levy_area_eps(const SamplePath& x, const SamplePath& y, double eps) {
  require_same_grid(x, y);
  const Grid& grid = x.grid();
  const auto k = static_cast<std::ptrdiff_t>(eps_steps(grid, eps));
  const std::size_t n = grid.steps();
  const double w = grid.step() / eps;
  std::vector<double> out(n + 1);
  out[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<std::ptrdiff_t>(i);
    out[i + 1] = out[i] + (x[i] * y.node(ii + k) - x.node(ii + k) * y[i]) * w;
  }
  return SamplePath(grid, std::move(out));
}

/// Forward functional of g(X1, X2) . d(X1, X2) in the plane: the sum of the
/// two coordinate forward functionals. `g` maps (x1, x2) to a 2-vector.
template <class G>
  requires std::is_invocable_r_v<std::array<double, 2>, const G&, double, double>
SamplePath vector_forward_eps(const G& g, const SamplePath& x1, const SamplePath& x2,
                              double eps) {
  require_same_grid(x1, x2);
  std::vector<double> g1(x1.size()), g2(x1.size());
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const auto v = g(x1[i], x2[i]);
    g1[i] = v[0];
    g2[i] = v[1];
  }
  const SamplePath a = forward_eps(SamplePath(x1.grid(), std::move(g1)), x1, eps);
  const SamplePath b = forward_eps(SamplePath(x1.grid(), std::move(g2)), x2, eps);
  return zip_paths(a, b, [](double u, double v) { return u + v; });
}

// ---------------------------------------------------------------------------
// eps families and ucp estimation
// ---------------------------------------------------------------------------

/// The curves t -> functional_eps(t) along a ladder, for one ensemble member.
struct EpsFamily {
  std::vector<double> eps;
  std::vector<SamplePath> curves;

  void validate() const {
    if (eps.size() != curves.size()) {
      throw std::invalid_argument("eps family: one curve per eps value required");
    }
    for (std::size_t i = 1; i < eps.size(); ++i) {
      if (!(eps[i] < eps[i - 1])) {
        throw std::invalid_argument("eps family ladder must be strictly decreasing");
      }
    }
    for (const auto& c : curves) {
      if (c.front() != 0.0) throw std::invalid_argument("eps curves must start at 0");
    }
  }
};

/// Evaluates `functional(eps)` along the ladder.
template <class F>
EpsFamily make_family(const Grid& grid, const EpsLadder& ladder, F&& functional) {
  EpsFamily fam;
  fam.eps = ladder.values(grid);
  fam.curves.reserve(fam.eps.size());
  for (double e : fam.eps) fam.curves.push_back(functional(e));
  return fam;
}

enum class Verdict { converges, diverges };

inline const char* to_string(Verdict v) noexcept {
  return v == Verdict::converges ? "converges" : "diverges";
}

struct EpsStatistics {
  double eps = 0.0;
  double median = 0.0;
  double p90 = 0.0;
  /// P(D(eps) > level) for each configured level.
  std::vector<double> exceed_frac;
};

/// Monte-Carlo surrogate for ucp convergence: D(eps) = sup_t |curve - ref|
/// per member, summarized across the ensemble.
struct ConvergenceReport {
  std::vector<EpsStatistics> rows;
  std::vector<double> levels;
  /// distances[k][m] is D(eps_k) for member m.
  std::vector<std::vector<double>> distances;
  stats::LineFit fit;  // log median D against log eps
  double delta = 0.0;
  std::size_t members = 0;
  Verdict verdict = Verdict::diverges;

  const EpsStatistics& finest() const { return rows.back(); }
  const EpsStatistics& coarsest() const { return rows.front(); }
};

struct UcpOptions {
  /// Threshold on median D at the finest eps. Defaults to
  /// relative_delta * (median sup |reference|).
  std::optional<double> delta;
  double relative_delta = 0.01;
  /// Exceedance levels; delta is always included first.
  std::vector<double> levels;
  std::size_t min_members = 30;
};

/// Builds a report from precomputed distances; `scale` rows must be
/// decreasing. Used directly by refinement studies where the abscissa is a
/// mesh size rather than eps.
inline ConvergenceReport summarize_distances(std::vector<double> scale,
                                             std::vector<std::vector<double>> distances,
                                             double delta, std::vector<double> extra_levels = {}) {
  if (scale.size() < 2) throw std::invalid_argument("ucp estimate needs >= 2 eps values");
  if (scale.size() != distances.size()) {
    throw std::invalid_argument("one distance row per eps value required");
  }
  ConvergenceReport rep;
  rep.delta = delta;
  rep.levels.push_back(delta);
  for (double l : extra_levels) rep.levels.push_back(l);
  rep.members = distances.front().size();
  std::vector<double> xs, meds;
  for (std::size_t k = 0; k < scale.size(); ++k) {
    const auto& d = distances[k];
    EpsStatistics row;
    row.eps = scale[k];
    row.median = stats::median(d);
    row.p90 = stats::quantile(d, 0.9);
    for (double level : rep.levels) {
      const auto hits = std::count_if(d.begin(), d.end(), [&](double v) { return v > level; });
      row.exceed_frac.push_back(static_cast<double>(hits) / static_cast<double>(d.size()));
    }
    xs.push_back(row.eps);
    meds.push_back(row.median);
    rep.rows.push_back(std::move(row));
  }
  const auto positive = std::count_if(meds.begin(), meds.end(), [](double m) { return m > 0.0; });
  if (positive >= 2) rep.fit = stats::fit_loglog(xs, meds);
  const double last = rep.rows.back().median;
  // An exactly vanishing distance counts as converged whatever the slope.
  rep.verdict = (last == 0.0 || (last < delta && rep.fit.slope > 0.0)) ? Verdict::converges
                                                                        : Verdict::diverges;
  rep.distances = std::move(distances);
  return rep;
}

/// Estimates the ucp limit of per-member eps families against per-member
/// references. With no references, the finest curve of each member is the
/// reference (Cauchy diagnostic) and the finest row is dropped.
inline ConvergenceReport ucp_limit(std::span<const EpsFamily> families,
                                   std::span<const SamplePath> references,
                                   const UcpOptions& opts = {}) {
  if (families.empty()) throw std::invalid_argument("ucp estimate needs members");
  if (families.size() < opts.min_members) {
    throw std::invalid_argument("ucp estimate needs at least " +
                                std::to_string(opts.min_members) + " members, got " +
                                std::to_string(families.size()));
  }
  const bool cauchy = references.empty();
  if (!cauchy && references.size() != families.size()) {
    throw std::invalid_argument("one reference per ensemble member required");
  }
  for (const auto& f : families) f.validate();
  const std::size_t levels = families.front().eps.size();
  if (levels < 2) throw std::invalid_argument("ucp estimate needs >= 2 eps values");
  const std::size_t used = cauchy ? levels - 1 : levels;
  if (used < 2) throw std::invalid_argument("Cauchy ucp estimate needs >= 3 eps values");

  std::vector<std::vector<double>> dist(used, std::vector<double>(families.size()));
  std::vector<double> scales(families.size());
  for (std::size_t m = 0; m < families.size(); ++m) {
    const auto& fam = families[m];
    if (fam.eps.size() != levels) throw std::invalid_argument("ragged eps families");
    const SamplePath& ref = cauchy ? fam.curves.back() : references[m];
    scales[m] = ref.sup_abs();
    for (std::size_t k = 0; k < used; ++k) dist[k][m] = sup_distance(fam.curves[k], ref);
  }
  double delta = 0.0;
  if (opts.delta) {
    delta = *opts.delta;
  } else {
    delta = opts.relative_delta * stats::median(scales);
    if (!(delta > 0.0)) {
      throw std::invalid_argument("reference scale is zero; pass an explicit delta");
    }
  }
  std::vector<double> eps(families.front().eps.begin(),
                          families.front().eps.begin() + static_cast<std::ptrdiff_t>(used));
  return summarize_distances(std::move(eps), std::move(dist), delta, opts.levels);
}

}  // namespace regcal
