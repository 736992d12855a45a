#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcal/grid.hpp"
#include "regcal/pathgen.hpp"
#include "regcal/regcalc.hpp"
#include "regcal/stats.hpp"

namespace regcal {

/// Ordered subset of grid nodes containing 0 and n.
class Partition {
 public:
  Partition(const Grid& grid, std::vector<std::size_t> nodes)
      : grid_(grid), nodes_(std::move(nodes)) {
    if (nodes_.size() < 2 || nodes_.front() != 0 || nodes_.back() != grid_.steps()) {
      throw std::invalid_argument("partition must start at 0 and end at T");
    }
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (nodes_[i] <= nodes_[i - 1]) {
        throw std::invalid_argument("partition nodes must be strictly increasing");
      }
    }
  }

  /// Every grid node.
  static Partition full(const Grid& grid) { return every(grid, 1); }

  /// Every `stride`-th node, plus the last node.
  static Partition every(const Grid& grid, std::size_t stride) {
    if (stride == 0) throw std::invalid_argument("partition stride must be positive");
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < grid.steps(); i += stride) nodes.push_back(i);
    nodes.push_back(grid.steps());
    return Partition(grid, std::move(nodes));
  }

  const Grid& grid() const noexcept { return grid_; }
  std::span<const std::size_t> nodes() const noexcept { return nodes_; }
  std::size_t intervals() const noexcept { return nodes_.size() - 1; }

  double mesh() const noexcept {
    std::size_t m = 0;
    for (std::size_t i = 1; i < nodes_.size(); ++i) m = std::max(m, nodes_[i] - nodes_[i - 1]);
    return static_cast<double>(m) * grid_.step();
  }

 private:
  Grid grid_;
  std::vector<std::size_t> nodes_;
};

namespace detail {

inline void check_partition(const Partition& pi, const SamplePath& x) {
  if (!(pi.grid() == x.grid())) {
    throw std::invalid_argument("partition and path live on different grids");
  }
}

// curve(t_j) = sum over partition intervals [a,b] of
// weight(a, b) * (X(b ^ t_j) - X(a ^ t_j)), weight given per interval index.
template <class Weight>
SamplePath partition_curve(const SamplePath& x, const Partition& pi, Weight&& weight) {
  check_partition(pi, x);
  std::vector<double> out(x.size(), 0.0);
  const auto nodes = pi.nodes();
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    const std::size_t a = nodes[p], b = nodes[p + 1];
    const double h = weight(p, a, b);
    for (std::size_t j = a + 1; j <= b; ++j) out[j] = acc + h * (x[j] - x[a]);
    acc += h * (x[b] - x[a]);
  }
  return SamplePath(x.grid(), std::move(out));
}

}  // namespace detail

/// Left-point (Ito) sums: sum H(t_i) (X(t_{i+1} ^ t) - X(t_i ^ t)).
template <Integrand H>
SamplePath ito_sum(const H& h, const SamplePath& x, const Partition& pi) {
  detail::check_integrand_grid(h, x.grid());
  return detail::partition_curve(x, pi, [&](std::size_t, std::size_t a, std::size_t) {
    return detail::integrand_at_node(h, x.grid(), a);
  });
}

template <Integrand H>
SamplePath ito_sum(const H& h, const SamplePath& x) {
  return ito_sum(h, x, Partition::full(x.grid()));
}

/// Lebesgue-Stieltjes sums against a bounded-variation path; same left-point
/// rule as ito_sum.
template <Integrand Y>
SamplePath stieltjes_sum(const Y& y, const SamplePath& v, const Partition& pi) {
  return ito_sum(y, v, pi);
}

/// Ito sums plus half the eps-covariation of integrand and integrator.
inline SamplePath stratonovich_sum(const SamplePath& h, const SamplePath& x,
                                   const Partition& pi, double eps) {
  const SamplePath ito = ito_sum(h, x, pi);
  const SamplePath br = cov_eps(h, x, eps);
  return zip_paths(ito, br, [](double a, double b) { return a + 0.5 * b; });
}

/// Trapezoidal sums (H(t_i) + H(t_{i+1}))/2 * dX, the textbook Stratonovich
/// discretization; kept as a cross-check for stratonovich_sum.
inline SamplePath midpoint_sum(const SamplePath& h, const SamplePath& x, const Partition& pi) {
  require_same_grid(h, x);
  return detail::partition_curve(x, pi, [&](std::size_t, std::size_t a, std::size_t b) {
    return 0.5 * (h[a] + h[b]);
  });
}

/// Partition quadratic variation sum (X(t_{i+1} ^ t) - X(t_i ^ t))^2.
inline SamplePath qv_partition(const SamplePath& x, const Partition& pi) {
  detail::check_partition(pi, x);
  std::vector<double> out(x.size(), 0.0);
  const auto nodes = pi.nodes();
  double acc = 0.0;
  for (std::size_t p = 0; p + 1 < nodes.size(); ++p) {
    const std::size_t a = nodes[p], b = nodes[p + 1];
    for (std::size_t j = a + 1; j <= b; ++j) {
      const double d = x[j] - x[a];
      out[j] = acc + d * d;
    }
    const double d = x[b] - x[a];
    acc += d * d;
  }
  return SamplePath(x.grid(), std::move(out));
}

/// Riemann sum of g over an arbitrary increasing list of times (the
/// integrator is interpolated), evaluated at time t:
/// sum g(s_i) (X(s_{i+1} ^ t) - X(s_i ^ t)).
template <class G>
double riemann_sum_at(const G& g, const SamplePath& x, std::span<const double> times, double t) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double a = std::min(times[i], t), b = std::min(times[i + 1], t);
    if (b <= a) continue;
    const double gv = g(times[i]);
    if (gv != 0.0) acc += gv * (x.at(b) - x.at(a));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Exact integration against the Cantor measure d(psi)
// ---------------------------------------------------------------------------

/// t_j -> int_0^{t_j} Y d(psi) where psi is the Cantor-Lebesgue function:
/// the level-L construction intervals each carry mass 2^-L, integrated with
/// Y at their left endpoint (an exact Cantor point).
template <class Y>
SamplePath cantor_measure_curve(const Y& y, const Grid& grid, int level = 16) {
  if (level < 1 || level > 24) throw std::invalid_argument("Cantor level must be in [1,24]");
  if (grid.horizon() > 1.0 + 1e-12) {
    throw std::invalid_argument("Cantor measure lives on [0,1]; grid horizon exceeds 1");
  }
  const std::uint64_t count = std::uint64_t{1} << level;
  const double mass = std::ldexp(1.0, -level);
  const double width = std::pow(3.0, -level);
  std::vector<double> out(grid.size(), 0.0);
  std::size_t j = 1;
  double acc = 0.0;
  for (std::uint64_t m = 0; m < count && j < out.size(); ++m) {
    double a = 0.0, p = 1.0;
    for (int k = level - 1; k >= 0; --k) {
      p /= 3.0;
      if ((m >> k) & 1U) a += 2.0 * p;
    }
    const double b = a + width;
    const double ya = static_cast<double>(y(a));
    // Grid times falling before this interval see the accumulated mass;
    // times inside it see a partial mass psi(t) - psi(a).
    while (j < out.size() && grid.time(j) < a) out[j++] = acc;
    while (j < out.size() && grid.time(j) < b) {
      const double part = cantor_function(grid.time(j)) - static_cast<double>(m) * mass;
      out[j++] = acc + ya * std::clamp(part, 0.0, mass);
    }
    acc += ya * mass;
  }
  while (j < out.size()) out[j++] = acc;
  return SamplePath(grid, std::move(out));
}

/// d(psi)-average of Y over each grid interval [t_i, t_{i+1}], stored at node
/// i (node n repeats node n-1). Intervals without Cantor mass take Y(t_i).
/// Left-point sums of this integrand against M = W o psi integrate Y dM
/// exactly with respect to the bracket measure d(psi).
template <class Y>
SamplePath cantor_weighted_integrand(const Y& y, const Grid& grid, int level = 16) {
  const SamplePath num = cantor_measure_curve(y, grid, level);
  std::vector<double> out(grid.size());
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    const double dpsi = cantor_function(grid.time(i + 1)) - cantor_function(grid.time(i));
    out[i] = dpsi > 0.0 ? (num[i + 1] - num[i]) / dpsi : static_cast<double>(y(grid.time(i)));
  }
  out.back() = out[grid.size() - 2];
  return SamplePath(grid, std::move(out));
}

// ---------------------------------------------------------------------------
// Ito formula residuals and identity checks
// ---------------------------------------------------------------------------

/// f together with its first two derivatives (d2f may be empty for C^1 use).
struct SmoothFunction {
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;
};

/// f(X_t) - f(X_0) - I^-(eps, f'(X), dX)(t) - 1/2 int f''(X) dC(eps, X, X).
inline SamplePath c2_residual(const SmoothFunction& fn, const SamplePath& x, double eps) {
  if (!fn.f || !fn.df || !fn.d2f) throw std::invalid_argument("C^2 residual needs f, f', f''");
  const SamplePath dfx = map_path(x, fn.df);
  const SamplePath fwd = forward_eps(dfx, x, eps);
  const SamplePath br = cov_eps(x, x, eps);
  std::vector<double> out(x.size());
  const double f0 = fn.f(x[0]);
  double corr = 0.0;
  out[0] = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    corr += 0.5 * fn.d2f(x[i - 1]) * (br[i] - br[i - 1]);
    out[i] = fn.f(x[i]) - f0 - fwd[i] - corr;
  }
  return SamplePath(x.grid(), std::move(out));
}

/// f(S_t) - f(S_0) - int f'(S) dS (Ito sums) - 1/2 C(eps, f'(S), S).
inline SamplePath c1_residual(const SmoothFunction& fn, const SamplePath& s, double eps) {
  if (!fn.f || !fn.df) throw std::invalid_argument("C^1 residual needs f and f'");
  const SamplePath dfs = map_path(s, fn.df);
  const SamplePath ito = ito_sum(dfs, s);
  const SamplePath br = cov_eps(dfs, s, eps);
  std::vector<double> out(s.size());
  const double f0 = fn.f(s[0]);
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = fn.f(s[i]) - f0 - ito[i] - 0.5 * br[i];
  return SamplePath(s.grid(), std::move(out));
}

/// Median over members of sup_t |f(X_t) - f(X_0)|.
inline double response_scale(const SmoothFunction& fn, std::span<const SamplePath> xs) {
  std::vector<double> s;
  s.reserve(xs.size());
  for (const auto& x : xs) {
    const double f0 = fn.f(x[0]);
    double m = 0.0;
    for (double v : x.values()) m = std::max(m, std::abs(fn.f(v) - f0));
    s.push_back(m);
  }
  return stats::median(std::move(s));
}

namespace detail {

template <class Residual>
ConvergenceReport residual_report(std::span<const SamplePath> xs, const EpsLadder& ladder,
                                  double delta, Residual&& residual) {
  if (xs.empty()) throw std::invalid_argument("residual report needs paths");
  const std::vector<double> eps = ladder.values(xs.front().grid());
  std::vector<std::vector<double>> dist(eps.size(), std::vector<double>(xs.size()));
  for (std::size_t m = 0; m < xs.size(); ++m) {
    for (std::size_t k = 0; k < eps.size(); ++k) dist[k][m] = residual(xs[m], eps[k]).sup_abs();
  }
  return summarize_distances(eps, std::move(dist), delta);
}

}  // namespace detail

/// Ucp decay of the C^2 Ito formula residual. The default threshold is
/// `relative` times the response scale median sup |f(X_t) - f(X_0)|.
inline ConvergenceReport ito_formula_residual_c2(const SmoothFunction& fn,
                                                 std::span<const SamplePath> xs,
                                                 const EpsLadder& ladder,
                                                 double relative = 0.02) {
  const double delta = relative * response_scale(fn, xs);
  return detail::residual_report(xs, ladder, delta, [&](const SamplePath& x, double e) {
    return c2_residual(fn, x, e);
  });
}

/// Ucp decay of the C^1 (reversible semimartingale) Ito formula residual.
inline ConvergenceReport ito_formula_residual_c1(const SmoothFunction& fn,
                                                 std::span<const SamplePath> ss,
                                                 const EpsLadder& ladder,
                                                 double relative = 0.05) {
  const double delta = relative * response_scale(fn, ss);
  return detail::residual_report(ss, ladder, delta, [&](const SamplePath& s, double e) {
    return c1_residual(fn, s, e);
  });
}

/// X_t Y_t - X_0 Y_0 - I^-(X, dY) - I^-(Y, dX) - C(X, Y).
inline SamplePath integration_by_parts_residual(const SamplePath& x, const SamplePath& y,
                                                double eps) {
  require_same_grid(x, y);
  const SamplePath a = forward_eps(x, y, eps);
  const SamplePath b = forward_eps(y, x, eps);
  const SamplePath c = cov_eps(x, y, eps);
  std::vector<double> out(x.size());
  const double p0 = x[0] * y[0];
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * y[i] - p0 - a[i] - b[i] - c[i];
  return SamplePath(x.grid(), std::move(out));
}

/// C(eps, f(X1), g(X2)) minus the left-point Stieltjes integral of
/// f'(X1) g'(X2) against C(eps, X1, X2).
inline SamplePath c1_stability_residual(const SmoothFunction& f, const SmoothFunction& g,
                                        const SamplePath& x1, const SamplePath& x2,
                                        double eps) {
  require_same_grid(x1, x2);
  const SamplePath lhs = cov_eps(map_path(x1, f.f), map_path(x2, g.f), eps);
  const SamplePath br = cov_eps(x1, x2, eps);
  std::vector<double> out(x1.size());
  double acc = 0.0;
  out[0] = lhs[0];
  for (std::size_t i = 1; i < x1.size(); ++i) {
    acc += f.df(x1[i - 1]) * g.df(x2[i - 1]) * (br[i] - br[i - 1]);
    out[i] = lhs[i] - acc;
  }
  return SamplePath(x1.grid(), std::move(out));
}

struct PathPair {
  SamplePath first;
  SamplePath second;
};

inline ConvergenceReport c1_stability_check(const SmoothFunction& f, const SmoothFunction& g,
                                            std::span<const PathPair> pairs,
                                            const EpsLadder& ladder, double delta) {
  if (pairs.empty()) throw std::invalid_argument("stability check needs paths");
  const std::vector<double> eps = ladder.values(pairs.front().first.grid());
  std::vector<std::vector<double>> dist(eps.size(), std::vector<double>(pairs.size()));
  for (std::size_t m = 0; m < pairs.size(); ++m) {
    for (std::size_t k = 0; k < eps.size(); ++k) {
      dist[k][m] =
          c1_stability_residual(f, g, pairs[m].first, pairs[m].second, eps[k]).sup_abs();
    }
  }
  return summarize_distances(eps, std::move(dist), delta);
}

struct ChainRuleSample {
  SamplePath h;
  SamplePath k;
  SamplePath m;
};

/// sup_t |int K dN - int HK dM| on a coarse partition, where N = int H dM is
/// built on the full grid. Zero when the partition is the full grid.
inline double chain_rule_distance(const ChainRuleSample& s, const Partition& pi) {
  const SamplePath n = ito_sum(s.h, s.m);
  const SamplePath lhs = ito_sum(s.k, n, pi);
  const SamplePath hk = zip_paths(s.h, s.k, [](double a, double b) { return a * b; });
  const SamplePath rhs = ito_sum(hk, s.m, pi);
  return sup_distance(lhs, rhs);
}

/// Refinement study of the chain rule over partitions with decreasing strides.
inline ConvergenceReport chain_rule_check(std::span<const ChainRuleSample> samples,
                                          std::span<const std::size_t> strides, double delta) {
  if (samples.empty()) throw std::invalid_argument("chain rule check needs paths");
  const Grid& grid = samples.front().m.grid();
  std::vector<double> mesh;
  std::vector<std::vector<double>> dist;
  for (std::size_t stride : strides) {
    const Partition pi = Partition::every(grid, stride);
    mesh.push_back(pi.mesh());
    std::vector<double> row;
    row.reserve(samples.size());
    for (const auto& s : samples) row.push_back(chain_rule_distance(s, pi));
    dist.push_back(std::move(row));
  }
  return summarize_distances(std::move(mesh), std::move(dist), delta);
}

}  // namespace regcal
