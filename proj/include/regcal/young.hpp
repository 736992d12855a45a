#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "regcal/grid.hpp"
#include "regcal/oracle.hpp"
#include "regcal/regcalc.hpp"

namespace regcal {

/// Grids up to this size get the exact all-pairs Hoelder supremum.
inline constexpr std::size_t kExactHolderSteps = std::size_t{1} << 14;

struct HolderEstimate {
  double alpha = 0.0;
  double norm = 0.0;
  double s_star = 0.0;
  double t_star = 0.0;
};

/// sup |f(t) - f(s)| / |t - s|^alpha over grid pairs. Exact over all pairs
/// up to 2^14 steps; above that, every lag up to 2^12 steps plus
/// geometrically spaced longer lags.
inline HolderEstimate holder_norm(const SamplePath& f, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("Hoelder exponent must lie in (0,1], got " +
                                std::to_string(alpha));
  }
  const Grid& g = f.grid();
  const std::size_t n = g.steps();
  std::vector<std::size_t> lags;
  if (n <= kExactHolderSteps) {
    lags.resize(n);
    for (std::size_t l = 0; l < n; ++l) lags[l] = l + 1;
  } else {
    const std::size_t dense = std::size_t{1} << 12;
    for (std::size_t l = 1; l <= dense; ++l) lags.push_back(l);
    for (double l = static_cast<double>(dense) * 1.05; l < static_cast<double>(n); l *= 1.05) {
      lags.push_back(static_cast<std::size_t>(l));
    }
    lags.push_back(n);
  }
  HolderEstimate est;
  est.alpha = alpha;
  const auto v = f.values();
  for (std::size_t lag : lags) {
    const double denom = std::pow(static_cast<double>(lag) * g.step(), alpha);
    double best = 0.0;
    std::size_t where = 0;
    for (std::size_t i = 0; i + lag <= n; ++i) {
      const double d = std::abs(v[i + lag] - v[i]);
      if (d > best) {
        best = d;
        where = i;
      }
    }
    const double q = best / denom;
    if (q > est.norm) {
      est.norm = q;
      est.s_star = g.time(where);
      est.t_star = g.time(where + lag);
    }
  }
  return est;
}

struct YoungIntegral {
  /// Finest-eps forward functional, the canonical value.
  SamplePath curve;
  /// sup distance between the two finest eps curves.
  double extrapolation_gap = 0.0;
  /// Left-point Riemann-Stieltjes sums on the full grid.
  SamplePath cross_check;
  /// sup distance between curve and cross_check.
  double cross_check_gap = 0.0;
  /// sup distance between Riemann-Stieltjes sums on the grid and on the
  /// dyadic coarsening with stride 2.
  double refinement_gap = 0.0;
};

inline void check_young_exponents(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha <= 1.0 && beta > 0.0 && beta <= 1.0)) {
    throw std::invalid_argument("Hoelder exponents must lie in (0,1]");
  }
  if (!(alpha + beta > 1.0)) {
    throw std::invalid_argument("Young integration needs alpha + beta > 1");
  }
}

/// int_0^t Y dX for Y in C^beta, X in C^alpha, alpha + beta > 1, computed as
/// the forward regularization along the two finest rungs of `ladder`.
template <Integrand Y>
YoungIntegral young_integral(const Y& y, const SamplePath& x, double alpha, double beta,
                             const EpsLadder& ladder = EpsLadder{{8, 4}}) {
  check_young_exponents(alpha, beta);
  const auto eps = ladder.values(x.grid());
  if (eps.size() < 2) throw std::invalid_argument("Young integral needs two eps values");
  SamplePath fine = forward_eps(y, x, eps.back());
  const SamplePath coarse = forward_eps(y, x, eps[eps.size() - 2]);
  SamplePath rs = ito_sum(y, x, Partition::full(x.grid()));
  const SamplePath rs2 = ito_sum(y, x, Partition::every(x.grid(), 2));
  YoungIntegral out{fine, sup_distance(fine, coarse), rs, 0.0, sup_distance(rs, rs2)};
  out.cross_check_gap = sup_distance(out.curve, out.cross_check);
  return out;
}

/// Z(0) + (1/eps) int_0^t (Z(u+eps) - Z(u)) du, with the boundary extension
/// beyond T. Anchored at Z(0) so that constant and linear paths are fixed
/// points away from T; Hoelder seminorms are unaffected by the anchor.
inline SamplePath smooth_eps(const SamplePath& z, double eps) {
  const SamplePath inc = forward_eps([](double) { return 1.0; }, z, eps);
  const double z0 = z[0];
  return map_path(inc, [z0](double v) { return z0 + v; });
}

struct YoungBoundReport {
  double ratio = 0.0;
  double a_star = 0.0;
  double sup_integral = 0.0;
  double holder_x = 0.0;
  double holder_y = 0.0;
  double rho = 0.0;
};

/// Empirical constant in |int_a^T (Y - Y(a)) dX| <= C T^{1+rho} N_alpha(X) N_beta(Y):
/// the largest left side over grid values of a, divided by the right side
/// without C. Both integrals use the same eps regularization.
inline YoungBoundReport young_bound_report(const SamplePath& x, const SamplePath& y,
                                           double alpha, double beta, double rho,
                                           const EpsLadder& ladder = EpsLadder{{8, 4}}) {
  check_young_exponents(alpha, beta);
  if (!(rho > 0.0 && rho < alpha + beta - 1.0)) {
    throw std::invalid_argument("rho must lie in (0, alpha + beta - 1)");
  }
  require_same_grid(x, y);
  const double eps = ladder.finest(x.grid());
  const SamplePath iy = forward_eps(y, x, eps);
  const SamplePath i1 = forward_eps([](double) { return 1.0; }, x, eps);
  const std::size_t n = x.grid().steps();
  YoungBoundReport rep;
  rep.rho = rho;
  for (std::size_t a = 0; a <= n; ++a) {
    const double j = (iy[n] - iy[a]) - y[a] * (i1[n] - i1[a]);
    if (std::abs(j) > rep.sup_integral) {
      rep.sup_integral = std::abs(j);
      rep.a_star = x.grid().time(a);
    }
  }
  rep.holder_x = holder_norm(x, alpha).norm;
  rep.holder_y = holder_norm(y, beta).norm;
  const double denom =
      std::pow(x.grid().horizon(), 1.0 + rho) * rep.holder_x * rep.holder_y;
  rep.ratio = denom > 0.0 ? rep.sup_integral / denom : 0.0;
  return rep;
}

}  // namespace regcal
