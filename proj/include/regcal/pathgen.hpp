#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "regcal/error.hpp"
#include "regcal/grid.hpp"
#include "regcal/random.hpp"

namespace regcal {

/// Largest grid accepted by the dense fBm sampler.
inline constexpr std::size_t kMaxFbmSteps = 4096;

/// Default number of ternary digits used for the Cantor function.
inline constexpr int kCantorDepth = 20;

// ---------------------------------------------------------------------------
// Brownian motion
// ---------------------------------------------------------------------------

inline SamplePath sample_bm(const Grid& grid, Stream stream) {
  Engine eng = make_engine(stream, GeneratorId::brownian);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd = std::sqrt(grid.step());
  std::vector<double> v(grid.size());
  v[0] = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + sd * normal(eng);
  return SamplePath(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Fractional Brownian motion, exact dense sampling
// ---------------------------------------------------------------------------

namespace detail {

// Lower Cholesky factor of the fractional Gaussian noise covariance
// gamma(|i-j|), gamma(k) = dt^{2H}/2 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
// Cumulative sums of L * xi then have exactly the fBm covariance on the grid.
class FgnFactorCache {
 public:
  using Factor = std::shared_ptr<const Eigen::MatrixXd>;

  static FgnFactorCache& instance() {
    static FgnFactorCache cache;
    return cache;
  }

  Factor get(std::size_t steps, double step, double hurst) {
    std::lock_guard lock(mutex_);
    for (const auto& e : entries_) {
      if (e.steps == steps && e.step == step && e.hurst == hurst) return e.factor;
    }
    Factor f = build(steps, step, hurst);
    entries_.push_back(Entry{steps, step, hurst, f});
    if (entries_.size() > kCapacity) entries_.pop_front();
    return f;
  }

 private:
  static constexpr std::size_t kCapacity = 4;

  struct Entry {
    std::size_t steps;
    double step;
    double hurst;
    Factor factor;
  };

  static Factor build(std::size_t steps, double step, double hurst) {
    const auto n = static_cast<Eigen::Index>(steps);
    const double h2 = 2.0 * hurst;
    const double scale = 0.5 * std::pow(step, h2);
    std::vector<double> gamma(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double kk = static_cast<double>(k);
      gamma[k] = scale * (std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                          std::pow(std::abs(kk - 1.0), h2));
    }
    auto cov = std::make_shared<Eigen::MatrixXd>(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) {
        (*cov)(i, j) = gamma[static_cast<std::size_t>(i - j)];
      }
    }
    Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>, Eigen::Lower> llt(*cov);
    if (llt.info() != Eigen::Success) {
      throw numerical_error("fractional noise covariance is not positive definite (H=" +
                            std::to_string(hurst) + ")");
    }
    return cov;
  }

  std::mutex mutex_;
  std::deque<Entry> entries_;
};

}  // namespace detail

/// Centered Gaussian path with Cov(B_s, B_t) = (s^{2H} + t^{2H} - |t-s|^{2H})/2.
/// Sampled exactly from a dense factorization; the factor is cached per
/// (grid, H) so ensembles pay for it once.
inline SamplePath sample_fbm(const Grid& grid, double hurst, Stream stream) {
  if (!(hurst > 0.0 && hurst < 1.0)) {
    throw std::invalid_argument("Hurst index must lie in (0,1), got " +
                                std::to_string(hurst));
  }
  if (grid.steps() > kMaxFbmSteps) {
    throw std::invalid_argument("dense fBm sampler is limited to n <= " +
                                std::to_string(kMaxFbmSteps));
  }
  const auto factor =
      detail::FgnFactorCache::instance().get(grid.steps(), grid.step(), hurst);
  const auto n = static_cast<Eigen::Index>(grid.steps());

  Engine eng = make_engine(stream, GeneratorId::fractional);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd xi(n);
  for (Eigen::Index i = 0; i < n; ++i) xi(i) = normal(eng);
  const Eigen::VectorXd incr = factor->triangularView<Eigen::Lower>() * xi;

  std::vector<double> v(grid.size());
  v[0] = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    v[static_cast<std::size_t>(i) + 1] = v[static_cast<std::size_t>(i)] + incr(i);
  }
  if (!std::isfinite(v.back())) throw numerical_error("non-finite fBm sample");
  return SamplePath(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// Cantor-Lebesgue function and the support of its measure
// ---------------------------------------------------------------------------

namespace detail {

inline void check_unit_interval(double t, int depth) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("Cantor argument must lie in [0,1], got " +
                                std::to_string(t));
  }
  if (depth < 1) throw std::invalid_argument("Cantor depth must be >= 1");
}

// Rescaled coordinates pick up a rounding error of about 3^k ulp after k
// digits; this slack absorbs it when a value should sit on 1/3 or 2/3.
inline constexpr double kTernarySlack = 1e-6;

}  // namespace detail

/// Cantor-Lebesgue function evaluated from the first `depth` ternary digits.
/// Exact on ternary rationals with at most `depth` digits; nondecreasing.
inline double cantor_function(double t, int depth = kCantorDepth) {
  detail::check_unit_interval(t, depth);
  if (t == 1.0) return 1.0;
  double x = t;
  double value = 0.0;
  double weight = 0.5;
  for (int k = 0; k < depth; ++k) {
    x *= 3.0;
    if (x >= 1.0 - detail::kTernarySlack && x < 2.0 - detail::kTernarySlack) {
      // Inside a removed middle third (or on its left end): flat part.
      return value + weight;
    }
    if (x >= 2.0 - detail::kTernarySlack) {
      value += weight;
      x = std::max(0.0, x - 2.0);
    }
    weight *= 0.5;
  }
  return value;
}

/// 1 if t belongs to the level-`depth` closed approximation of the Cantor set
/// (2^depth intervals of length 3^-depth), else 0.
inline int cantor_support_indicator(double t, int depth = kCantorDepth) {
  detail::check_unit_interval(t, depth);
  double x = t;
  for (int k = 0; k < depth; ++k) {
    if (x <= 1.0 / 3.0 + detail::kTernarySlack / 3.0) {
      x = std::max(0.0, 3.0 * x);
    } else if (x >= 2.0 / 3.0 - detail::kTernarySlack / 3.0) {
      x = std::min(1.0, 3.0 * x - 2.0);
    } else {
      return 0;
    }
  }
  return 1;
}

// ---------------------------------------------------------------------------
// Time change, Euler scheme, Volterra process
// ---------------------------------------------------------------------------

/// M_i = clock(psi(t_i)) on `out_grid`, with the clock path interpolated.
template <class Psi>
SamplePath time_change(const SamplePath& clock, const Grid& out_grid, Psi&& psi) {
  std::vector<double> v(out_grid.size());
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double s = psi(out_grid.time(i));
    if (!(s >= prev)) {
      throw std::invalid_argument("time change must be nondecreasing (violated at t=" +
                                  std::to_string(out_grid.time(i)) + ")");
    }
    prev = s;
    v[i] = clock.at(s);
  }
  return SamplePath(out_grid, std::move(v));
}

template <class Psi>
SamplePath time_change(const SamplePath& clock, Psi&& psi) {
  return time_change(clock, clock.grid(), std::forward<Psi>(psi));
}

/// Euler-Maruyama for dX = sigma(t,X) dW + b(t,X) dt.
template <class Sigma, class Drift>
SamplePath sample_sde_euler(const Grid& grid, Sigma&& sigma, Drift&& drift,
                            double x0, Stream stream) {
  Engine eng = make_engine(stream, GeneratorId::euler);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dt = grid.step();
  const double sd = std::sqrt(dt);
  std::vector<double> v(grid.size());
  v[0] = x0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const double t = grid.time(i);
    const double s = sigma(t, v[i]);
    const double b = drift(t, v[i]);
    if (!std::isfinite(s) || !std::isfinite(b)) {
      throw numerical_error("non-finite SDE coefficients at t=" + std::to_string(t));
    }
    v[i + 1] = v[i] + s * sd * normal(eng) + b * dt;
  }
  return SamplePath(grid, std::move(v));
}

struct VolterraSample {
  SamplePath x;
  SamplePath kernel;  // B, the Brownian kernel G(t,s) = B((t-s) v 0)
  SamplePath driver;  // W, the integrator
};

/// X(t_j) = sum_{i<j} B(t_j - t_i) (W_{i+1} - W_i). Left-point sums, O(n^2).
inline SamplePath volterra_from(const SamplePath& kernel, const SamplePath& driver) {
  require_same_grid(kernel, driver);
  const std::size_t n = driver.grid().steps();
  std::vector<double> dw(n);
  for (std::size_t i = 0; i < n; ++i) dw[i] = driver[i + 1] - driver[i];
  const auto kv = kernel.values();
  std::vector<double> v(n + 1, 0.0);
  for (std::size_t j = 1; j <= n; ++j) {
    double acc = 0.0;
    // t_j - t_i = t_{j-i} on a uniform grid.
    for (std::size_t i = 0; i < j; ++i) acc += kv[j - i] * dw[i];
    v[j] = acc;
  }
  return SamplePath(driver.grid(), std::move(v));
}

inline VolterraSample sample_volterra(const Grid& grid, Stream driver_stream,
                                      Stream kernel_stream) {
  SamplePath w = sample_bm(grid, driver_stream.child(
                                     static_cast<std::uint64_t>(GeneratorId::volterra_driver)));
  SamplePath b = sample_bm(grid, kernel_stream.child(
                                     static_cast<std::uint64_t>(GeneratorId::volterra_kernel)));
  SamplePath x = volterra_from(b, w);
  return VolterraSample{std::move(x), std::move(b), std::move(w)};
}

}  // namespace regcal
