#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace regcal {

/// Uniform time mesh t_i = i * T / n on [0, T].
class Grid {
 public:
  Grid(double horizon, std::size_t steps) : horizon_(horizon), steps_(steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
      throw std::invalid_argument("grid horizon must be positive and finite");
    }
    if (steps < 2) {
      throw std::invalid_argument("grid needs at least 2 steps, got " +
                                  std::to_string(steps));
    }
    step_ = horizon_ / static_cast<double>(steps_);
  }

  double horizon() const noexcept { return horizon_; }
  std::size_t steps() const noexcept { return steps_; }
  /// Number of nodes, n + 1.
  std::size_t size() const noexcept { return steps_ + 1; }
  double step() const noexcept { return step_; }

  double time(std::size_t i) const noexcept {
    return i >= steps_ ? horizon_ : static_cast<double>(i) * step_;
  }

  std::vector<double> times() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = time(i);
    return out;
  }

  bool operator==(const Grid& other) const noexcept {
    return horizon_ == other.horizon_ && steps_ == other.steps_;
  }

 private:
  double horizon_;
  std::size_t steps_;
  double step_;
};

inline Grid make_grid(double horizon, std::size_t steps) {
  return Grid(horizon, steps);
}

/// One realization on a Grid. Outside [0, T] the path is extended by its
/// boundary values; between nodes it is linearly interpolated.
class SamplePath {
 public:
  SamplePath(Grid grid, std::vector<double> values)
      : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
      throw std::invalid_argument("path has " + std::to_string(values_.size()) +
                                  " values, grid needs " +
                                  std::to_string(grid_.size()));
    }
  }

  /// Constant path.
  SamplePath(Grid grid, double value)
      : grid_(grid), values_(grid.size(), value) {}

  const Grid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  /// Value at node i + offset, clamped to [0, n].
  double node(std::ptrdiff_t i) const noexcept {
    const auto n = static_cast<std::ptrdiff_t>(grid_.steps());
    return values_[static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, n))];
  }

  double at(double t) const noexcept {
    if (!(t > 0.0)) return values_.front();
    if (t >= grid_.horizon()) return values_.back();
    const double pos = t / grid_.step();
    auto i = static_cast<std::size_t>(pos);
    if (i >= grid_.steps()) return values_.back();
    const double w = pos - static_cast<double>(i);
    if (w == 0.0) return values_[i];
    return values_[i] + w * (values_[i + 1] - values_[i]);
  }

  double sup_abs() const noexcept {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  Grid grid_;
  std::vector<double> values_;
};

inline double eval_extended(const SamplePath& path, double t) noexcept {
  return path.at(t);
}

/// Samples f(t_i) on every node.
template <class F>
SamplePath sample_function(const Grid& grid, F&& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.time(i));
  return SamplePath(grid, std::move(v));
}

/// Applies f node-wise.
template <class F>
SamplePath map_path(const SamplePath& p, F&& f) {
  std::vector<double> v(p.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(p[i]);
  return SamplePath(p.grid(), std::move(v));
}

/// Applies f(a_i, b_i) node-wise on two paths sharing a grid.
template <class F>
SamplePath zip_paths(const SamplePath& a, const SamplePath& b, F&& f) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("paths live on different grids");
  }
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(a[i], b[i]);
  return SamplePath(a.grid(), std::move(v));
}

inline double sup_distance(const SamplePath& a, const SamplePath& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("paths live on different grids");
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

inline void require_same_grid(const SamplePath& a, const SamplePath& b) {
  if (!(a.grid() == b.grid())) {
    throw std::invalid_argument("paths live on different grids");
  }
}

}  // namespace regcal
