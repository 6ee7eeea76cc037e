#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "hardy/point.hpp"

namespace hardy {

/// Axis-aligned box [lo, hi] split into res[i] equal cells along axis i.
class CellGrid {
public:
  CellGrid() = default;
  CellGrid(Point lo, Point hi, std::vector<int> res) : lo_(lo), hi_(hi), res_(std::move(res)) {
    if (lo_.dim() != hi_.dim() || static_cast<int>(res_.size()) != lo_.dim()) {
      throw std::invalid_argument("CellGrid: inconsistent dimensions");
    }
    count_ = 1;
    for (int i = 0; i < dim(); ++i) {
      if (res_[i] < 1) throw std::invalid_argument("CellGrid: resolution must be >= 1");
      if (!(hi_[i] > lo_[i])) throw std::invalid_argument("CellGrid: empty box");
      count_ *= static_cast<std::size_t>(res_[i]);
    }
  }

  /// Uniform resolution on every axis.
  static CellGrid uniform(const Point& lo, const Point& hi, int res) {
    return CellGrid(lo, hi, std::vector<int>(lo.dim(), res));
  }

  int dim() const { return lo_.dim(); }
  std::size_t size() const { return count_; }
  const Point& lo() const { return lo_; }
  const Point& hi() const { return hi_; }
  const std::vector<int>& resolution() const { return res_; }
  double spacing(int i) const { return (hi_[i] - lo_[i]) / res_[i]; }

  double cell_volume() const {
    double v = 1.0;
    for (int i = 0; i < dim(); ++i) v *= spacing(i);
    return v;
  }

  /// Multi-index of a linear cell index; axis 0 varies slowest.
  std::array<int, kMaxDim> unravel(std::size_t linear) const {
    std::array<int, kMaxDim> idx{};
    for (int i = dim() - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(linear % res_[i]);
      linear /= res_[i];
    }
    return idx;
  }

  std::size_t ravel(const std::array<int, kMaxDim>& idx) const {
    std::size_t linear = 0;
    for (int i = 0; i < dim(); ++i) linear = linear * res_[i] + idx[i];
    return linear;
  }

  double center_coord(int axis, int k) const { return lo_[axis] + (k + 0.5) * spacing(axis); }

  Point cell_center(std::size_t linear) const {
    const auto idx = unravel(linear);
    Point p(dim());
    for (int i = 0; i < dim(); ++i) p[i] = center_coord(i, idx[i]);
    return p;
  }

private:
  Point lo_;
  Point hi_;
  std::vector<int> res_;
  std::size_t count_ = 0;
};


/// Piecewise-constant function on the cells of a CellGrid, extended by the
/// constant `exterior` outside the box.
struct GridFunction {
  CellGrid grid;
  std::vector<double> values;
  double exterior = 0.0;
  std::string meta;

  GridFunction() = default;
  GridFunction(CellGrid g, double fill = 0.0) : grid(std::move(g)), values(grid.size(), fill) {}

  /// Cell containing x, or -1 when x is outside the half-open box.
  std::ptrdiff_t locate(const Point& x) const {
    std::size_t linear = 0;
    for (int i = 0; i < grid.dim(); ++i) {
      const double u = (x[i] - grid.lo()[i]) / grid.spacing(i);
      if (!(u >= 0.0) || u >= grid.resolution()[i]) return -1;
      const int k = std::min(static_cast<int>(u), grid.resolution()[i] - 1);
      linear = linear * grid.resolution()[i] + k;
    }
    return static_cast<std::ptrdiff_t>(linear);
  }
  double operator()(const Point& x) const {
    const auto k = locate(x);
    return k < 0 ? exterior : values[static_cast<std::size_t>(k)];
  }
  /// True when some neighbouring cell (diagonals included, exterior counted)
  /// carries a different value.
  bool touches_jump(std::size_t linear) const {
    const auto idx = grid.unravel(linear);
    const int d = grid.dim();
    int total = 1;
    for (int i = 0; i < d; ++i) total *= 3;
    for (int code = 0; code < total; ++code) {
      auto nb = idx;
      int c = code;
      bool outside = false;
      for (int i = 0; i < d; ++i) {
        nb[i] += c % 3 - 1;
        c /= 3;
        if (nb[i] < 0 || nb[i] >= grid.resolution()[i]) outside = true;
      }
      const double v = outside ? exterior : values[grid.ravel(nb)];
      if (v != values[linear]) return true;
    }
    return false;
  }
};

}  // namespace hardy
