#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace hardy {

/// Largest supported ambient dimension.
inline constexpr int kMaxDim = 8;

/// A point (or displacement) in R^d with d fixed at construction, d <= kMaxDim.
/// Stored inline so points are cheap to copy inside Monte-Carlo loops.
class Point {
public:
  Point() = default;

  explicit Point(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) {
      throw std::invalid_argument("Point: dimension must be in [1, " +
                                  std::to_string(kMaxDim) + "], got " +
                                  std::to_string(dim));
    }
  }

  Point(std::initializer_list<double> coords) : Point(static_cast<int>(coords.size())) {
    int i = 0;
    for (double c : coords) {
      c_[i++] = c;
    }
  }

  static Point zeros(int dim) { return Point(dim); }

  static Point unit(int dim, int axis, double scale = 1.0) {
    Point p(dim);
    p[axis] = scale;
    return p;
  }

  int dim() const { return dim_; }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  const double* data() const { return c_.data(); }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend Point operator+(Point a, const Point& b) { return a += b; }
  friend Point operator-(Point a, const Point& b) { return a -= b; }
  friend Point operator*(Point a, double s) { return a *= s; }
  friend Point operator*(double s, Point a) { return a *= s; }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] != b.c_[i]) return false;
    }
    return true;
  }

  double norm2() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += c_[i] * c_[i];
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }
  double norm_inf() const {
    double m = 0.0;
    for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
    return m;
  }

private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline double distance(const Point& a, const Point& b) { return (a - b).norm(); }

inline void require_same_dim(const Point& a, const Point& b, const char* where) {
  if (a.dim() != b.dim()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch");
  }
}

}  // namespace hardy
