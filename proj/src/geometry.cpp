#include "hardy/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "hardy/grid.hpp"

namespace hardy {

Cube::Cube(Point c, double r) : center(c), radius(r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw std::invalid_argument("Cube: radius must be positive and finite");
  }
}

double Cube::diameter() const { return 2.0 * std::sqrt(static_cast<double>(dim())) * radius; }

double Cube::volume() const { return std::pow(2.0 * radius, dim()); }

bool Cube::contains(const Point& y) const {
  for (int i = 0; i < dim(); ++i) {
    if (!(std::abs(center[i] - y[i]) < radius)) return false;
  }
  return true;
}

bool Cube::contains_closed(const Point& y, double tol) const {
  for (int i = 0; i < dim(); ++i) {
    if (std::abs(center[i] - y[i]) > radius + tol) return false;
  }
  return true;
}

Cube dilate(const Cube& q, int k, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("dilate: theta must be positive");
  if (k < 0) throw std::invalid_argument("dilate: k must be nonnegative");
  double r = q.radius;
  for (int i = 0; i < k; ++i) r *= (1.0 + theta);
  return Cube(q.center, r);
}

bool interiors_intersect(const Cube& a, const Cube& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (!(std::abs(a.center[i] - b.center[i]) < a.radius + b.radius)) return false;
  }
  return true;
}

double overlap_volume(const Cube& a, const Cube& b) {
  double v = 1.0;
  for (int i = 0; i < a.dim(); ++i) {
    const double len = std::min(a.hi(i), b.hi(i)) - std::max(a.lo(i), b.lo(i));
    if (len <= 0.0) return 0.0;
    v *= len;
  }
  return v;
}

bool encloses(const Cube& outer, const Cube& inner, double tol) {
  for (int i = 0; i < outer.dim(); ++i) {
    if (inner.lo(i) < outer.lo(i) - tol || inner.hi(i) > outer.hi(i) + tol) return false;
  }
  return true;
}

double distance_to(const Cube& q, const Point& y) {
  double s = 0.0;
  for (int i = 0; i < q.dim(); ++i) {
    const double e = std::max(std::abs(y[i] - q.center[i]) - q.radius, 0.0);
    s += e * e;
  }
  return std::sqrt(s);
}

std::optional<std::size_t> CubeFamily::index_of(const Cube& q) const {
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    if (cubes[i] == q) return i;
  }
  return std::nullopt;
}

CubeFamily make_uniform_family(double t, const Cube& bbox, double theta) {
  if (!(t > 0.0)) throw std::invalid_argument("make_uniform_family: t must be positive");
  if (!(theta > 0.0)) throw std::invalid_argument("make_uniform_family: theta must be positive");
  const int d = bbox.dim();
  // tolerate round-off in side/(2t) before snapping outward
  const double ratio = bbox.radius / t;
  int per_axis = static_cast<int>(std::ceil(ratio - 1e-9));
  per_axis = std::max(per_axis, 1);
  const double half = per_axis * t;

  CubeFamily fam;
  fam.theta = theta;
  fam.scale_constant = 1.0;
  fam.bbox = Cube(bbox.center, half);

  Point lo = bbox.center;
  Point hi = bbox.center;
  for (int i = 0; i < d; ++i) {
    lo[i] -= half;
    hi[i] += half;
  }
  const CellGrid grid = CellGrid::uniform(lo, hi, per_axis);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const auto idx = grid.unravel(k);
    Point c(d);
    for (int i = 0; i < d; ++i) c[i] = lo[i] + (2 * idx[i] + 1) * t;
    fam.cubes.emplace_back(c, t);
  }
  return fam;
}

CubeFamily refine(const CubeFamily& family, std::size_t index) {
  if (index >= family.size()) throw std::out_of_range("refine: index out of range");
  CubeFamily out = family;
  const Cube parent = family.cubes[index];
  out.cubes.erase(out.cubes.begin() + static_cast<std::ptrdiff_t>(index));
  const int d = parent.dim();
  const double r = parent.radius / 2.0;
  for (unsigned mask = 0; mask < (1u << d); ++mask) {
    Point c = parent.center;
    for (int i = 0; i < d; ++i) c[i] += ((mask >> i) & 1u) ? r : -r;
    out.cubes.emplace_back(c, r);
  }
  out.scale_constant = std::max(out.scale_constant, 2.0);
  return out;
}

GReport check_G(const CubeFamily& family, int samples_per_radius, Exec exec) {
  GReport rep;
  const auto& cubes = family.cubes;
  const std::size_t n = cubes.size();
  if (n == 0) return rep;

  double rmin = cubes.front().radius;
  for (const auto& q : cubes) rmin = std::min(rmin, q.radius);

  // (G1): every sample point of the bounding box lies in some closed cube
  const int d = family.dim();
  const int res = std::max(
      1, static_cast<int>(std::ceil(family.bbox.radius / rmin * samples_per_radius - 1e-9)));
  Point lo = family.bbox.center;
  Point hi = family.bbox.center;
  for (int i = 0; i < d; ++i) {
    lo[i] -= family.bbox.radius;
    hi[i] += family.bbox.radius;
  }
  const CellGrid grid = CellGrid::uniform(lo, hi, 2 * res);
  const auto total = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<unsigned char> covered(grid.size(), 0);
  auto cover_one = [&](std::ptrdiff_t k) {
    const Point x = grid.cell_center(static_cast<std::size_t>(k));
    for (const auto& q : cubes) {
      if (q.contains_closed(x)) {
        covered[k] = 1;
        return;
      }
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < total; ++k) cover_one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < total; ++k) cover_one(k);
  }
  for (unsigned char c : covered) rep.uncovered_samples += (c == 0);
  rep.g1_ok = rep.uncovered_samples == 0;

  // (G2) and (G3) over all pairs
  rep.g2_ok = true;
  double ratio = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Cube qi4 = dilate(cubes[i], 4, family.theta);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double ov = overlap_volume(cubes[i], cubes[j]);
      rep.max_overlap = std::max(rep.max_overlap, ov);
      if (ov > 1e-12 * std::min(cubes[i].volume(), cubes[j].volume())) rep.g2_ok = false;
      if (interiors_intersect(qi4, dilate(cubes[j], 4, family.theta))) {
        const double a = cubes[i].diameter();
        const double b = cubes[j].diameter();
        ratio = std::max(ratio, std::max(a, b) / std::min(a, b));
      }
    }
  }
  rep.empirical_C = ratio;
  rep.g3_ok = ratio <= family.scale_constant * (1.0 + 1e-12);
  return rep;
}

LocGlob loc_glob_split(const CubeFamily& family, std::size_t index) {
  if (index >= family.size()) throw std::out_of_range("loc_glob_split: cube not in family");
  LocGlob out;
  const Cube q3 = dilate(family.cubes[index], 3, family.theta);
  for (std::size_t j = 0; j < family.size(); ++j) {
    if (interiors_intersect(q3, dilate(family.cubes[j], 3, family.theta))) {
      out.loc.push_back(j);
    } else {
      out.glob.push_back(j);
    }
  }
  return out;
}

LocGlob loc_glob_split(const CubeFamily& family, const Cube& q) {
  const auto idx = family.index_of(q);
  if (!idx) throw std::invalid_argument("loc_glob_split: cube is not a member of the family");
  return loc_glob_split(family, *idx);
}

PartitionOfUnity::PartitionOfUnity(CubeFamily family, PartitionConfig config)
    : family_(std::move(family)), config_(config) {
  width_ = config_.width > 0.0 ? config_.width : family_.theta;
}

double PartitionOfUnity::profile(double s) const {
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  switch (config_.profile) {
    case BumpProfile::quintic: {
      const double u = 1.0 - s;
      return u * u * u * (1.0 + 3.0 * s + 6.0 * s * s);
    }
    case BumpProfile::smooth: {
      const double a = std::exp(-1.0 / (1.0 - s));
      const double b = std::exp(-1.0 / s);
      return a / (a + b);
    }
  }
  return 0.0;
}

double PartitionOfUnity::bump(std::size_t q, const Point& x) const {
  const Cube& c = family_.cubes[q];
  const double ramp = width_ * c.radius;
  double v = 1.0;
  for (int i = 0; i < c.dim(); ++i) {
    const double s = (std::abs(x[i] - c.center[i]) - c.radius) / ramp;
    if (s >= 1.0) return 0.0;
    v *= profile(s);
  }
  return v;
}

double PartitionOfUnity::bump_sum(const Point& x) const {
  double s = 0.0;
  for (std::size_t q = 0; q < family_.size(); ++q) s += bump(q, x);
  return s;
}

double PartitionOfUnity::value(std::size_t q, const Point& x) const {
  const double b = bump(q, x);
  if (b == 0.0) return 0.0;
  return b / bump_sum(x);
}

double PartitionOfUnity::sum(const Point& x) const {
  const double s = bump_sum(x);
  if (s == 0.0) return 0.0;
  double acc = 0.0;
  for (std::size_t q = 0; q < family_.size(); ++q) acc += bump(q, x) / s;
  return acc;
}

PartitionOfUnity build_partition(const CubeFamily& family, PartitionConfig config) {
  const double width = config.width > 0.0 ? config.width : family.theta;
  if (width > family.theta) {
    throw std::invalid_argument("build_partition: bump ramp does not fit in Q*; theta must be at least " +
                                std::to_string(width));
  }
  const GReport rep = check_G(family);
  if (!rep.all_ok()) {
    throw std::invalid_argument("build_partition: family violates (G)");
  }
  return PartitionOfUnity(family, config);
}

GradientScan scan_gradient(const PartitionOfUnity& pu, int grid_per_axis, Exec exec) {
  const CubeFamily& fam = pu.family();
  const int d = fam.dim();
  Point lo = fam.bbox.center;
  Point hi = fam.bbox.center;
  for (int i = 0; i < d; ++i) {
    lo[i] -= fam.bbox.radius;
    hi[i] += fam.bbox.radius;
  }
  const CellGrid grid = CellGrid::uniform(lo, hi, grid_per_axis);
  double rmin = fam.cubes.front().radius;
  for (const auto& q : fam.cubes) rmin = std::min(rmin, q.radius);
  const double h = 1e-5 * rmin;

  const auto total = static_cast<std::ptrdiff_t>(grid.size());
  std::vector<double> best(grid.size(), 0.0);
  auto one = [&](std::ptrdiff_t k) {
    const Point x = grid.cell_center(static_cast<std::size_t>(k));
    double local = 0.0;
    for (std::size_t q = 0; q < fam.size(); ++q) {
      if (!dilate(fam.cubes[q], 1, fam.theta).contains(x)) continue;
      double g2 = 0.0;
      for (int i = 0; i < d; ++i) {
        Point xp = x;
        Point xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double g = (pu.value(q, xp) - pu.value(q, xm)) / (2.0 * h);
        g2 += g * g;
      }
      local = std::max(local, std::sqrt(g2) * fam.cubes[q].diameter());
    }
    best[k] = local;
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < total; ++k) one(k);
  } else {
    for (std::ptrdiff_t k = 0; k < total; ++k) one(k);
  }
  GradientScan out;
  out.points = grid.size();
  for (double b : best) out.constant = std::max(out.constant, b);
  return out;
}

}  // namespace hardy
