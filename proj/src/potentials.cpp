#include "hardy/potentials.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hardy/quadrature.hpp"

namespace hardy {

Potential::Potential(int dim, double background) : dim_(dim), background_(background) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Potential: bad dimension");
  if (!(background >= 0.0) || !std::isfinite(background)) {
    throw std::invalid_argument("Potential: background must be finite and nonnegative");
  }
}

Potential& Potential::add_term(double weight, const Cube& cube) {
  if (!(weight >= 0.0) || !std::isfinite(weight)) {
    throw std::invalid_argument("Potential: term weights must be finite and nonnegative");
  }
  if (cube.dim() != dim_) throw std::invalid_argument("Potential: cube dimension mismatch");
  if (weight > 0.0) terms_.push_back({weight, cube});
  return *this;
}

double Potential::operator()(const Point& x) const {
  double v = background_;
  for (const auto& t : terms_) {
    if (t.cube.contains(x)) v += t.weight;
  }
  return v;
}

double Potential::distance_to_support(const Point& x) const {
  if (background_ > 0.0) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) best = std::min(best, distance_to(t.cube, x));
  return best;
}

Potential Potential::translated(const Point& shift) const {
  Potential out(dim_, background_);
  for (const auto& t : terms_) out.add_term(t.weight, Cube(t.cube.center + shift, t.cube.radius));
  return out;
}

Potential operator+(const Potential& a, const Potential& b) {
  if (a.dim_ != b.dim_) throw std::invalid_argument("Potential: dimension mismatch in sum");
  Potential out(a.dim_, a.background_ + b.background_);
  out.terms_ = a.terms_;
  out.terms_.insert(out.terms_.end(), b.terms_.begin(), b.terms_.end());
  return out;
}

Potential zero_potential(int dim) { return Potential(dim, 0.0); }

Potential constant_potential(int dim, double value) { return Potential(dim, value); }

Potential uniform_potential(int dim, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("uniform_potential: t must be positive");
  return Potential(dim, 1.0 / (t * t));
}

Potential box_potential(const Cube& box, double value) {
  Potential p(box.dim());
  p.add_term(value, box);
  return p;
}

Point example_center(int k, int dim) { return Point::unit(dim, 0, std::ldexp(1.0, k)); }

Cube example_cube(int k, int dim) { return Cube(example_center(k, dim), 1.0 / (2.0 * k)); }

double example_tail_majorant(int k_max, int dim) {
  double sum = 0.0;
  for (int k = k_max + 1; k < k_max + 2000; ++k) {
    const double term = std::pow(k * std::ldexp(1.0, k), 2.0 - dim);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

ExamplePotential example_potential(int k_max, int dim) {
  if (k_max < 2) throw std::invalid_argument("example_potential: k_max must be >= 2");
  ExamplePotential ex;
  ex.potential = Potential(dim);
  for (int k = 2; k <= k_max; ++k) {
    ex.potential.add_term(static_cast<double>(k) * k, example_cube(k, dim));
  }
  ex.k_max = k_max;
  ex.tail_majorant = example_tail_majorant(k_max, dim);
  return ex;
}

namespace {

constexpr int kFaceNodes = 8;
constexpr int kMaxDepth = 48;

// Face integrand (h^2 + |q|^2)^{(2-d)/2} over a (d-1)-box given by lo/hi.
struct FaceBox {
  std::array<double, kMaxDim> lo{};
  std::array<double, kMaxDim> hi{};
};

double face_gauss(const FaceBox& b, int m, double h2, double expo) {
  const quad::Rule& r = quad::gauss_legendre(kFaceNodes);
  const int n = kFaceNodes;
  std::array<int, kMaxDim> idx{};
  double jac = 1.0;
  for (int j = 0; j < m; ++j) jac *= 0.5 * (b.hi[j] - b.lo[j]);
  double total = 0.0;
  std::size_t count = 1;
  for (int j = 0; j < m; ++j) count *= n;
  for (std::size_t k = 0; k < count; ++k) {
    std::size_t rem = k;
    for (int j = 0; j < m; ++j) {
      idx[j] = static_cast<int>(rem % n);
      rem /= n;
    }
    double q2 = h2;
    double w = 1.0;
    for (int j = 0; j < m; ++j) {
      const double q = 0.5 * (b.lo[j] + b.hi[j]) + 0.5 * (b.hi[j] - b.lo[j]) * r.nodes[idx[j]];
      q2 += q * q;
      w *= r.weights[idx[j]];
    }
    total += w * std::pow(q2, expo);
  }
  return total * jac;
}

double face_children(const FaceBox& b, int m, double h2, double expo, std::vector<FaceBox>* out) {
  double s = 0.0;
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    FaceBox c = b;
    for (int j = 0; j < m; ++j) {
      const double mid = 0.5 * (b.lo[j] + b.hi[j]);
      if ((mask >> j) & 1u) {
        c.lo[j] = mid;
      } else {
        c.hi[j] = mid;
      }
    }
    s += face_gauss(c, m, h2, expo);
    if (out) out->push_back(c);
  }
  return s;
}

double face_adaptive(const FaceBox& b, int m, double h2, double expo, double coarse, double tol,
                     int depth) {
  std::vector<FaceBox> kids;
  const double fine = face_children(b, m, h2, expo, &kids);
  if (std::abs(fine - coarse) <= tol || depth >= kMaxDepth) return fine;
  double s = 0.0;
  const double child_tol = tol / std::sqrt(static_cast<double>(kids.size()));
  for (const auto& k : kids) {
    s += face_adaptive(k, m, h2, expo, face_gauss(k, m, h2, expo), child_tol, depth + 1);
  }
  return s;
}

// int over the face box of (h^2 + |q|^2)^{(2-d)/2}, split at q = 0.
double face_integral(const FaceBox& box, int m, double h, int d, double rel_tol) {
  const double expo = 0.5 * (2.0 - d);
  const double h2 = h * h;
  std::vector<FaceBox> parts{box};
  for (int j = 0; j < m; ++j) {
    std::vector<FaceBox> next;
    for (const auto& p : parts) {
      if (p.lo[j] < 0.0 && p.hi[j] > 0.0) {
        FaceBox a = p;
        FaceBox b = p;
        a.hi[j] = 0.0;
        b.lo[j] = 0.0;
        next.push_back(a);
        next.push_back(b);
      } else {
        next.push_back(p);
      }
    }
    parts = std::move(next);
  }
  double rough = 0.0;
  std::vector<double> coarse(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) {
    coarse[i] = face_gauss(parts[i], m, h2, expo);
    rough += coarse[i];
  }
  const double tol = std::max(rel_tol * std::abs(rough), 1e-300);
  double s = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    s += face_adaptive(parts[i], m, h2, expo, coarse[i], tol / parts.size(), 0);
  }
  return s;
}

}  // namespace

double newton_integral(const Cube& c, const Point& x, double rel_tol) {
  const int d = c.dim();
  if (d < 3) throw std::invalid_argument("newton_integral: requires d >= 3");
  require_same_dim(c.center, x, "newton_integral");
  const Point rel = x - c.center;
  double total = 0.0;
  for (int axis = 0; axis < d; ++axis) {
    FaceBox box;
    int m = 0;
    for (int j = 0; j < d; ++j) {
      if (j == axis) continue;
      box.lo[m] = -c.radius - rel[j];
      box.hi[m] = c.radius - rel[j];
      ++m;
    }
    for (int sign : {-1, 1}) {
      // signed distance from x to the face plane along the outward normal
      const double h = c.radius - sign * rel[axis];
      if (h == 0.0) continue;
      total += 0.5 * h * face_integral(box, m, std::abs(h), d, rel_tol);
    }
  }
  return total;
}

double kato_functional(const Potential& v, const Point& x) {
  if (v.dim() < 3) throw std::invalid_argument("kato_functional: requires d >= 3");
  if (v.background() > 0.0) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (const auto& t : v.terms()) s += t.weight * newton_integral(t.cube, x);
  return s;
}

std::vector<KatoProbe> default_kato_probes(const Potential& v) {
  const int d = v.dim();
  std::vector<KatoProbe> probes;
  const auto& terms = v.terms();
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const Cube& c = terms[k].cube;
    probes.push_back({c.center, "center:" + std::to_string(k), 0.0});
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
      Point p = c.center;
      for (int i = 0; i < d; ++i) p[i] += ((mask >> i) & 1u) ? c.radius : -c.radius;
      probes.push_back({p, "corner:" + std::to_string(k) + ":" + std::to_string(mask), 0.0});
    }
  }
  for (std::size_t k = 0; k + 1 < terms.size(); ++k) {
    const Point mid = 0.5 * (terms[k].cube.center + terms[k + 1].cube.center);
    probes.push_back({mid, "midpoint:" + std::to_string(k), 0.0});
  }
  probes.push_back({Point::zeros(d), "origin", 0.0});
  return probes;
}

KatoReport kato_sup_estimate(const Potential& v, std::vector<KatoProbe> probes,
                             double tail_majorant, Exec exec) {
  if (probes.empty()) probes = default_kato_probes(v);
  const auto n = static_cast<std::ptrdiff_t>(probes.size());
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) probes[i].value = kato_functional(v, probes[i].x);
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) probes[i].value = kato_functional(v, probes[i].x);
  }
  KatoReport rep;
  rep.tail_majorant = tail_majorant;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    if (!std::isfinite(probes[i].value)) rep.finite = false;
    if (probes[i].value > rep.sup || i == 0) {
      rep.sup = probes[i].value;
      rep.argmax = i;
    }
  }
  rep.probes = std::move(probes);
  return rep;
}

}  // namespace hardy
