#pragma once

#include <string>
#include <vector>

#include "hardy/geometry.hpp"

namespace hardy {

struct PotentialTerm {
  double weight = 0.0;
  Cube cube;
};

/// Nonnegative potential U(x) = b + sum_k w_k 1_{C_k}(x) (open cubes).
class Potential {
public:
  Potential() = default;
  explicit Potential(int dim, double background = 0.0);

  int dim() const { return dim_; }
  double background() const { return background_; }
  const std::vector<PotentialTerm>& terms() const { return terms_; }
  /// No cube terms: the potential is the constant `background`.
  bool is_constant() const { return terms_.empty(); }
  bool is_zero() const { return terms_.empty() && background_ == 0.0; }

  /// Adds w * 1_C. Zero weights are dropped; negative weights are rejected.
  Potential& add_term(double weight, const Cube& cube);

  /// Terms are summed in insertion order after the background, so adding
  /// terms can only increase the computed value.
  double operator()(const Point& x) const;

  /// Distance from x to the union of term cubes (0 when b > 0 or inside).
  double distance_to_support(const Point& x) const;

  /// V(. - shift): every cube translated by `shift`.
  Potential translated(const Point& shift) const;

  /// Background added, terms of `a` followed by terms of `b`.
  friend Potential operator+(const Potential& a, const Potential& b);

private:
  int dim_ = 0;
  double background_ = 0.0;
  std::vector<PotentialTerm> terms_;
};

Potential zero_potential(int dim);
Potential constant_potential(int dim, double value);
/// W^[t](x) = t^{-2}.
Potential uniform_potential(int dim, double t);
/// value * 1_box.
Potential box_potential(const Cube& box, double value);

/// Centers c_k = 2^k e_1 and cubes C_k = Q(c_k, 1/(2k)).
Point example_center(int k, int dim);
Cube example_cube(int k, int dim);

struct ExamplePotential {
  Potential potential;
  int k_max = 0;
  /// sum_{k > k_max} (k 2^k)^{2-d}, the majorant of the dropped terms.
  double tail_majorant = 0.0;
};

/// Truncation of sum_{k>=2} k^2 1_{C_k} at k_max.
ExamplePotential example_potential(int k_max, int dim = 3);
double example_tail_majorant(int k_max, int dim);

/// int_C |x - y|^{2-d} dy for d >= 3. The divergence theorem turns the
/// singular volume integral into smooth face integrals
///   (1/2) sum_faces h_f int_f |p - x|^{2-d} dA(p),
/// which are evaluated by adaptive tensor Gauss-Legendre with the projection
/// of x placed at a sub-box corner.
double newton_integral(const Cube& c, const Point& x, double rel_tol = 1e-10);

/// int V(y) |x - y|^{2-d} dy; +infinity when V has a positive background.
double kato_functional(const Potential& v, const Point& x);

struct KatoProbe {
  Point x;
  std::string label;
  double value = 0.0;
};

struct KatoReport {
  std::vector<KatoProbe> probes;
  double sup = 0.0;
  std::size_t argmax = 0;
  double tail_majorant = 0.0;
  bool finite = true;
};

/// Term centers, term corners, midpoints between consecutive centers, origin.
std::vector<KatoProbe> default_kato_probes(const Potential& v);

KatoReport kato_sup_estimate(const Potential& v, std::vector<KatoProbe> probes = {},
                             double tail_majorant = 0.0, Exec exec = Exec::parallel);

}  // namespace hardy
