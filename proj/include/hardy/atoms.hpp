#pragma once

#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "hardy/geometry.hpp"
#include "hardy/harmonic.hpp"

namespace hardy {

struct IndicatorTerm {
  double coef = 0.0;
  Cube cube;
};

/// Finite sum of coef * 1_cube over open cubes. Terms on identical cubes are
/// merged and zero coefficients dropped.
class IndicatorCombination {
public:
  IndicatorCombination() = default;
  explicit IndicatorCombination(int dim) : dim_(dim) {}

  int dim() const { return dim_; }
  const std::vector<IndicatorTerm>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  IndicatorCombination& add(double coef, const Cube& cube);
  IndicatorCombination& add(double scale, const IndicatorCombination& other);
  IndicatorCombination scaled(double s) const;

  double operator()(const Point& x) const;
  double integral() const;
  /// int over the cube q of the combination.
  double integral_over(const Cube& q) const;
  /// Exact essential sup of |f|, from the cell arrangement of all term faces.
  double sup_norm() const;

private:
  int dim_ = 0;
  std::vector<IndicatorTerm> terms_;
};

enum class AtomKind { omega_atom, q_atom, omega_q_atom, cube_average };

const char* to_string(AtomKind kind);
AtomKind atom_kind_from_string(const std::string& s);

struct Atom {
  IndicatorCombination f;
  /// K: the cube carrying the size and localization conditions.
  Cube support;
  /// Q: the family cube the atom is attached to.
  Cube host;
  AtomKind kind = AtomKind::q_atom;

  double operator()(const Point& x) const { return f(x); }
};

/// |Q|^{-1} 1_Q.
Atom cube_average_atom(const Cube& q);

struct DecompositionEntry {
  double lambda = 0.0;
  Atom atom;
};

struct AtomicDecomposition {
  std::vector<DecompositionEntry> entries;

  /// sum |lambda_j|.
  double total() const;
  double operator()(const Point& x) const;
  /// sum lambda_j a_j as one indicator combination.
  IndicatorCombination combined(int dim) const;
};

struct CubeIntegral {
  double value = 0.0;
  double std_error = 0.0;
  /// Smallest omega value among the nodes used.
  double min_value = 1.0;
};

/// Source of omega values and cube integrals of omega.
class OmegaField {
public:
  virtual ~OmegaField() = default;
  virtual OmegaEstimate at(const Point& x) const = 0;
  virtual CubeIntegral integrate(const Cube& q) const = 0;
};

/// Analytic omega; cube integrals by m^d tensor Gauss-Legendre.
class ExactOmega : public OmegaField {
public:
  explicit ExactOmega(std::function<double(const Point&)> f, int nodes = 5)
      : f_(std::move(f)), nodes_(nodes) {}
  OmegaEstimate at(const Point& x) const override;
  CubeIntegral integrate(const Cube& q) const override;

private:
  std::function<double(const Point&)> f_;
  int nodes_;
};

/// omega = 1.
ExactOmega unit_omega();

/// 1 - eps * min(|x - center| / scale, 1)^lambda: Hoelder of order lambda.
ExactOmega holder_stub_omega(const Point& center, double scale, double eps, double lambda);

/// Monte-Carlo omega of a potential, memoized per point. Cube integrals use
/// Simpson weights on the {-r, 0, r}^d lattice, the same points the
/// oscillation experiment samples. Evaluate all points with warm() before
/// concurrent reads.
class MemoOmega : public OmegaField {
public:
  MemoOmega(Potential v, double horizon, FKConfig cfg, int example_k_max = 0)
      : v_(std::move(v)), horizon_(horizon), cfg_(cfg), k_max_(example_k_max) {}
  OmegaEstimate at(const Point& x) const override;
  CubeIntegral integrate(const Cube& q) const override;
  void warm(const std::vector<Point>& points) const;
  std::size_t cached() const;

private:
  Potential v_;
  double horizon_;
  FKConfig cfg_;
  int k_max_;
  mutable std::mutex mutex_;
  mutable std::map<std::array<double, kMaxDim>, OmegaEstimate> memo_;
};

struct AtomReport {
  bool size_ok = false;
  bool support_ok = false;
  bool cancel_required = false;
  bool cancel_ok = true;
  double sup_norm = 0.0;
  double size_bound = 0.0;
  /// int a (kind q_atom) or int a omega (omega kinds).
  double cancellation = 0.0;
  double cancellation_std_error = 0.0;
  bool all_ok() const { return size_ok && support_ok && cancel_ok; }
};

/// Checks the conditions of the declared kind. Throws when the host cube is
/// not a member of the family (the host is ignored for omega_atom).
AtomReport validate(const Atom& a, const CubeFamily& family, const OmegaField& omega);

/// Smallest cube containing a and b, moved inside `outer` when it fits.
Cube enclosing_cube(const Cube& a, const Cube& b, const Cube& outer);

/// a = (a - kappa |Q|^{-1} 1_Q) + kappa |Q|^{-1} 1_Q with kappa = int a.
AtomicDecomposition split_omega_q_atom(const Atom& a, const Cube& q, double theta = 0.125);

struct TelescopePiece {
  double integral = 0.0;
  double sup_norm = 0.0;
  Cube support;
};

struct TelescopeResult {
  AtomicDecomposition decomposition;
  std::vector<Cube> chain;  // G_0 .. G_N
  int N = 0;
  std::vector<double> t;    // t_0 .. t_{N+1}
  /// b_0 .. b_{N+2} before normalization.
  std::vector<TelescopePiece> pieces;
  std::vector<IndicatorCombination> piece_functions;
  /// int a omega when an omega field is supplied.
  std::optional<double> cancellation;
  /// |t_0| |K| / (d_K / d_Q)^lambda when a Hoelder exponent is supplied.
  std::optional<double> t0_ratio;
  bool collapsed = false;
};

/// The doubling-cube decomposition of an (omega, Q)-atom into multiples of
/// Q-atoms. Throws if supp a is not inside Q**.
TelescopeResult telescope(const Atom& a, const Cube& q, const OmegaField* omega = nullptr,
                          double holder_exponent = 0.0, double theta = 0.125);

struct ExampleAtom {
  Atom atom;
  Cube c;
  Cube d;
  double mu = 1.0;
  double mu_std_error = 0.0;
  double zeta = 0.0;
  double delta_hat = 1.0;
  double kappa = 0.0;
};

/// a_n = zeta n^d (mu_n 1_{C_n} - 1_{D_n}) with mu_n = omega(D_n) / omega(C_n),
/// K_n = Q(c_n, (tau+1)/n) and host Q(c_n, 1). zeta <= 0 selects
/// delta_hat (tau+1)^{-d} 2^{-d}. Throws when the standard error of mu_n
/// exceeds mu_tolerance.
ExampleAtom build_example_atom(int n, double tau, double zeta, const OmegaField& omega,
                               int dim = 3, double mu_tolerance = 1e300);

/// The lattice family of radius-1 cubes centered on (2Z)^d, restricted to a box.
CubeFamily even_unit_family(const Cube& bbox);

}  // namespace hardy
