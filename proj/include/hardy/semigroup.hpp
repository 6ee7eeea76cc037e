#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "hardy/execution.hpp"
#include "hardy/grid.hpp"
#include "hardy/potentials.hpp"

namespace hardy {

enum class Method { closed_form, monte_carlo };

struct KernelEstimate {
  double value = 0.0;
  double std_error = 0.0;
  Method method = Method::closed_form;
  std::size_t samples = 0;
};

/// Monte-Carlo settings shared by every Feynman-Kac estimator.
///
/// Bridges (kernels) always use ceil(t * steps) uniform slices. Free paths
/// (semigroup mass, omega) use the base step 1/steps, optionally enlarged far
/// from the potential: h = clamp(rho^2 / (2 guard_sigmas^2), 1/steps, max_step)
/// where rho is the distance to the nearest term cube.
struct FKConfig {
  std::size_t paths = 10000;
  int steps = 256;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  bool adaptive = false;
  double guard_sigmas = 6.0;
  double max_step = 1.0;
  /// Bridges: consume the stored noise backwards (time-reversed coupling).
  bool reverse_time = false;
  Exec exec = Exec::parallel;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// (4 pi t)^{-d/2} exp(-|x-y|^2 / 4t).
double free_kernel(double t, const Point& x, const Point& y);
double free_kernel_r2(int dim, double t, double r2);

/// Mass that P_t(x - .) puts on the interval (c - r, c + r) of one axis,
/// written in terms of delta = x - c.
double free_interval_mass(double t, double delta, double r);

/// K_t^0 1_Q (x), a product of erf factors in coordinates relative to c_Q.
double free_on_cube(double t, const Point& x, const Cube& q);

/// k_t^U(x, y) by Brownian bridges with left-point time integration.
KernelEstimate fk_kernel(const Potential& u, double t, const Point& x, const Point& y,
                         const FKConfig& cfg);

/// Several potentials on one set of bridges. For pointwise ordered potentials
/// the estimates are ordered exactly.
std::vector<KernelEstimate> fk_kernel_coupled(const std::vector<Potential>& us, double t,
                                              const Point& x, const Point& y,
                                              const FKConfig& cfg);

/// k_t^a(x,y) - k_t^b(x,y) with the standard error of the paired differences.
KernelEstimate fk_kernel_difference(const Potential& a, const Potential& b, double t,
                                    const Point& x, const Point& y, const FKConfig& cfg);

/// Chapman-Kolmogorov estimate of k_{s+t}^U(x, y): a midpoint z drawn from
/// the bridge-midpoint Gaussian joins independent bridges x->z and z->y.
KernelEstimate fk_kernel_composed(const Potential& u, double s, double t, const Point& x,
                                  const Point& y, const FKConfig& cfg);

/// K_t^U 1(x) over free paths from x.
KernelEstimate fk_semigroup_mass(const Potential& u, double t, const Point& x,
                                 const FKConfig& cfg);

/// Several potentials on one set of free paths. Step control sees the union
/// of all term cubes, so ordering in U and in t is exact.
std::vector<KernelEstimate> fk_semigroup_mass_coupled(const std::vector<Potential>& us,
                                                      double t, const Point& x,
                                                      const FKConfig& cfg);

/// K_t^U f(x) = E[f(X_t) exp(-int U)] over free paths from x.
KernelEstimate fk_apply(const Potential& u, const std::function<double(const Point&)>& f,
                        double t, const Point& x, const FKConfig& cfg);

struct PerturbationQuadrature {
  int s_nodes = 16;
  /// Gauss-Legendre nodes per axis in the Gaussian-quantile variable of each cube term.
  int z_nodes = 5;
  /// Gauss-Hermite nodes per axis for a constant background of U2.
  int hermite_nodes = 8;
  /// Bridges per Monte-Carlo kernel evaluated at a quadrature node.
  std::size_t node_paths = 2000;
};

struct PerturbationResult {
  double lhs = 0.0;
  double lhs_std_error = 0.0;
  double rhs = 0.0;
  double rhs_std_error = 0.0;
  double residual = 0.0;
  /// sqrt(lhs_std_error^2 + rhs_std_error^2).
  double sigma = 0.0;
};

/// |k^{U1} - k^{U1+U2} - int_0^t int k_{t-s}^{U1}(x,z) U2(z) k_s^{U1+U2}(z,y) dz ds|.
PerturbationResult perturbation_residual(const Potential& u1, const Potential& u2, double t,
                                         const Point& x, const Point& y, const FKConfig& cfg,
                                         const PerturbationQuadrature& quad = {});

struct ApproxIdentityReport {
  double t = 0.0;
  /// sup |K_t^U f - f| over cell centers whose neighbourhood is constant.
  double sup_error = 0.0;
  /// The same over the excluded cells next to jumps.
  double sup_error_near_jumps = 0.0;
  std::size_t interior_cells = 0;
  std::size_t jump_cells = 0;
  double max_std_error = 0.0;
  Method method = Method::closed_form;
};

/// Closed form (separable erf transform on the cells) when U = 0, Monte Carlo
/// at every cell center otherwise, all cells sharing one seed.
ApproxIdentityReport approx_identity_error(const Potential& u, const GridFunction& f, double t,
                                           const FKConfig& cfg);

/// Least-squares fit log k = a - (d/2) log t - b |x-y|^2 / t on kernel samples.
struct GaussianFit {
  double log_amplitude = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};
struct KernelSample {
  double t = 0.0;
  double r2 = 0.0;
  double value = 0.0;
};
GaussianFit fit_gaussian_profile(int dim, const std::vector<KernelSample>& samples);

}  // namespace hardy
