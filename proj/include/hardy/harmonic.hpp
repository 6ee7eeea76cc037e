#pragma once

#include <cstddef>
#include <vector>

#include "hardy/potentials.hpp"
#include "hardy/semigroup.hpp"

namespace hardy {

/// omega(x) = lim_{t->inf} K_t^V 1(x), estimated by K_T^V 1(x).
struct OmegaEstimate {
  double value = 1.0;
  double std_error = 0.0;
  double horizon = 0.0;
  /// Upper bound for K_T 1(x) - omega(x), plus any caller-supplied tail.
  double tail_bound = 0.0;
  /// The Monte-Carlo mean left (0, 1]; value was clamped.
  bool clamped = false;
  /// Positive background: omega = 0 and condition (S) fails.
  bool violates_kato = false;
  std::size_t samples = 0;
};

/// int_T^inf P_s(rho) ds = (4 pi)^{-d/2} (rho^2/4)^{1-d/2} gamma(d/2 - 1, rho^2 / 4T).
/// Infinite for d < 3.
double heat_time_tail(int dim, double rho, double horizon);

/// int_T^inf int V(z) P_s(x - z) dz ds, bounded term by term by w |C| times the
/// time tail at the distance from x to C. Infinite with a positive background.
double omega_time_tail(const Potential& v, const Point& x, double horizon);

/// Upper bound for the part of 1 - omega(x) due to the terms k > k_max of the
/// example potential: sum_k k^2 |C_k| G(dist(x, C_k)), G the Newton kernel.
double example_truncation_tail(int k_max, const Point& x);

OmegaEstimate omega(const Potential& v, const Point& x, double horizon, const FKConfig& cfg,
                    double extra_tail = 0.0);

/// Several potentials on common free paths; monotone in V exactly.
std::vector<OmegaEstimate> omega_coupled(const std::vector<Potential>& vs, const Point& x,
                                         double horizon, const FKConfig& cfg);

/// Offsets {-r, 0, r}^d of the sample lattice of a cube of radius r, in
/// ravel order (axis 0 slowest).
std::vector<Point> cube_lattice(const Cube& q);

/// Simpson weights for cube_lattice, summing to |Q|.
std::vector<double> cube_lattice_weights(const Cube& q);

/// D_n = C_n + (tau/n) e_1.
Cube example_partner_cube(int n, double tau, int dim = 3);

struct OscillationRow {
  int n = 0;
  double tau = 0.0;
  double horizon = 0.0;
  double inf_d = 0.0;
  double inf_d_std_error = 0.0;
  double sup_c = 0.0;
  double sup_c_std_error = 0.0;
  double gap = 0.0;
  double gap_std_error = 0.0;
  /// Largest tail bound over the D_n samples; only that side can lower the gap.
  double tail_bound = 0.0;
  /// 1 - omega at c_n and at the center of D_n.
  double depression_c = 0.0;
  double depression_d = 0.0;
  /// Simpson ratio omega(D_n) / omega(C_n) on the same samples.
  double mu = 1.0;
  double mu_std_error = 0.0;
  bool significant = false;
  bool conclusive = false;
  std::vector<OmegaEstimate> c_samples;
  std::vector<OmegaEstimate> d_samples;
};

struct OscillationOptions {
  double horizon = 64.0;
  /// k_max of the example potential for the truncation tail; 0 when v is exact.
  int example_k_max = 0;
  double sigmas = 3.0;
  /// Tail bound must stay below this fraction of the gap.
  double tail_fraction = 0.1;
};

/// omega on the lattices of C_n and D_n, one row per n. All points share the
/// seed of cfg.
std::vector<OscillationRow> oscillation_experiment(const Potential& v,
                                                   const std::vector<int>& n_list, double tau,
                                                   const FKConfig& cfg,
                                                   const OscillationOptions& opt = {});

}  // namespace hardy
