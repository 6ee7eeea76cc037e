#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hardy/atoms.hpp"
#include "hardy/execution.hpp"
#include "hardy/grid.hpp"

namespace hardy {

/// Log-spaced times t_1 < ... < t_m in (0, t_max].
struct TimeGrid {
  std::vector<double> times;

  static TimeGrid log_spaced(double t_min, double t_max, int m);
  /// Inserts the geometric midpoint of every gap (m -> 2m - 1); old times are kept.
  TimeGrid refined() const;
  std::size_t size() const { return times.size(); }
};

/// sup_k |K_{t_k}^0 f(x)| over a time grid, f a combination of cube indicators.
double free_maximal_at(const IndicatorCombination& f, const TimeGrid& grid, const Point& x);

struct MaximalOptions {
  int time_points = 64;
  /// Smallest time; 0 selects min(1e-4 tau^2, spacing^2).
  double t_min = 0.0;
  /// Doubling stops when no cell moves by more than this fraction of the max.
  double refine_tolerance = 0.005;
  int max_refinements = 6;
  Exec exec = Exec::parallel;
};

struct MaximalResult {
  GridFunction values;
  TimeGrid times;
  int refinements = 0;
  /// Largest change of the last doubling relative to the largest value.
  double last_change = 0.0;
};

/// Cell-centered sup_{t <= tau^2} |K_t^0 f| on `region` with `resolution`
/// cells per axis; the time grid is doubled until it settles.
MaximalResult maximal_free(const IndicatorCombination& f, double tau, const Cube& region,
                           int resolution, const MaximalOptions& opt = {});

/// Point-set predicate with a label for reports.
struct Region {
  std::function<bool(const Point&)> contains;
  std::string label;
};

Region cube_region(const Cube& q);
/// a minus b.
Region difference_region(const Region& a, const Region& b);
/// { r_in < |x - c| < r_out } intersected with { sign (x - c)_axis > 0 }; sign 0
/// keeps the full annulus.
Region annulus_halfspace(const Point& center, double r_in, double r_out, int axis, int sign);
/// S_n in the frame centered at c_n: sqrt(d)/n < |x| < 1, x_1 < 0.
Region example_shell(int n, int dim = 3);

struct RegionIntegral {
  double value = 0.0;
  std::size_t cells = 0;
  /// |I(2 res) - I(res)| / |I(2 res)|; 0 when not computed.
  double refinement_delta = 0.0;
};

/// Riemann sum of |g| over the cells whose centers lie in the region. Throws
/// if no cell qualifies.
RegionIntegral l1_on_region(const GridFunction& g, const Region& region);

/// The same sum for a pointwise function sampled on `box`, at `resolution` and
/// 2 * resolution; the value reported is the finer one.
RegionIntegral l1_on_region(const std::function<double(const Point&)>& g, const Cube& box,
                            const Region& region, int resolution, Exec exec = Exec::parallel);

/// Nodes and weights of a product rule on the half shell
/// { r_in < |x| < r_out, x_1 < 0 } in R^3: Gauss-Legendre in log r and in
/// cos(angle to -e_1), trapezoid in the azimuth.
struct ShellRule {
  std::vector<Point> nodes;
  std::vector<double> weights;
};
ShellRule half_shell_rule(double r_in, double r_out, int radial_panels, int radial_nodes,
                          int polar_nodes, int azimuth_nodes);

/// The example atom a_n in the frame centered at c_n (absolute coordinates 2^n
/// never appear): zeta n^d (mu 1_{Q(0,1/n)} - 1_{Q(tau/n e_1, 1/n)}).
IndicatorCombination example_atom_local(int n, double tau, double zeta, double mu, int dim = 3);

struct MuValue {
  double mu = 1.0;
  double std_error = 0.0;
};

struct GrowthOptions {
  double tau = 4.0;
  /// zeta <= 0 selects (2 (tau + 1))^{-d} / max(mu, 1).
  double zeta = 0.0;
  int time_points = 64;
  double t_min = 1e-6;
  double refine_tolerance = 0.005;
  int max_refinements = 6;
  /// Width of a radial panel in log r.
  double panel_width = 0.5;
  int radial_nodes = 8;
  int polar_nodes = 12;
  int azimuth_nodes = 24;
  /// Also evaluate with every node count doubled and report the change.
  bool spatial_check = true;
  /// Flip the sign of the atom; L_n must not change.
  bool negate = false;
  double confidence = 0.95;
  Exec exec = Exec::parallel;
};

struct GrowthRow {
  int n = 0;
  double mu = 1.0;
  double mu_std_error = 0.0;
  /// The standard error of mu is at least a third of |mu - 1|.
  bool mu_uncertain = false;
  double zeta = 0.0;
  double L = 0.0;
  std::size_t nodes = 0;
  std::size_t time_points = 0;
  double time_delta = 0.0;
  double space_delta = 0.0;
};

/// Least squares L = alpha ln n + beta with a Student-t interval for alpha.
struct LogFit {
  double alpha = 0.0;
  double beta = 0.0;
  double alpha_std_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int dof = 0;
};

LogFit fit_log_growth(const std::vector<int>& n, const std::vector<double>& L, double confidence = 0.95);

struct GrowthResult {
  std::vector<GrowthRow> rows;
  LogFit fit;
  bool increasing = false;
  /// alpha > 0 and the interval excludes 0.
  bool growth_detected = false;
};

/// L_n = || sup_{t <= 1} |K_t^0 a_n| ||_{L^1(S_n)} for each n, with the fit.
GrowthResult growth_experiment(const std::vector<int>& n_list,
                               const std::function<MuValue(int)>& mu_of_n,
                               const GrowthOptions& opt = {}, int dim = 3);

struct ReflectionReport {
  std::size_t samples = 0;
  std::size_t violations = 0;
  double min_value = 0.0;
};

/// Samples x uniformly in S_n and log-uniform t in [t_min, 1] and checks
/// K_t^0 (1_{C_n} - 1_{D_n})(x) >= 0.
ReflectionReport reflection_check(int n, double tau, std::size_t samples, std::uint64_t seed,
                                  double t_min = 1e-6, int dim = 3);

}  // namespace hardy
