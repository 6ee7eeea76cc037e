#include "hardy/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

#include "hardy/quadrature.hpp"
#include "hardy/semigroup.hpp"
#include "parallel.hpp"

namespace hardy {

TimeGrid TimeGrid::log_spaced(double t_min, double t_max, int m) {
  if (m < 16) throw std::invalid_argument("TimeGrid: need at least 16 times");
  if (!(t_min > 0.0) || !(t_max > t_min)) {
    throw std::invalid_argument("TimeGrid: need 0 < t_min < t_max");
  }
  TimeGrid g;
  const double a = std::log(t_min);
  const double b = std::log(t_max);
  for (int k = 0; k < m; ++k) g.times.push_back(std::exp(a + (b - a) * k / (m - 1)));
  g.times.back() = t_max;
  return g;
}

TimeGrid TimeGrid::refined() const {
  TimeGrid g;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (k > 0) g.times.push_back(std::sqrt(times[k - 1] * times[k]));
    g.times.push_back(times[k]);
  }
  return g;
}

namespace {

double heat_of(const IndicatorCombination& f, double t, const Point& x) {
  double v = 0.0;
  for (const auto& term : f.terms()) v += term.coef * free_on_cube(t, x, term.cube);
  return v;
}

// sup over times[first], times[first + step], ...
double sup_over(const IndicatorCombination& f, const std::vector<double>& times, std::size_t first,
                std::size_t step, const Point& x) {
  double sup = 0.0;
  for (std::size_t k = first; k < times.size(); k += step) {
    sup = std::max(sup, std::abs(heat_of(f, times[k], x)));
  }
  return sup;
}

}  // namespace

double free_maximal_at(const IndicatorCombination& f, const TimeGrid& grid, const Point& x) {
  return sup_over(f, grid.times, 0, 1, x);
}

MaximalResult maximal_free(const IndicatorCombination& f, double tau, const Cube& region,
                           int resolution, const MaximalOptions& opt) {
  if (!(tau > 0.0)) throw std::invalid_argument("maximal_free: tau must be positive");
  if (resolution < 2) throw std::invalid_argument("maximal_free: resolution must be >= 2");
  const int d = region.dim();
  Point lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = region.lo(i);
    hi[i] = region.hi(i);
  }
  MaximalResult res;
  res.values = GridFunction(CellGrid::uniform(lo, hi, resolution));
  res.values.meta = "sup_{t <= tau^2} |K_t^0 f|, tau = " + std::to_string(tau);
  const double h = res.values.grid.spacing(0);
  const double t_max = tau * tau;
  const double t_min = opt.t_min > 0.0 ? opt.t_min : std::min(1e-4 * t_max, h * h);
  res.times = TimeGrid::log_spaced(t_min, t_max, opt.time_points);

  auto& v = res.values.values;
  const auto& grid = res.values.grid;
  detail::for_each_index(v.size(), opt.exec, [&](std::size_t i) {
    v[i] = sup_over(f, res.times.times, 0, 1, grid.cell_center(i));
  });
  for (int r = 0; r < opt.max_refinements; ++r) {
    const TimeGrid finer = res.times.refined();
    std::vector<double> next(v.size());
    // old times sit at even positions; only the inserted ones are new
    detail::for_each_index(v.size(), opt.exec, [&](std::size_t i) {
      next[i] = std::max(v[i], sup_over(f, finer.times, 1, 2, grid.cell_center(i)));
    });
    double change = 0.0;
    double top = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      change = std::max(change, next[i] - v[i]);
      top = std::max(top, next[i]);
    }
    v.swap(next);
    res.times = finer;
    res.refinements = r + 1;
    res.last_change = top > 0.0 ? change / top : 0.0;
    if (res.last_change <= opt.refine_tolerance) break;
  }
  return res;
}

Region cube_region(const Cube& q) {
  return {[q](const Point& x) { return q.contains(x); }, "cube"};
}

Region difference_region(const Region& a, const Region& b) {
  return {[a, b](const Point& x) { return a.contains(x) && !b.contains(x); },
          a.label + " minus " + b.label};
}

Region annulus_halfspace(const Point& center, double r_in, double r_out, int axis, int sign) {
  if (!(r_out > r_in) || r_in < 0.0) throw std::invalid_argument("annulus_halfspace: need 0 <= r_in < r_out");
  if (axis < 0 || axis >= center.dim()) throw std::invalid_argument("annulus_halfspace: axis out of range");
  return {[=](const Point& x) {
            const Point u = x - center;
            const double r = u.norm();
            if (!(r > r_in && r < r_out)) return false;
            return sign == 0 || sign * u[axis] > 0.0;
          },
          "annulus"};
}

Region example_shell(int n, int dim) {
  auto r = annulus_halfspace(Point(dim), std::sqrt(static_cast<double>(dim)) / n, 1.0, 0, -1);
  r.label = "S_" + std::to_string(n);
  return r;
}

RegionIntegral l1_on_region(const GridFunction& g, const Region& region) {
  RegionIntegral out;
  const double vol = g.grid.cell_volume();
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    if (!region.contains(g.grid.cell_center(i))) continue;
    out.value += std::abs(g.values[i]) * vol;
    ++out.cells;
  }
  if (out.cells == 0) throw std::invalid_argument("l1_on_region: region '" + region.label + "' contains no cell center");
  return out;
}

RegionIntegral l1_on_region(const std::function<double(const Point&)>& g, const Cube& box,
                            const Region& region, int resolution, Exec exec) {
  if (resolution < 2) throw std::invalid_argument("l1_on_region: resolution must be >= 2");
  const int d = box.dim();
  Point lo(d), hi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = box.lo(i);
    hi[i] = box.hi(i);
  }
  auto at = [&](int res) {
    GridFunction gf(CellGrid::uniform(lo, hi, res));
    detail::for_each_index(gf.values.size(), exec, [&](std::size_t i) {
      const Point p = gf.grid.cell_center(i);
      gf.values[i] = region.contains(p) ? g(p) : 0.0;
    });
    return l1_on_region(gf, region);
  };
  const auto coarse = at(resolution);
  auto fine = at(2 * resolution);
  fine.refinement_delta = fine.value != 0.0 ? std::abs(fine.value - coarse.value) / std::abs(fine.value) : 0.0;
  return fine;
}

ShellRule half_shell_rule(double r_in, double r_out, int radial_panels, int radial_nodes,
                          int polar_nodes, int azimuth_nodes) {
  if (!(r_in > 0.0) || !(r_out > r_in)) throw std::invalid_argument("half_shell_rule: need 0 < r_in < r_out");
  if (radial_panels < 1 || radial_nodes < 1 || polar_nodes < 1 || azimuth_nodes < 1) {
    throw std::invalid_argument("half_shell_rule: node counts must be positive");
  }
  const auto& gr = quad::gauss_legendre(radial_nodes);
  const auto& gp = quad::gauss_legendre(polar_nodes);
  const double s0 = std::log(r_in);
  const double ds = (std::log(r_out) - s0) / radial_panels;
  const double dphi = 2.0 * std::numbers::pi / azimuth_nodes;
  ShellRule rule;
  for (int p = 0; p < radial_panels; ++p) {
    for (std::size_t i = 0; i < gr.size(); ++i) {
      const double s = s0 + ds * (p + 0.5 * (gr.nodes[i] + 1.0));
      const double r = std::exp(s);
      const double wr = 0.5 * ds * gr.weights[i] * r * r * r;
      for (std::size_t j = 0; j < gp.size(); ++j) {
        const double u = 0.5 * (gp.nodes[j] + 1.0);
        const double wu = 0.5 * gp.weights[j];
        const double rho = std::sqrt(std::max(0.0, 1.0 - u * u));
        for (int k = 0; k < azimuth_nodes; ++k) {
          const double phi = dphi * (k + 0.5);
          rule.nodes.push_back(Point{-r * u, r * rho * std::cos(phi), r * rho * std::sin(phi)});
          rule.weights.push_back(wr * wu * dphi);
        }
      }
    }
  }
  return rule;
}

IndicatorCombination example_atom_local(int n, double tau, double zeta, double mu, int dim) {
  if (n < 1) throw std::invalid_argument("example_atom_local: n must be >= 1");
  const double scale = zeta * std::pow(static_cast<double>(n), dim);
  IndicatorCombination f(dim);
  f.add(scale * mu, Cube(Point(dim), 1.0 / n));
  f.add(-scale, Cube(Point::unit(dim, 0, tau / n), 1.0 / n));
  return f;
}

LogFit fit_log_growth(const std::vector<int>& n, const std::vector<double>& L, double confidence) {
  if (n.size() != L.size()) throw std::invalid_argument("fit_log_growth: size mismatch");
  if (n.size() < 3) throw std::invalid_argument("fit_log_growth: need at least 3 points");
  const double k = static_cast<double>(n.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    mx += std::log(static_cast<double>(n[i]));
    my += L[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double dx = std::log(static_cast<double>(n[i])) - mx;
    sxx += dx * dx;
    sxy += dx * (L[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("fit_log_growth: n values must differ");
  LogFit fit;
  fit.alpha = sxy / sxx;
  fit.beta = my - fit.alpha * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n.size(); ++i) {
    const double e = L[i] - fit.alpha * std::log(static_cast<double>(n[i])) - fit.beta;
    ssr += e * e;
  }
  fit.dof = static_cast<int>(n.size()) - 2;
  fit.alpha_std_error = std::sqrt(ssr / fit.dof / sxx);
  const boost::math::students_t dist(fit.dof);
  const double q = boost::math::quantile(dist, 0.5 * (1.0 + confidence));
  fit.ci_low = fit.alpha - q * fit.alpha_std_error;
  fit.ci_high = fit.alpha + q * fit.alpha_std_error;
  return fit;
}

GrowthResult growth_experiment(const std::vector<int>& n_list,
                               const std::function<MuValue(int)>& mu_of_n,
                               const GrowthOptions& opt, int dim) {
  if (dim != 3) throw std::invalid_argument("growth_experiment: the shell rule is implemented for d = 3");
  if (!(opt.tau > 0.0)) throw std::invalid_argument("growth_experiment: tau must be positive");
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("growth_experiment: n must increase");
  }
  GrowthResult res;
  for (int n : n_list) {
    if (n < 2) throw std::invalid_argument("growth_experiment: n must be >= 2");
    GrowthRow row;
    row.n = n;
    const auto m = mu_of_n(n);
    row.mu = m.mu;
    row.mu_std_error = m.std_error;
    row.mu_uncertain = m.std_error > 0.0 && 3.0 * m.std_error >= std::abs(m.mu - 1.0);
    row.zeta = opt.zeta > 0.0 ? opt.zeta : std::pow(2.0 * (opt.tau + 1.0), -dim) / std::max(m.mu, 1.0);
    auto f = example_atom_local(n, opt.tau, row.zeta, m.mu, dim);
    if (opt.negate) f = f.scaled(-1.0);

    const double r_in = std::sqrt(static_cast<double>(dim)) / n;
    const int panels = std::max(1, static_cast<int>(std::ceil(-std::log(r_in) / opt.panel_width)));
    auto integrate = [&](const ShellRule& rule, TimeGrid& times, bool refine) {
      std::vector<double> v(rule.nodes.size());
      detail::for_each_index(v.size(), opt.exec, [&](std::size_t i) {
        v[i] = sup_over(f, times.times, 0, 1, rule.nodes[i]);
      });
      auto total = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += rule.weights[i] * v[i];
        return s;
      };
      double value = total();
      double delta = 0.0;
      for (int r = 0; refine && r < opt.max_refinements; ++r) {
        const TimeGrid finer = times.refined();
        detail::for_each_index(v.size(), opt.exec, [&](std::size_t i) {
          v[i] = std::max(v[i], sup_over(f, finer.times, 1, 2, rule.nodes[i]));
        });
        const double next = total();
        delta = next != 0.0 ? std::abs(next - value) / std::abs(next) : 0.0;
        value = next;
        times = finer;
        if (delta <= opt.refine_tolerance) break;
      }
      return std::make_pair(value, delta);
    };

    TimeGrid times = TimeGrid::log_spaced(opt.t_min, 1.0, opt.time_points);
    const auto rule = half_shell_rule(r_in, 1.0, panels, opt.radial_nodes, opt.polar_nodes, opt.azimuth_nodes);
    const auto [value, tdelta] = integrate(rule, times, true);
    row.L = value;
    row.time_delta = tdelta;
    row.nodes = rule.nodes.size();
    row.time_points = times.size();
    if (opt.spatial_check) {
      const auto fine = half_shell_rule(r_in, 1.0, 2 * panels, opt.radial_nodes, 2 * opt.polar_nodes,
                                        2 * opt.azimuth_nodes);
      const double fine_value = integrate(fine, times, false).first;
      row.space_delta = fine_value != 0.0 ? std::abs(fine_value - value) / std::abs(fine_value) : 0.0;
    }
    res.rows.push_back(row);
  }

  std::vector<double> L;
  for (const auto& r : res.rows) L.push_back(r.L);
  res.increasing = true;
  for (std::size_t i = 1; i < L.size(); ++i) res.increasing = res.increasing && L[i] > L[i - 1];
  if (n_list.size() >= 3) {
    res.fit = fit_log_growth(n_list, L, opt.confidence);
    res.growth_detected = res.fit.alpha > 0.0 && res.fit.ci_low > 0.0;
  }
  return res;
}

ReflectionReport reflection_check(int n, double tau, std::size_t samples, std::uint64_t seed,
                                  double t_min, int dim) {
  if (!(t_min > 0.0 && t_min < 1.0)) throw std::invalid_argument("reflection_check: need 0 < t_min < 1");
  const Cube c(Point(dim), 1.0 / n);
  const Cube d(Point::unit(dim, 0, tau / n), 1.0 / n);
  const Region shell = example_shell(n, dim);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> s(std::log(t_min), 0.0);
  ReflectionReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  while (rep.samples < samples) {
    Point x(dim);
    for (int i = 0; i < dim; ++i) x[i] = u(rng);
    if (!shell.contains(x)) continue;
    const double t = std::exp(s(rng));
    const double a1 = free_on_cube(t, x, c) - free_on_cube(t, x, d);
    rep.min_value = std::min(rep.min_value, a1);
    if (a1 < 0.0) ++rep.violations;
    ++rep.samples;
  }
  return rep;
}

}  // namespace hardy
