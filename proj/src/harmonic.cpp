#include "hardy/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace hardy {

double heat_time_tail(int dim, double rho, double horizon) {
  if (dim < 3) return std::numeric_limits<double>::infinity();
  if (!(horizon > 0.0)) throw std::invalid_argument("heat_time_tail: horizon must be positive");
  const double a = 0.5 * dim - 1.0;
  const double norm = std::pow(4.0 * std::numbers::pi, -0.5 * dim);
  if (rho <= 0.0) return norm * std::pow(horizon, -a) / a;
  const double q = 0.25 * rho * rho;
  return norm * std::pow(q, -a) * boost::math::tgamma_lower(a, q / horizon);
}

double omega_time_tail(const Potential& v, const Point& x, double horizon) {
  if (v.background() > 0.0) return std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& term : v.terms()) {
    sum += term.weight * term.cube.volume() *
           heat_time_tail(v.dim(), distance_to(term.cube, x), horizon);
  }
  return sum;
}

double example_truncation_tail(int k_max, const Point& x) {
  const int d = x.dim();
  if (d < 3) return std::numeric_limits<double>::infinity();
  const double newton = std::tgamma(0.5 * d - 1.0) / (4.0 * std::pow(std::numbers::pi, 0.5 * d));
  double sum = 0.0;
  for (int k = k_max + 1; k <= std::min(k_max + 200, 1000); ++k) {
    const Cube c = example_cube(k, d);
    const double rho = distance_to(c, x);
    const double mass = static_cast<double>(k) * k * c.volume();
    if (rho <= 0.0) return std::numeric_limits<double>::infinity();
    const double term = mass * newton * std::pow(rho, 2.0 - d);
    sum += term;
    if (term < 1e-18 * sum) break;
  }
  return sum;
}

namespace {

OmegaEstimate from_mass(const Potential& v, const Point& x, double horizon,
                        const KernelEstimate& m) {
  OmegaEstimate e;
  e.horizon = horizon;
  e.value = m.value;
  e.std_error = m.std_error;
  e.samples = m.samples;
  e.violates_kato = v.background() > 0.0;
  e.tail_bound = omega_time_tail(v, x, horizon);
  if (!(e.value > 0.0)) {
    e.value = std::numeric_limits<double>::min();
    e.clamped = true;
  } else if (e.value > 1.0) {
    e.value = 1.0;
    e.clamped = true;
  }
  return e;
}

}  // namespace

OmegaEstimate omega(const Potential& v, const Point& x, double horizon, const FKConfig& cfg,
                    double extra_tail) {
  if (!(horizon > 0.0)) throw std::invalid_argument("omega: horizon must be positive");
  auto e = from_mass(v, x, horizon, fk_semigroup_mass(v, horizon, x, cfg));
  e.tail_bound += extra_tail;
  return e;
}

std::vector<OmegaEstimate> omega_coupled(const std::vector<Potential>& vs, const Point& x,
                                         double horizon, const FKConfig& cfg) {
  if (!(horizon > 0.0)) throw std::invalid_argument("omega: horizon must be positive");
  const auto masses = fk_semigroup_mass_coupled(vs, horizon, x, cfg);
  std::vector<OmegaEstimate> out;
  for (std::size_t j = 0; j < vs.size(); ++j) out.push_back(from_mass(vs[j], x, horizon, masses[j]));
  return out;
}

std::vector<Point> cube_lattice(const Cube& q) {
  const int d = q.dim();
  int total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  std::vector<Point> out;
  out.reserve(total);
  for (int code = 0; code < total; ++code) {
    Point p = q.center;
    int c = code;
    for (int i = d - 1; i >= 0; --i) {
      p[i] += (c % 3 - 1) * q.radius;
      c /= 3;
    }
    out.push_back(p);
  }
  return out;
}

std::vector<double> cube_lattice_weights(const Cube& q) {
  const int d = q.dim();
  static constexpr double kSimpson[3] = {1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0};
  int total = 1;
  for (int i = 0; i < d; ++i) total *= 3;
  std::vector<double> out(total);
  for (int code = 0; code < total; ++code) {
    double w = q.volume();
    int c = code;
    for (int i = 0; i < d; ++i) {
      w *= kSimpson[c % 3];
      c /= 3;
    }
    out[code] = w;
  }
  return out;
}

Cube example_partner_cube(int n, double tau, int dim) {
  const Cube c = example_cube(n, dim);
  Point center = c.center;
  center[0] += tau / n;
  return Cube(center, c.radius);
}

std::vector<OscillationRow> oscillation_experiment(const Potential& v,
                                                   const std::vector<int>& n_list, double tau,
                                                   const FKConfig& cfg,
                                                   const OscillationOptions& opt) {
  if (!(tau > 0.0)) throw std::invalid_argument("oscillation_experiment: tau must be positive");
  const int d = v.dim();
  std::vector<OscillationRow> rows;
  for (int n : n_list) {
    if (n < 2) throw std::invalid_argument("oscillation_experiment: n must be >= 2");
    OscillationRow row;
    row.n = n;
    row.tau = tau;
    row.horizon = opt.horizon;
    const Cube cn = example_cube(n, d);
    const Cube dn = example_partner_cube(n, tau, d);
    auto sample = [&](const Cube& q) {
      std::vector<OmegaEstimate> out;
      for (const auto& p : cube_lattice(q)) {
        const double extra = opt.example_k_max > 0 ? example_truncation_tail(opt.example_k_max, p) : 0.0;
        out.push_back(omega(v, p, opt.horizon, cfg, extra));
      }
      return out;
    };
    row.c_samples = sample(cn);
    row.d_samples = sample(dn);

    auto lowest = std::min_element(row.d_samples.begin(), row.d_samples.end(),
                                   [](const auto& a, const auto& b) { return a.value < b.value; });
    auto highest = std::max_element(row.c_samples.begin(), row.c_samples.end(),
                                    [](const auto& a, const auto& b) { return a.value < b.value; });
    row.inf_d = lowest->value;
    row.inf_d_std_error = lowest->std_error;
    row.sup_c = highest->value;
    row.sup_c_std_error = highest->std_error;
    row.gap = row.inf_d - row.sup_c;
    row.gap_std_error = std::hypot(row.inf_d_std_error, row.sup_c_std_error);
    for (const auto& e : row.d_samples) row.tail_bound = std::max(row.tail_bound, e.tail_bound);
    const std::size_t mid = row.c_samples.size() / 2;
    row.depression_c = 1.0 - row.c_samples[mid].value;
    row.depression_d = 1.0 - row.d_samples[mid].value;

    const auto w = cube_lattice_weights(cn);
    double mass_c = 0.0;
    double mass_d = 0.0;
    double err_c = 0.0;
    double err_d = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      mass_c += w[i] * row.c_samples[i].value;
      mass_d += w[i] * row.d_samples[i].value;
      // common seeds correlate the samples; add errors linearly
      err_c += w[i] * row.c_samples[i].std_error;
      err_d += w[i] * row.d_samples[i].std_error;
    }
    row.mu = mass_d / mass_c;
    row.mu_std_error = row.mu * std::hypot(err_c / mass_c, err_d / mass_d);
    row.significant = row.gap - opt.sigmas * row.gap_std_error > 0.0;
    row.conclusive = row.significant && row.tail_bound < opt.tail_fraction * row.gap;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hardy
