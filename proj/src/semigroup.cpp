#include "hardy/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/erf.hpp>
#include <boost/random/normal_distribution.hpp>

#include "hardy/quadrature.hpp"
#include "hardy/rng.hpp"
#include "parallel.hpp"

namespace hardy {

namespace {

using Coords = std::array<double, kMaxDim>;
using Normal = boost::random::normal_distribution<double>;

void require_positive_time(double t, const char* who) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument(std::string(who) + ": t must be positive and finite");
  }
}

/// Term cubes as open boxes in a frame whose origin is `origin`.
class LocalPotential {
public:
  LocalPotential(const Potential& u, const Point& origin)
      : dim_(u.dim()), background_(u.background()) {
    boxes_.reserve(u.terms().size());
    for (const auto& term : u.terms()) {
      Box b;
      b.weight = term.weight;
      for (int i = 0; i < dim_; ++i) {
        const double c = term.cube.center[i] - origin[i];
        b.lo[i] = c - term.cube.radius;
        b.hi[i] = c + term.cube.radius;
      }
      boxes_.push_back(b);
    }
  }

  bool constant() const { return boxes_.empty(); }
  double background() const { return background_; }

  double operator()(const double* p) const {
    double v = background_;
    for (const auto& b : boxes_) {
      bool inside = true;
      for (int i = 0; i < dim_; ++i) {
        if (!(p[i] > b.lo[i] && p[i] < b.hi[i])) {
          inside = false;
          break;
        }
      }
      if (inside) v += b.weight;
    }
    return v;
  }

  /// Squared distance from p to the nearest closed term box.
  double distance2(const double* p) const {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : boxes_) {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) {
        const double g = std::max({b.lo[i] - p[i], 0.0, p[i] - b.hi[i]});
        s += g * g;
      }
      best = std::min(best, s);
    }
    return best;
  }

  void absorb_boxes(const LocalPotential& other) {
    boxes_.insert(boxes_.end(), other.boxes_.begin(), other.boxes_.end());
  }

private:
  struct Box {
    double weight = 0.0;
    Coords lo{};
    Coords hi{};
  };
  int dim_ = 0;
  double background_ = 0.0;
  std::vector<Box> boxes_;
};

std::vector<LocalPotential> localize(const std::vector<Potential>& us, const Point& origin) {
  std::vector<LocalPotential> out;
  out.reserve(us.size());
  for (const auto& u : us) {
    require_same_dim(origin, Point(u.dim()), "Feynman-Kac");
    out.emplace_back(u, origin);
  }
  return out;
}

bool all_constant(const std::vector<LocalPotential>& lps) {
  return std::all_of(lps.begin(), lps.end(), [](const auto& lp) { return lp.constant(); });
}

/// Free path from the frame origin up to time T; accumulates int U_j ds for
/// every potential with the left-point rule and leaves X_T - x in `p`.
struct FreePath {
  int dim = 3;
  double horizon = 1.0;
  double base_step = 1.0 / 256.0;
  bool adaptive = false;
  double inv_two_kappa2 = 1.0 / 72.0;
  double max_step = 1.0;
  const std::vector<LocalPotential>* us = nullptr;
  const LocalPotential* guard = nullptr;

  void run(rng::Engine& eng, double* integrals, double* p) const {
    Normal normal(0.0, 1.0);
    const std::size_t n = us->size();
    for (std::size_t j = 0; j < n; ++j) integrals[j] = 0.0;
    for (int i = 0; i < dim; ++i) p[i] = 0.0;
    double s = 0.0;
    while (s < horizon) {
      double h = base_step;
      if (adaptive) h = std::clamp(guard->distance2(p) * inv_two_kappa2, base_step, max_step);
      bool last = false;
      if (s + h >= horizon) {
        h = horizon - s;
        last = true;
      }
      for (std::size_t j = 0; j < n; ++j) integrals[j] += h * (*us)[j](p);
      const double scale = std::sqrt(2.0 * h);
      for (int i = 0; i < dim; ++i) p[i] += scale * normal(eng);
      s = last ? horizon : s + h;
    }
  }
};

FreePath make_free_path(const std::vector<LocalPotential>& lps, const LocalPotential& guard,
                        double horizon, const FKConfig& cfg, int dim) {
  FreePath fp;
  fp.dim = dim;
  fp.horizon = horizon;
  fp.base_step = 1.0 / cfg.steps;
  fp.adaptive = cfg.adaptive && !guard.constant();
  fp.inv_two_kappa2 = 1.0 / (2.0 * cfg.guard_sigmas * cfg.guard_sigmas);
  fp.max_step = std::max(cfg.max_step, fp.base_step);
  fp.us = &lps;
  fp.guard = &guard;
  return fp;
}

LocalPotential union_guard(const std::vector<LocalPotential>& lps, int dim) {
  LocalPotential guard{Potential(dim), Point(dim)};
  for (const auto& lp : lps) guard.absorb_boxes(lp);
  return guard;
}

/// Brownian bridge in a fixed frame, from `start` to `end` in time `duration`,
/// built from stored free increments: X_i = start + (i/m)(end - start) + W_i - (i/m) W_m.
struct Bridge {
  int dim = 3;
  int slices = 1;
  double duration = 1.0;
  Coords start{};
  Coords end{};
  bool reverse = false;

  void run(rng::Engine& eng, const std::vector<LocalPotential>& us, double* integrals,
           std::vector<double>& noise) const {
    Normal normal(0.0, 1.0);
    const double h = duration / slices;
    const double scale = std::sqrt(2.0 * h);
    noise.resize(static_cast<std::size_t>(slices) * dim);
    for (auto& v : noise) v = scale * normal(eng);
    if (reverse) {
      // W'_i = W_{m-i} - W_m: increments reversed in time and negated
      for (int a = 0, b = slices - 1; a < b; ++a, --b) {
        for (int i = 0; i < dim; ++i) std::swap(noise[a * dim + i], noise[b * dim + i]);
      }
      for (auto& v : noise) v = -v;
    }
    Coords wm{};
    for (int k = 0; k < slices; ++k) {
      for (int i = 0; i < dim; ++i) wm[i] += noise[k * dim + i];
    }
    const std::size_t n = us.size();
    for (std::size_t j = 0; j < n; ++j) integrals[j] = 0.0;
    Coords w{};
    Coords q{};
    for (int k = 0; k < slices; ++k) {
      const double frac = static_cast<double>(k) / slices;
      for (int i = 0; i < dim; ++i) {
        q[i] = start[i] + frac * (end[i] - start[i]) + w[i] - frac * wm[i];
      }
      for (std::size_t j = 0; j < n; ++j) integrals[j] += us[j](q.data());
      for (int i = 0; i < dim; ++i) w[i] += noise[k * dim + i];
    }
    for (std::size_t j = 0; j < n; ++j) integrals[j] *= h;
  }
};

int bridge_slices(double duration, int steps) {
  return std::max(1, static_cast<int>(std::ceil(duration * steps - 1e-9)));
}

Bridge make_bridge(int dim, double duration, const Coords& start, const Coords& end,
                   const FKConfig& cfg) {
  Bridge b;
  b.dim = dim;
  b.slices = bridge_slices(duration, cfg.steps);
  b.duration = duration;
  b.start = start;
  b.end = end;
  b.reverse = cfg.reverse_time;
  return b;
}

Coords offset(const Point& to, const Point& origin) {
  Coords c{};
  for (int i = 0; i < to.dim(); ++i) c[i] = to[i] - origin[i];
  return c;
}

/// Per-path weights exp(-int U_j) for every potential, path-major.
std::vector<double> bridge_weights(const std::vector<LocalPotential>& lps, const Bridge& bridge,
                                   const FKConfig& cfg) {
  const std::size_t n = lps.size();
  std::vector<double> weights(cfg.paths * n);
  detail::for_each_index(cfg.paths, cfg.exec, [&](std::size_t k) {
    thread_local std::vector<double> noise;
    std::array<double, 16> integrals{};
    std::vector<double> big;
    double* out = integrals.data();
    if (n > integrals.size()) {
      big.resize(n);
      out = big.data();
    }
    auto eng = rng::make_engine(cfg.seed, cfg.stream, k);
    bridge.run(eng, lps, out, noise);
    for (std::size_t j = 0; j < n; ++j) weights[k * n + j] = std::exp(-out[j]);
  });
  return weights;
}

KernelEstimate closed_form(double value) {
  KernelEstimate e;
  e.value = value;
  e.method = Method::closed_form;
  return e;
}

KernelEstimate from_stats(const detail::SampleStats& s, double scale, std::size_t n) {
  KernelEstimate e;
  e.value = scale * s.mean;
  e.std_error = scale * s.std_error;
  e.method = Method::monte_carlo;
  e.samples = n;
  return e;
}

double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
double std_normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

}  // namespace

void FKConfig::validate() const {
  if (paths < 1) throw std::invalid_argument("FKConfig.paths must be >= 1");
  if (steps < 1) throw std::invalid_argument("FKConfig.steps must be >= 1");
  if (!(guard_sigmas > 0.0)) throw std::invalid_argument("FKConfig.guard_sigmas must be positive");
  if (!(max_step > 0.0)) throw std::invalid_argument("FKConfig.max_step must be positive");
}

double free_kernel_r2(int dim, double t, double r2) {
  require_positive_time(t, "free_kernel");
  return std::pow(4.0 * std::numbers::pi * t, -0.5 * dim) * std::exp(-r2 / (4.0 * t));
}

double free_kernel(double t, const Point& x, const Point& y) {
  require_same_dim(x, y, "semigroup");
  double r2 = 0.0;
  for (int i = 0; i < x.dim(); ++i) {
    const double d = x[i] - y[i];
    r2 += d * d;
  }
  return free_kernel_r2(x.dim(), t, r2);
}

double free_interval_mass(double t, double delta, double r) {
  const double s = 2.0 * std::sqrt(t);
  const double a = (r - delta) / s;
  const double b = (r + delta) / s;
  // erfc form on the far side avoids cancellation between two erf values near 1
  if (a < 0.0) return 0.5 * (std::erfc(-a) - std::erfc(b));
  if (b < 0.0) return 0.5 * (std::erfc(-b) - std::erfc(a));
  return 0.5 * (std::erf(a) + std::erf(b));
}

double free_on_cube(double t, const Point& x, const Cube& q) {
  require_positive_time(t, "free_on_cube");
  require_same_dim(x, q.center, "semigroup");
  double v = 1.0;
  for (int i = 0; i < x.dim(); ++i) v *= free_interval_mass(t, x[i] - q.center[i], q.radius);
  return v;
}

std::vector<KernelEstimate> fk_kernel_coupled(const std::vector<Potential>& us, double t,
                                              const Point& x, const Point& y,
                                              const FKConfig& cfg) {
  require_positive_time(t, "fk_kernel");
  require_same_dim(x, y, "semigroup");
  cfg.validate();
  const auto lps = localize(us, x);
  const double pt = free_kernel(t, x, y);
  std::vector<KernelEstimate> out;
  if (all_constant(lps)) {
    for (const auto& lp : lps) out.push_back(closed_form(std::exp(-lp.background() * t) * pt));
    return out;
  }
  const auto bridge = make_bridge(x.dim(), t, Coords{}, offset(y, x), cfg);
  const auto w = bridge_weights(lps, bridge, cfg);
  for (std::size_t j = 0; j < lps.size(); ++j) {
    out.push_back(from_stats(detail::summarize(w.data() + j, cfg.paths, lps.size()), pt,
                             cfg.paths));
  }
  return out;
}

KernelEstimate fk_kernel(const Potential& u, double t, const Point& x, const Point& y,
                         const FKConfig& cfg) {
  return fk_kernel_coupled({u}, t, x, y, cfg).front();
}

KernelEstimate fk_kernel_difference(const Potential& a, const Potential& b, double t,
                                    const Point& x, const Point& y, const FKConfig& cfg) {
  require_positive_time(t, "fk_kernel_difference");
  require_same_dim(x, y, "semigroup");
  cfg.validate();
  const std::vector<Potential> us{a, b};
  const auto lps = localize(us, x);
  const double pt = free_kernel(t, x, y);
  if (all_constant(lps)) {
    return closed_form(pt * (std::exp(-a.background() * t) - std::exp(-b.background() * t)));
  }
  const auto bridge = make_bridge(x.dim(), t, Coords{}, offset(y, x), cfg);
  const auto w = bridge_weights(lps, bridge, cfg);
  std::vector<double> diff(cfg.paths);
  for (std::size_t k = 0; k < cfg.paths; ++k) diff[k] = w[2 * k] - w[2 * k + 1];
  return from_stats(detail::summarize(diff.data(), cfg.paths), pt, cfg.paths);
}

KernelEstimate fk_kernel_composed(const Potential& u, double s, double t, const Point& x,
                                  const Point& y, const FKConfig& cfg) {
  require_positive_time(s, "fk_kernel_composed");
  require_positive_time(t, "fk_kernel_composed");
  require_same_dim(x, y, "semigroup");
  cfg.validate();
  const int d = x.dim();
  const double total = s + t;
  const double pt = free_kernel(total, x, y);
  const std::vector<LocalPotential> lps{LocalPotential(u, x)};
  if (lps.front().constant()) return closed_form(std::exp(-u.background() * total) * pt);
  const Coords target = offset(y, x);
  const double sigma = std::sqrt(2.0 * s * t / total);
  std::vector<double> w(cfg.paths);
  detail::for_each_index(cfg.paths, cfg.exec, [&](std::size_t k) {
    thread_local std::vector<double> noise;
    auto eng = rng::make_engine(cfg.seed, cfg.stream, k);
    Normal normal(0.0, 1.0);
    Coords z{};
    for (int i = 0; i < d; ++i) z[i] = (s / total) * target[i] + sigma * normal(eng);
    double first = 0.0;
    double second = 0.0;
    make_bridge(d, s, Coords{}, z, cfg).run(eng, lps, &first, noise);
    make_bridge(d, t, z, target, cfg).run(eng, lps, &second, noise);
    w[k] = std::exp(-first) * std::exp(-second);
  });
  return from_stats(detail::summarize(w.data(), cfg.paths), pt, cfg.paths);
}

std::vector<KernelEstimate> fk_semigroup_mass_coupled(const std::vector<Potential>& us,
                                                      double t, const Point& x,
                                                      const FKConfig& cfg) {
  require_positive_time(t, "fk_semigroup_mass");
  cfg.validate();
  const auto lps = localize(us, x);
  std::vector<KernelEstimate> out;
  if (all_constant(lps)) {
    for (const auto& lp : lps) {
      out.push_back(closed_form(lp.background() == 0.0 ? 1.0 : std::exp(-lp.background() * t)));
    }
    return out;
  }
  const auto guard = union_guard(lps, x.dim());
  const auto path = make_free_path(lps, guard, t, cfg, x.dim());
  const std::size_t n = lps.size();
  std::vector<double> w(cfg.paths * n);
  detail::for_each_index(cfg.paths, cfg.exec, [&](std::size_t k) {
    std::vector<double> integrals(n);
    Coords p{};
    auto eng = rng::make_engine(cfg.seed, cfg.stream, k);
    path.run(eng, integrals.data(), p.data());
    for (std::size_t j = 0; j < n; ++j) w[k * n + j] = std::exp(-integrals[j]);
  });
  for (std::size_t j = 0; j < n; ++j) {
    out.push_back(from_stats(detail::summarize(w.data() + j, cfg.paths, n), 1.0, cfg.paths));
  }
  return out;
}

KernelEstimate fk_semigroup_mass(const Potential& u, double t, const Point& x,
                                 const FKConfig& cfg) {
  return fk_semigroup_mass_coupled({u}, t, x, cfg).front();
}

KernelEstimate fk_apply(const Potential& u, const std::function<double(const Point&)>& f,
                        double t, const Point& x, const FKConfig& cfg) {
  require_positive_time(t, "fk_apply");
  cfg.validate();
  const std::vector<LocalPotential> lps{LocalPotential(u, x)};
  const auto guard = union_guard(lps, x.dim());
  const auto path = make_free_path(lps, guard, t, cfg, x.dim());
  std::vector<double> w(cfg.paths);
  detail::for_each_index(cfg.paths, cfg.exec, [&](std::size_t k) {
    double integral = 0.0;
    Coords p{};
    auto eng = rng::make_engine(cfg.seed, cfg.stream, k);
    path.run(eng, &integral, p.data());
    Point end = x;
    for (int i = 0; i < x.dim(); ++i) end[i] += p[i];
    w[k] = f(end) * std::exp(-integral);
  });
  return from_stats(detail::summarize(w.data(), cfg.paths), 1.0, cfg.paths);
}

namespace {

/// One Monte-Carlo bridge expectation E[exp(-int U)] at a quadrature node.
struct NodeTask {
  const LocalPotential* potential = nullptr;
  Coords start{};
  Coords end{};
  double duration = 0.0;
  double mean = 1.0;
  double variance = 0.0;
};

struct QuadNode {
  double weight = 0.0;
  Coords z{};
  std::size_t first = 0;   // index into tasks, or npos for closed form
  std::size_t second = 0;
  double first_value = 1.0;
  double second_value = 1.0;
};

constexpr std::size_t kClosed = static_cast<std::size_t>(-1);

/// Gauss-Legendre nodes in the quantile variable of N(m, sigma^2) restricted
/// to (lo, hi); returns false when the interval carries no mass.
bool quantile_rule(double m, double sigma, double lo, double hi, int n,
                   std::vector<double>& nodes, std::vector<double>& weights) {
  const auto& rule = quad::gauss_legendre(n);
  nodes.clear();
  weights.clear();
  const double a = (lo - m) / sigma;
  const double b = (hi - m) / sigma;
  const bool upper = a > 0.0;
  // work in the tail that keeps probabilities away from 1
  const double pa = upper ? std_normal_sf(b) : std_normal_cdf(a);
  const double pb = upper ? std_normal_sf(a) : std_normal_cdf(b);
  const double mass = pb - pa;
  if (!(mass > 0.0)) return false;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double u = pa + mass * 0.5 * (1.0 + rule.nodes[j]);
    const double q = std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
    nodes.push_back(m + sigma * (upper ? q : -q));
    weights.push_back(0.5 * mass * rule.weights[j]);
  }
  return true;
}

}  // namespace

PerturbationResult perturbation_residual(const Potential& u1, const Potential& u2, double t,
                                         const Point& x, const Point& y, const FKConfig& cfg,
                                         const PerturbationQuadrature& quad) {
  require_positive_time(t, "perturbation_residual");
  require_same_dim(x, y, "semigroup");
  cfg.validate();
  PerturbationResult res;
  if (u2.is_zero()) return res;
  const int d = x.dim();
  const Potential full = u1 + u2;

  const auto lhs = fk_kernel_difference(u1, full, t, x, y, cfg);
  res.lhs = lhs.value;
  res.lhs_std_error = lhs.std_error;

  const LocalPotential lp1(u1, x);
  const LocalPotential lpf(full, x);
  const LocalPotential lp2(u2, x);
  const Coords target = offset(y, x);

  std::vector<NodeTask> tasks;
  std::vector<QuadNode> nodes;
  const auto& srule = quad::gauss_legendre(quad.s_nodes);
  const auto& hermite = quad::gauss_hermite(quad.hermite_nodes);

  auto add_node = [&](double weight, const Coords& z, double s) {
    QuadNode node;
    node.weight = weight;
    node.z = z;
    if (lp1.constant()) {
      node.first = kClosed;
      node.first_value = std::exp(-u1.background() * (t - s));
    } else {
      node.first = tasks.size();
      tasks.push_back({&lp1, Coords{}, z, t - s});
    }
    if (lpf.constant()) {
      node.second = kClosed;
      node.second_value = std::exp(-full.background() * s);
    } else {
      node.second = tasks.size();
      tasks.push_back({&lpf, z, target, s});
    }
    nodes.push_back(node);
  };

  std::vector<std::vector<double>> axis_nodes(d);
  std::vector<std::vector<double>> axis_weights(d);
  for (std::size_t js = 0; js < srule.size(); ++js) {
    const double s = 0.5 * t * (1.0 + srule.nodes[js]);
    const double ws = 0.5 * t * srule.weights[js];
    const double sigma = std::sqrt(2.0 * s * (t - s) / t);
    Coords m{};
    for (int i = 0; i < d; ++i) m[i] = ((t - s) / t) * target[i];
    const bool smooth = lp1.constant() && lpf.constant();

    if (u2.background() > 0.0) {
      if (smooth) {
        add_node(ws * u2.background(), m, s);
      } else {
        // Gauss-Hermite on the bridge-point Gaussian
        const int n = static_cast<int>(hermite.size());
        std::size_t total = 1;
        for (int i = 0; i < d; ++i) total *= n;
        const double norm = std::pow(std::numbers::pi, -0.5 * d);
        for (std::size_t code = 0; code < total; ++code) {
          std::size_t c = code;
          double w = ws * u2.background() * norm;
          Coords z{};
          for (int i = 0; i < d; ++i) {
            const std::size_t k = c % n;
            c /= n;
            w *= hermite.weights[k];
            z[i] = m[i] + std::numbers::sqrt2 * sigma * hermite.nodes[k];
          }
          add_node(w, z, s);
        }
      }
    }

    for (const auto& term : u2.terms()) {
      bool empty = false;
      for (int i = 0; i < d; ++i) {
        const double c = term.cube.center[i] - x[i];
        if (!quantile_rule(m[i], sigma, c - term.cube.radius, c + term.cube.radius,
                           quad.z_nodes, axis_nodes[i], axis_weights[i])) {
          empty = true;
        }
      }
      if (empty) continue;
      std::size_t total = 1;
      for (int i = 0; i < d; ++i) total *= axis_nodes[i].size();
      for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        double w = ws * term.weight;
        Coords z{};
        for (int i = 0; i < d; ++i) {
          const std::size_t k = c % axis_nodes[i].size();
          c /= axis_nodes[i].size();
          w *= axis_weights[i][k];
          z[i] = axis_nodes[i][k];
        }
        add_node(w, z, s);
      }
    }
  }

  FKConfig node_cfg = cfg;
  node_cfg.paths = quad.node_paths;
  node_cfg.exec = Exec::serial;
  node_cfg.reverse_time = false;
  detail::for_each_index(tasks.size(), cfg.exec, [&](std::size_t i) {
    auto& task = tasks[i];
    FKConfig local = node_cfg;
    local.stream = rng::mix64(cfg.stream ^ (0x9e3779b97f4a7c15ULL + i));
    const Bridge bridge = make_bridge(d, task.duration, task.start, task.end, local);
    const std::vector<LocalPotential> one{*task.potential};
    const auto w = bridge_weights(one, bridge, local);
    const auto st = detail::summarize(w.data(), w.size());
    task.mean = st.mean;
    task.variance = st.std_error * st.std_error;
  });

  const double pt = free_kernel(t, x, y);
  double sum = 0.0;
  double var = 0.0;
  for (const auto& node : nodes) {
    const double f1 = node.first == kClosed ? node.first_value : tasks[node.first].mean;
    const double v1 = node.first == kClosed ? 0.0 : tasks[node.first].variance;
    const double f2 = node.second == kClosed ? node.second_value : tasks[node.second].mean;
    const double v2 = node.second == kClosed ? 0.0 : tasks[node.second].variance;
    sum += node.weight * f1 * f2;
    var += node.weight * node.weight * (f2 * f2 * v1 + f1 * f1 * v2 + v1 * v2);
  }
  res.rhs = pt * sum;
  res.rhs_std_error = pt * std::sqrt(var);
  res.residual = std::abs(res.lhs - res.rhs);
  res.sigma = std::hypot(res.lhs_std_error, res.rhs_std_error);
  return res;
}

namespace {

/// Applies the one-axis matrix a (rows = output index, cols = input index)
/// along `axis` of a row-major tensor.
std::vector<double> contract_axis(const std::vector<double>& in, const std::vector<int>& res,
                                  int axis, const std::vector<double>& a, Exec exec) {
  std::size_t outer = 1;
  for (int i = 0; i < axis; ++i) outer *= res[i];
  std::size_t inner = 1;
  for (std::size_t i = axis + 1; i < res.size(); ++i) inner *= res[i];
  const std::size_t n = res[axis];
  std::vector<double> out(in.size(), 0.0);
  detail::for_each_index(outer * n, exec, [&](std::size_t ok) {
    const std::size_t o = ok / n;
    const std::size_t k = ok % n;
    for (std::size_t c = 0; c < n; ++c) {
      const double coef = a[k * n + c];
      if (coef == 0.0) continue;
      const double* src = &in[(o * n + c) * inner];
      double* dst = &out[(o * n + k) * inner];
      for (std::size_t j = 0; j < inner; ++j) dst[j] += coef * src[j];
    }
  });
  return out;
}

}  // namespace

ApproxIdentityReport approx_identity_error(const Potential& u, const GridFunction& f, double t,
                                           const FKConfig& cfg) {
  require_positive_time(t, "approx_identity_error");
  cfg.validate();
  const auto& grid = f.grid;
  const int d = grid.dim();
  if (u.dim() != d) throw std::invalid_argument("approx_identity_error: dimension mismatch");
  ApproxIdentityReport rep;
  rep.t = t;
  std::vector<double> smoothed(grid.size());
  std::vector<double> errors(grid.size(), 0.0);

  if (u.is_zero()) {
    rep.method = Method::closed_form;
    std::vector<std::vector<double>> mats(d);
    std::vector<std::vector<double>> inside(d);
    for (int a = 0; a < d; ++a) {
      const int n = grid.resolution()[a];
      const double half = 0.5 * grid.spacing(a);
      mats[a].assign(static_cast<std::size_t>(n) * n, 0.0);
      inside[a].assign(n, 0.0);
      for (int k = 0; k < n; ++k) {
        for (int c = 0; c < n; ++c) {
          const double delta = grid.center_coord(a, k) - grid.center_coord(a, c);
          mats[a][k * n + c] = free_interval_mass(t, delta, half);
        }
        const double box_mid = 0.5 * (grid.lo()[a] + grid.hi()[a]);
        const double box_half = 0.5 * (grid.hi()[a] - grid.lo()[a]);
        inside[a][k] = free_interval_mass(t, grid.center_coord(a, k) - box_mid, box_half);
      }
    }
    smoothed = f.values;
    for (int a = 0; a < d; ++a) smoothed = contract_axis(smoothed, grid.resolution(), a, mats[a], cfg.exec);
    if (f.exterior != 0.0) {
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const auto idx = grid.unravel(k);
        double mass = 1.0;
        for (int a = 0; a < d; ++a) mass *= inside[a][idx[a]];
        smoothed[k] += f.exterior * (1.0 - mass);
      }
    }
  } else {
    rep.method = Method::monte_carlo;
    FKConfig inner = cfg;
    inner.exec = Exec::serial;
    std::vector<double> se(grid.size(), 0.0);
    detail::for_each_index(grid.size(), cfg.exec, [&](std::size_t k) {
      const auto e = fk_apply(u, [&f](const Point& p) { return f(p); }, t, grid.cell_center(k),
                              inner);
      smoothed[k] = e.value;
      se[k] = e.std_error;
    });
    for (double s : se) rep.max_std_error = std::max(rep.max_std_error, s);
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double err = std::abs(smoothed[k] - f.values[k]);
    if (f.touches_jump(k)) {
      ++rep.jump_cells;
      rep.sup_error_near_jumps = std::max(rep.sup_error_near_jumps, err);
    } else {
      ++rep.interior_cells;
      rep.sup_error = std::max(rep.sup_error, err);
    }
  }
  return rep;
}

GaussianFit fit_gaussian_profile(int dim, const std::vector<KernelSample>& samples) {
  GaussianFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : samples) {
    if (!(s.value > 0.0) || !(s.t > 0.0)) continue;
    xs.push_back(-s.r2 / s.t);
    ys.push_back(std::log(s.value) + 0.5 * dim * std::log(s.t));
  }
  fit.samples = xs.size();
  if (xs.size() < 2) return fit;
  const double n = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) return fit;
  fit.rate = sxy / sxx;
  fit.log_amplitude = my - fit.rate * mx;
  fit.r_squared = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace hardy
