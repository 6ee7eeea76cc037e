#include "hardy/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "hardy/quadrature.hpp"

namespace hardy {

IndicatorCombination& IndicatorCombination::add(double coef, const Cube& cube) {
  if (dim_ == 0) dim_ = cube.dim();
  if (cube.dim() != dim_) throw std::invalid_argument("IndicatorCombination: dimension mismatch");
  if (!(cube.radius > 0.0)) throw std::invalid_argument("IndicatorCombination: cube radius must be positive");
  if (!std::isfinite(coef)) throw std::invalid_argument("IndicatorCombination: coefficient is not finite");
  for (auto it = terms_.begin(); it != terms_.end(); ++it) {
    if (it->cube == cube) {
      it->coef += coef;
      if (it->coef == 0.0) terms_.erase(it);
      return *this;
    }
  }
  if (coef != 0.0) terms_.push_back({coef, cube});
  return *this;
}

IndicatorCombination& IndicatorCombination::add(double scale, const IndicatorCombination& other) {
  for (const auto& t : other.terms_) add(scale * t.coef, t.cube);
  return *this;
}

IndicatorCombination IndicatorCombination::scaled(double s) const {
  IndicatorCombination out(dim_);
  if (s == 0.0) return out;
  out.terms_ = terms_;
  for (auto& t : out.terms_) t.coef *= s;
  return out;
}

double IndicatorCombination::operator()(const Point& x) const {
  double v = 0.0;
  for (const auto& t : terms_) {
    if (t.cube.contains(x)) v += t.coef;
  }
  return v;
}

double IndicatorCombination::integral() const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coef * t.cube.volume();
  return v;
}

double IndicatorCombination::integral_over(const Cube& q) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t.coef * overlap_volume(t.cube, q);
  return v;
}

double IndicatorCombination::sup_norm() const {
  if (terms_.empty()) return 0.0;
  const int d = dim_;
  std::vector<std::vector<double>> cuts(d);
  for (int i = 0; i < d; ++i) {
    for (const auto& t : terms_) {
      cuts[i].push_back(t.cube.lo(i));
      cuts[i].push_back(t.cube.hi(i));
    }
    std::sort(cuts[i].begin(), cuts[i].end());
    cuts[i].erase(std::unique(cuts[i].begin(), cuts[i].end()), cuts[i].end());
  }
  std::vector<std::size_t> extent(d);
  std::size_t cells = 1;
  for (int i = 0; i < d; ++i) {
    extent[i] = cuts[i].size() - 1;
    cells *= extent[i];
  }
  if (cells > (std::size_t{1} << 27)) throw std::runtime_error("sup_norm: arrangement too large");

  // add each term to the block of arrangement cells it covers
  std::vector<double> acc(cells, 0.0);
  for (const auto& t : terms_) {
    std::vector<std::size_t> first(d), last(d);
    for (int i = 0; i < d; ++i) {
      first[i] = std::lower_bound(cuts[i].begin(), cuts[i].end(), t.cube.lo(i)) - cuts[i].begin();
      last[i] = std::lower_bound(cuts[i].begin(), cuts[i].end(), t.cube.hi(i)) - cuts[i].begin();
    }
    std::vector<std::size_t> idx = first;
    while (true) {
      std::size_t lin = 0;
      for (int i = 0; i < d; ++i) lin = lin * extent[i] + idx[i];
      acc[lin] += t.coef;
      int i = d - 1;
      for (; i >= 0; --i) {
        if (++idx[i] < last[i]) break;
        idx[i] = first[i];
      }
      if (i < 0) break;
    }
  }
  double sup = 0.0;
  for (double v : acc) sup = std::max(sup, std::abs(v));
  return sup;
}

const char* to_string(AtomKind kind) {
  switch (kind) {
    case AtomKind::omega_atom: return "omega";
    case AtomKind::q_atom: return "q";
    case AtomKind::omega_q_atom: return "omega_q";
    case AtomKind::cube_average: return "cube_average";
  }
  return "?";
}

AtomKind atom_kind_from_string(const std::string& s) {
  if (s == "omega") return AtomKind::omega_atom;
  if (s == "q") return AtomKind::q_atom;
  if (s == "omega_q") return AtomKind::omega_q_atom;
  if (s == "cube_average") return AtomKind::cube_average;
  throw std::invalid_argument("unknown atom kind '" + s + "'");
}

Atom cube_average_atom(const Cube& q) {
  Atom a;
  a.f = IndicatorCombination(q.dim());
  a.f.add(1.0 / q.volume(), q);
  a.support = q;
  a.host = q;
  a.kind = AtomKind::cube_average;
  return a;
}

double AtomicDecomposition::total() const {
  double s = 0.0;
  for (const auto& e : entries) s += std::abs(e.lambda);
  return s;
}

double AtomicDecomposition::operator()(const Point& x) const {
  double s = 0.0;
  for (const auto& e : entries) s += e.lambda * e.atom.f(x);
  return s;
}

IndicatorCombination AtomicDecomposition::combined(int dim) const {
  IndicatorCombination out(dim);
  for (const auto& e : entries) out.add(e.lambda, e.atom.f);
  return out;
}

OmegaEstimate ExactOmega::at(const Point& x) const {
  OmegaEstimate e;
  e.value = f_(x);
  return e;
}

CubeIntegral ExactOmega::integrate(const Cube& q) const {
  const auto& rule = quad::gauss_legendre(nodes_);
  const int d = q.dim();
  const int m = static_cast<int>(rule.size());
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= m;
  CubeIntegral out;
  out.min_value = std::numeric_limits<double>::infinity();
  const double jac = q.volume() / std::pow(2.0, d);
  for (std::size_t code = 0; code < total; ++code) {
    Point p = q.center;
    double w = jac;
    std::size_t c = code;
    for (int i = d - 1; i >= 0; --i) {
      const int k = static_cast<int>(c % m);
      c /= m;
      p[i] += q.radius * rule.nodes[k];
      w *= rule.weights[k];
    }
    const double v = f_(p);
    out.value += w * v;
    out.min_value = std::min(out.min_value, v);
  }
  return out;
}

ExactOmega unit_omega() {
  return ExactOmega([](const Point&) { return 1.0; }, 1);
}

ExactOmega holder_stub_omega(const Point& center, double scale, double eps, double lambda) {
  if (!(scale > 0.0) || !(lambda > 0.0) || !(eps >= 0.0 && eps < 1.0)) {
    throw std::invalid_argument("holder_stub_omega: need scale > 0, lambda > 0, 0 <= eps < 1");
  }
  // nodes: exact for lambda = 2 on cubes where the clamp is inactive
  return ExactOmega(
      [=](const Point& x) {
        const double s = std::min(distance(x, center) / scale, 1.0);
        return 1.0 - eps * std::pow(s, lambda);
      },
      5);
}

namespace {

std::array<double, kMaxDim> key_of(const Point& x) {
  std::array<double, kMaxDim> k{};
  for (int i = 0; i < x.dim(); ++i) k[i] = x[i];
  return k;
}

}  // namespace

OmegaEstimate MemoOmega::at(const Point& x) const {
  const auto key = key_of(x);
  {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
  }
  const double extra = k_max_ > 0 ? example_truncation_tail(k_max_, x) : 0.0;
  const auto e = omega(v_, x, horizon_, cfg_, extra);
  std::lock_guard<std::mutex> lock(mutex_);
  memo_.emplace(key, e);
  return e;
}

CubeIntegral MemoOmega::integrate(const Cube& q) const {
  const auto pts = cube_lattice(q);
  const auto w = cube_lattice_weights(q);
  CubeIntegral out;
  out.min_value = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto e = at(pts[i]);
    out.value += w[i] * e.value;
    out.std_error += w[i] * e.std_error;
    out.min_value = std::min(out.min_value, e.value);
  }
  return out;
}

void MemoOmega::warm(const std::vector<Point>& points) const {
  for (const auto& p : points) at(p);
}

std::size_t MemoOmega::cached() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return memo_.size();
}

namespace {

constexpr double kRel = 1e-12;

bool inside(const Cube& outer, const Cube& inner) {
  return encloses(outer, inner, kRel * std::max(1.0, outer.radius));
}

Atom as_q_atom(IndicatorCombination f, const Cube& support, const Cube& host) {
  Atom a;
  a.f = std::move(f);
  a.support = support;
  a.host = host;
  a.kind = AtomKind::q_atom;
  return a;
}

// Appends b / lambda with lambda = ||b|| |supp|; skips b = 0.
void push_normalized(AtomicDecomposition& out, const IndicatorCombination& b, const Cube& supp,
                     const Cube& host) {
  const double sup = b.sup_norm();
  if (sup == 0.0) return;
  const double lambda = sup * supp.volume();
  out.entries.push_back({lambda, as_q_atom(b.scaled(1.0 / lambda), supp, host)});
}

}  // namespace

AtomReport validate(const Atom& a, const CubeFamily& family, const OmegaField& omega) {
  if (a.f.dim() != 0 && a.f.dim() != a.support.dim()) {
    throw std::invalid_argument("validate: atom and support dimensions differ");
  }
  const bool needs_host = a.kind != AtomKind::omega_atom;
  if (needs_host && !family.index_of(a.host)) {
    throw std::invalid_argument("validate: host cube is not a member of the family");
  }
  AtomReport r;
  r.sup_norm = a.f.sup_norm();
  r.size_bound = 1.0 / a.support.volume();
  r.size_ok = r.sup_norm <= r.size_bound * (1.0 + kRel);

  r.support_ok = true;
  for (const auto& t : a.f.terms()) r.support_ok = r.support_ok && inside(a.support, t.cube);
  if (a.kind == AtomKind::q_atom || a.kind == AtomKind::omega_q_atom) {
    r.support_ok = r.support_ok && inside(dilate(a.host, 2, family.theta), a.support);
  }

  switch (a.kind) {
    case AtomKind::cube_average: {
      IndicatorCombination diff = a.f;
      diff.add(-1.0 / a.host.volume(), a.host);
      r.support_ok = r.support_ok && a.support == a.host;
      r.cancel_ok = diff.sup_norm() <= kRel / a.host.volume();
      break;
    }
    case AtomKind::q_atom:
      r.cancel_required = true;
      r.cancellation = a.f.integral();
      r.cancel_ok = std::abs(r.cancellation) <= kRel;
      break;
    case AtomKind::omega_atom:
    case AtomKind::omega_q_atom: {
      r.cancel_required = true;
      for (const auto& t : a.f.terms()) {
        const auto ci = omega.integrate(t.cube);
        r.cancellation += t.coef * ci.value;
        r.cancellation_std_error += std::abs(t.coef) * ci.std_error;
      }
      r.cancel_ok = std::abs(r.cancellation) <= std::max(kRel, 3.0 * r.cancellation_std_error);
      break;
    }
  }
  return r;
}

Cube enclosing_cube(const Cube& a, const Cube& b, const Cube& outer) {
  const int d = a.dim();
  double side = 0.0;
  for (int i = 0; i < d; ++i) {
    side = std::max(side, std::max(a.hi(i), b.hi(i)) - std::min(a.lo(i), b.lo(i)));
  }
  const double r = 0.5 * side;
  Point c(d);
  for (int i = 0; i < d; ++i) {
    const double lo = std::min(a.lo(i), b.lo(i));
    const double hi = std::max(a.hi(i), b.hi(i));
    double lo_c = hi - r;
    double hi_c = lo + r;
    if (r <= outer.radius) {
      lo_c = std::max(lo_c, outer.center[i] - (outer.radius - r));
      hi_c = std::min(hi_c, outer.center[i] + (outer.radius - r));
    }
    c[i] = lo_c <= hi_c ? std::clamp(0.5 * (lo + hi), lo_c, hi_c) : 0.5 * (lo_c + hi_c);
  }
  return Cube(c, r);
}

AtomicDecomposition split_omega_q_atom(const Atom& a, const Cube& q, double theta) {
  const Cube qss = dilate(q, 2, theta);
  if (!inside(qss, a.support)) {
    throw std::invalid_argument("split_omega_q_atom: support is not inside Q**");
  }
  const double kappa = a.f.integral();
  if (std::abs(kappa) > 1.0 + kRel) {
    throw std::invalid_argument("split_omega_q_atom: |int a| exceeds 1, not an atom");
  }
  AtomicDecomposition out;
  if (std::abs(kappa) <= kRel) {
    out.entries.push_back({1.0, as_q_atom(a.f, a.support, q)});
    return out;
  }
  IndicatorCombination b1 = a.f;
  b1.add(-kappa / q.volume(), q);
  push_normalized(out, b1, enclosing_cube(a.support, q, qss), q);
  out.entries.push_back({kappa, cube_average_atom(q)});
  return out;
}

TelescopeResult telescope(const Atom& a, const Cube& q, const OmegaField* omega,
                          double holder_exponent, double theta) {
  const int d = q.dim();
  const Cube qss = dilate(q, 2, theta);
  const Cube& k = a.support;
  if (!inside(qss, k)) throw std::invalid_argument("telescope: support is not inside Q**");
  for (const auto& t : a.f.terms()) {
    if (!inside(k, t.cube)) throw std::invalid_argument("telescope: a has mass outside its support cube");
  }

  TelescopeResult res;
  if (omega) {
    double c = 0.0;
    for (const auto& t : a.f.terms()) c += t.coef * omega->integrate(t.cube).value;
    res.cancellation = c;
  }

  // G_n: radius doubles, center as close to c_K as G_{n-1} ⊆ G_n ⊆ Q** allows
  res.chain.push_back(k);
  while (res.chain.back().radius < 0.5 * q.radius * (1.0 - kRel)) {
    const Cube& g = res.chain.back();
    const double r = 2.0 * g.radius;
    Point c(d);
    for (int i = 0; i < d; ++i) {
      const double lo = std::max(g.center[i] - g.radius, qss.center[i] - (qss.radius - r));
      const double hi = std::min(g.center[i] + g.radius, qss.center[i] + (qss.radius - r));
      c[i] = lo <= hi ? std::clamp(k.center[i], lo, hi) : 0.5 * (lo + hi);
    }
    res.chain.push_back(Cube(c, r));
  }
  res.N = static_cast<int>(res.chain.size()) - 1;
  const int n_last = res.N;

  const double t0 = a.f.integral_over(k) / k.volume();
  res.t.push_back(t0);
  for (int n = 1; n <= n_last; ++n) res.t.push_back(res.t.back() * std::pow(2.0, -d));
  res.t.push_back(res.t.back() * res.chain.back().volume());
  if (holder_exponent > 0.0) {
    res.t0_ratio = std::abs(t0) * k.volume() / std::pow(k.diameter() / q.diameter(), holder_exponent);
  }

  auto record = [&](const IndicatorCombination& b, const Cube& supp) {
    res.pieces.push_back({b.integral(), b.sup_norm(), supp});
    res.piece_functions.push_back(b);
  };

  IndicatorCombination b0 = a.f;
  b0.add(-t0, k);
  record(b0, k);
  for (int n = 1; n <= n_last; ++n) {
    IndicatorCombination b(d);
    b.add(res.t[n - 1], res.chain[n - 1]);
    b.add(-res.t[n], res.chain[n]);
    record(b, res.chain[n]);
  }
  const double t_top = res.t.back();
  IndicatorCombination bn1(d);
  bn1.add(res.t[n_last], res.chain.back());
  bn1.add(-t_top / q.volume(), q);
  record(bn1, enclosing_cube(res.chain.back(), q, qss));
  IndicatorCombination bn2(d);
  bn2.add(t_top / q.volume(), q);
  record(bn2, q);

  if (std::abs(t0) * k.volume() <= kRel * std::max(1.0, a.f.sup_norm() * k.volume())) {
    res.collapsed = true;
    res.decomposition.entries.push_back({1.0, as_q_atom(a.f, k, q)});
    return res;
  }
  for (int j = 0; j <= n_last + 1; ++j) {
    push_normalized(res.decomposition, res.piece_functions[j], res.pieces[j].support, q);
  }
  if (t_top != 0.0) res.decomposition.entries.push_back({t_top, cube_average_atom(q)});
  return res;
}

ExampleAtom build_example_atom(int n, double tau, double zeta, const OmegaField& omega, int dim,
                               double mu_tolerance) {
  if (n < 1) throw std::invalid_argument("build_example_atom: n must be >= 1");
  if (!(tau > 0.0)) throw std::invalid_argument("build_example_atom: tau must be positive");
  ExampleAtom ex;
  ex.c = example_cube(n, dim);
  ex.d = example_partner_cube(n, tau, dim);
  const auto ic = omega.integrate(ex.c);
  const auto id = omega.integrate(ex.d);
  if (!(ic.value > 0.0)) throw std::runtime_error("build_example_atom: omega(C_n) is not positive");
  ex.mu = id.value / ic.value;
  ex.mu_std_error = ex.mu * std::hypot(ic.std_error / ic.value, id.std_error / id.value);
  if (ex.mu_std_error > mu_tolerance) {
    throw std::runtime_error("build_example_atom: standard error of mu_n " +
                             std::to_string(ex.mu_std_error) + " exceeds mu_tolerance " +
                             std::to_string(mu_tolerance));
  }
  ex.delta_hat = std::min(ic.min_value, id.min_value);
  ex.zeta = zeta > 0.0 ? zeta : ex.delta_hat * std::pow(2.0 * (tau + 1.0), -dim);
  const double scale = ex.zeta * std::pow(static_cast<double>(n), dim);
  ex.atom.f = IndicatorCombination(dim);
  ex.atom.f.add(scale * ex.mu, ex.c);
  ex.atom.f.add(-scale, ex.d);
  ex.atom.support = Cube(ex.c.center, (tau + 1.0) / n);
  ex.atom.host = Cube(ex.c.center, 1.0);
  ex.atom.kind = AtomKind::omega_q_atom;
  ex.kappa = ex.atom.f.integral();
  return ex;
}

CubeFamily even_unit_family(const Cube& bbox) {
  const int d = bbox.dim();
  std::vector<long> lo(d), hi(d);
  Point blo(d), bhi(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = static_cast<long>(std::floor((bbox.lo(i) + 1.0) / 2.0));
    hi[i] = static_cast<long>(std::ceil((bbox.hi(i) - 1.0) / 2.0));
    blo[i] = 2.0 * lo[i] - 1.0;
    bhi[i] = 2.0 * hi[i] + 1.0;
  }
  CubeFamily fam;
  double side = 0.0;
  for (int i = 0; i < d; ++i) side = std::max(side, bhi[i] - blo[i]);
  fam.bbox = Cube((blo + bhi) * 0.5, 0.5 * side);
  std::vector<long> idx = lo;
  while (true) {
    Point c(d);
    for (int i = 0; i < d; ++i) c[i] = 2.0 * idx[i];
    fam.cubes.emplace_back(c, 1.0);
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++idx[i] <= hi[i]) break;
      idx[i] = lo[i];
    }
    if (i < 0) break;
  }
  return fam;
}

}  // namespace hardy
