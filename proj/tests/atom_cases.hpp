#pragma once

#include <algorithm>
#include <random>

#include "hardy/atoms.hpp"

namespace hardy::cases {

struct RandomCase {
  Atom atom;
  Cube q;
  double eps;
};

// An (omega, Q)-atom for the Hoelder stub centered at c_K: two subcubes in
// opposite halves of K, weighted so that int a omega = 0.
inline RandomCase random_case(std::mt19937_64& rng, int ratio_exp, double eps) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int d = 3;
  RandomCase rc;
  rc.eps = eps;
  Point qc(d);
  for (int i = 0; i < d; ++i) qc[i] = 4.0 * u(rng) - 2.0;
  rc.q = Cube(qc, 1.0);
  const Cube qss = dilate(rc.q, 2, 0.125);
  const double rk = std::ldexp(rc.q.radius, -ratio_exp);
  Point kc(d);
  for (int i = 0; i < d; ++i) kc[i] = qc[i] + (2.0 * u(rng) - 1.0) * (qss.radius - rk);
  const Cube k(kc, rk);
  const int axis = static_cast<int>(u(rng) * d) % d;
  auto sub = [&](int side) {
    const double r = 0.5 * rk * (0.3 + 0.7 * u(rng));
    Point c(d);
    for (int i = 0; i < d; ++i) {
      if (i == axis) {
        const double lo = side < 0 ? k.lo(i) + r : kc[i] + r;
        const double hi = side < 0 ? kc[i] - r : k.hi(i) - r;
        c[i] = lo + (hi - lo) * u(rng);
      } else {
        c[i] = k.lo(i) + r + (k.side() - 2 * r) * u(rng);
      }
    }
    return Cube(c, r);
  };
  const Cube k1 = sub(-1);
  const Cube k2 = sub(+1);
  const auto w = holder_stub_omega(kc, rc.q.diameter(), eps, 2.0);
  const double beta = w.integrate(k1).value / w.integrate(k2).value;
  const double alpha = (u(rng) < 0.5 ? -1.0 : 1.0) / (k.volume() * std::max(1.0, beta));
  rc.atom.f = IndicatorCombination(d);
  rc.atom.f.add(alpha, k1);
  rc.atom.f.add(-alpha * beta, k2);
  rc.atom.support = k;
  rc.atom.host = rc.q;
  rc.atom.kind = AtomKind::omega_q_atom;
  return rc;
}

}  // namespace hardy::cases
