#pragma once

#include <functional>
#include <vector>

namespace hardy::quad {

/// One-dimensional rule on [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule with n nodes (Newton iteration on P_n), cached per n.
const Rule& gauss_legendre(int n);

/// Gauss-Hermite rule for the weight exp(-x^2), n nodes, cached per n.
const Rule& gauss_hermite(int n);

/// Integrates f over [a, b] with the n-point Gauss-Legendre rule.
double integrate(const std::function<double(double)>& f, double a, double b, int n);

/// Composite Gauss-Legendre: `pieces` equal panels, n nodes each.
double integrate_composite(const std::function<double(double)>& f, double a, double b,
                           int pieces, int n);

}  // namespace hardy::quad
