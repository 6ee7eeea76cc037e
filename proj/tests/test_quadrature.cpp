#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hardy/quadrature.hpp"

using namespace hardy;

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  for (int n : {1, 2, 5, 8, 16, 33}) {
    const auto& r = quad::gauss_legendre(n);
    ASSERT_EQ(r.size(), static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = (p % 2 == 1) ? 0.0 : 2.0 / (p + 1);
      EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " p=" << p;
    }
  }
}

TEST(Quadrature, GaussHermiteMoments) {
  for (int n : {1, 4, 9, 20}) {
    const auto& r = quad::gauss_hermite(n);
    double m0 = 0.0;
    double m2 = 0.0;
    double m4 = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      m0 += r.weights[i];
      m2 += r.weights[i] * r.nodes[i] * r.nodes[i];
      m4 += r.weights[i] * std::pow(r.nodes[i], 4);
    }
    const double sp = std::sqrt(std::numbers::pi);
    EXPECT_NEAR(m0, sp, 1e-12);
    if (n >= 2) EXPECT_NEAR(m2, sp / 2.0, 1e-12);
    if (n >= 3) EXPECT_NEAR(m4, 3.0 * sp / 4.0, 1e-12);
  }
}

TEST(Quadrature, CompositeIntegration) {
  const double v = quad::integrate_composite([](double x) { return std::exp(-x * x); }, -6, 6, 8, 16);
  EXPECT_NEAR(v, std::sqrt(std::numbers::pi), 1e-13);
  EXPECT_THROW(quad::gauss_legendre(0), std::invalid_argument);
}
