#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "hardy/potentials.hpp"

using namespace hardy;

namespace {

// Closed-form Newton potential of a box in R^3 (corner antiderivative).
double corner_term(double x, double y, double z) {
  const double r = std::sqrt(x * x + y * y + z * z);
  if (r == 0.0) return 0.0;
  double f = 0.0;
  auto log_part = [&](double coef, double a) {
    if (coef == 0.0) return 0.0;
    return coef * std::log(a + r);
  };
  auto atan_part = [&](double a, double b, double c) {
    if (a == 0.0) return 0.0;
    return -0.5 * a * a * std::atan(b * c / (a * r));
  };
  f += log_part(y * z, x) + log_part(x * z, y) + log_part(x * y, z);
  f += atan_part(x, y, z) + atan_part(y, x, z) + atan_part(z, x, y);
  return f;
}

double box_newton_oracle(const Cube& c, const Point& p) {
  double total = 0.0;
  for (int mask = 0; mask < 8; ++mask) {
    double v[3];
    int uppers = 0;
    for (int i = 0; i < 3; ++i) {
      const bool up = (mask >> i) & 1;
      uppers += up;
      v[i] = (up ? c.hi(i) : c.lo(i)) - p[i];
    }
    total += ((3 - uppers) % 2 == 0 ? 1.0 : -1.0) * corner_term(v[0], v[1], v[2]);
  }
  return total;
}

// int_{Q(0,1)} |u|^{-1} du
const double kUnitCubeValue =
    12.0 * (2.0 * std::log(1.0 + std::sqrt(3.0)) - std::numbers::pi / 6.0 - std::log(2.0));

Cube cube3(double x, double y, double z, double r) { return Cube(Point{x, y, z}, r); }

}  // namespace

TEST(Potential, ExampleTerms) {
  const auto e2 = example_potential(2);
  ASSERT_EQ(e2.potential.terms().size(), 1u);
  EXPECT_EQ(e2.potential.terms()[0].weight, 4.0);
  EXPECT_EQ(e2.potential.terms()[0].cube, cube3(4, 0, 0, 0.25));
  const auto e3 = example_potential(3);
  ASSERT_EQ(e3.potential.terms().size(), 2u);
  EXPECT_EQ(e3.potential.terms()[1].weight, 9.0);
  EXPECT_EQ(e3.potential.terms()[1].cube, cube3(8, 0, 0, 1.0 / 6.0));
  EXPECT_EQ(e3.potential(Point{8.1, 0.1, -0.1}), 9.0);
  EXPECT_EQ(e3.potential(Point{8.2, 0.0, 0.0}), 0.0);
  EXPECT_THROW(example_potential(1), std::invalid_argument);
}

TEST(Potential, TailMajorantMatchesDirectSum) {
  double direct = 0.0;
  for (int k = 11; k < 200; ++k) direct += 1.0 / (k * std::ldexp(1.0, k));
  EXPECT_NEAR(example_tail_majorant(10, 3), direct, 1e-15);
  EXPECT_LT(example_tail_majorant(10, 3), 1e-3);
  EXPECT_EQ(example_potential(10).tail_majorant, example_tail_majorant(10, 3));
}

TEST(Potential, TermsAndBackground) {
  Potential v(3, 0.5);
  v.add_term(0.0, cube3(0, 0, 0, 1));
  EXPECT_TRUE(v.is_constant());
  EXPECT_THROW(v.add_term(-1.0, cube3(0, 0, 0, 1)), std::invalid_argument);
  v.add_term(2.0, cube3(0, 0, 0, 1));
  EXPECT_EQ(v(Point{0.0, 0.0, 0.0}), 2.5);
  EXPECT_EQ(v(Point{3.0, 0.0, 0.0}), 0.5);
  EXPECT_EQ(uniform_potential(3, 0.5)(Point{7.0, 1.0, 2.0}), 4.0);
  EXPECT_EQ(v.distance_to_support(Point{3.0, 0.0, 0.0}), 0.0);
  const auto b = box_potential(cube3(0, 0, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(b.distance_to_support(Point{3.0, 0.0, 0.0}), 2.0);
  const auto moved = b.translated(Point{1.0, 2.0, 3.0});
  EXPECT_EQ(moved(Point{1.5, 2.5, 3.5}), 1.0);
  EXPECT_EQ(moved(Point{0.0, 0.0, 0.0}), 0.0);
}

TEST(Newton, OracleSelfCheck) {
  EXPECT_NEAR(box_newton_oracle(cube3(0, 0, 0, 1.0), Point{0.0, 0.0, 0.0}), kUnitCubeValue,
              1e-12);
  EXPECT_NEAR(kUnitCubeValue, 9.52031, 1e-5);
}

TEST(Newton, MatchesClosedFormBoxPotential) {
  const std::vector<std::pair<Cube, Point>> cases = {
      {cube3(0, 0, 0, 0.5), Point{0.0, 0.0, 0.0}},
      {cube3(0, 0, 0, 0.5), Point{0.3, -0.1, 0.2}},
      {cube3(0, 0, 0, 0.5), Point{0.5, 0.0, 0.0}},
      {cube3(0, 0, 0, 0.5), Point{0.5, 0.5, 0.5}},
      {cube3(0, 0, 0, 0.5), Point{0.51, 0.0, 0.2}},
      {cube3(1, 2, 3, 0.25), Point{1.0, 2.0, 3.2499}},
      {cube3(1, 2, 3, 0.25), Point{-4.0, 7.0, 0.0}},
      {cube3(0, 0, 0, 2.0), Point{1.0, 1.5, -1.9}},
  };
  for (const auto& [c, x] : cases) {
    const double exact = box_newton_oracle(c, x);
    EXPECT_NEAR(newton_integral(c, x), exact, 1e-8 * std::abs(exact))
        << "center " << c.center[0] << " x " << x[0] << "," << x[1] << "," << x[2];
  }
}

TEST(Newton, FarFieldAndMonteCarlo) {
  const Cube c = cube3(0, 0, 0, 0.5);
  const Point x{10.0, 0.0, 0.0};
  const double v = newton_integral(c, x);
  EXPECT_NEAR(v, 0.1, 0.002);
  std::mt19937_64 eng(5);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point y{u(eng), u(eng), u(eng)};
    const double f = 1.0 / distance(x, y);
    s += f;
    s2 += f * f;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(v, mean, 4.0 * se);
}

TEST(Newton, RejectsLowDimensions) {
  EXPECT_THROW(newton_integral(Cube(Point{0.0, 0.0}, 1.0), Point{0.0, 0.0}),
               std::invalid_argument);
  EXPECT_THROW(kato_functional(zero_potential(2), Point{0.0, 0.0}), std::invalid_argument);
}

TEST(Kato, BasicProperties) {
  const Point x{0.2, 0.1, 0.0};
  EXPECT_EQ(kato_functional(zero_potential(3), x), 0.0);
  EXPECT_TRUE(std::isinf(kato_functional(constant_potential(3, 1.0), x)));

  const auto a = box_potential(cube3(0, 0, 0, 0.5), 2.0);
  const auto b = box_potential(cube3(3, 0, 0, 0.25), 5.0);
  EXPECT_NEAR(kato_functional(a + b, x), kato_functional(a, x) + kato_functional(b, x), 1e-12);
  EXPECT_GE(kato_functional(a + b, x), kato_functional(a, x));

  for (double r : {0.125, 0.5, 2.0, 8.0}) {
    const auto v = box_potential(cube3(0, 0, 0, r), 1.0);
    EXPECT_NEAR(kato_functional(v, Point{0.0, 0.0, 0.0}), r * r * kUnitCubeValue,
                1e-9 * r * r);
  }
}

TEST(Kato, ExamplePotentialIsUniformlyBounded) {
  const auto e12 = example_potential(12);
  std::vector<double> at_centers;
  for (int n = 2; n <= 12; ++n) {
    at_centers.push_back(kato_functional(e12.potential, example_center(n, 3)));
  }
  // value at c_n is about k^2 (1/2k)^2 I_unit plus far terms: bounded in n
  for (double v : at_centers) {
    EXPECT_GT(v, 0.5 * kUnitCubeValue / 4.0);
    EXPECT_LT(v, 2.0 * kUnitCubeValue / 4.0 + 1.0);
  }
  const auto r12 = kato_sup_estimate(e12.potential, {}, e12.tail_majorant);
  const auto e14 = example_potential(14);
  const auto r14 = kato_sup_estimate(e14.potential, {}, e14.tail_majorant);
  EXPECT_TRUE(r12.finite);
  EXPECT_NEAR(r14.sup / r12.sup, 1.0, 0.01);
}

TEST(Kato, UniformPotentialGrowsWithBox) {
  double prev = 0.0;
  for (double half : {2.0, 4.0, 8.0}) {
    const auto v = box_potential(cube3(0, 0, 0, half), 1.0);
    const double val = kato_functional(v, Point{0.0, 0.0, 0.0});
    EXPECT_GT(val, 2.0 * prev);
    prev = val;
  }
}

TEST(Kato, SerialAndParallelAgree) {
  const auto e = example_potential(8);
  const auto s = kato_sup_estimate(e.potential, {}, 0.0, Exec::serial);
  const auto p = kato_sup_estimate(e.potential, {}, 0.0, Exec::parallel);
  EXPECT_EQ(s.sup, p.sup);
  EXPECT_EQ(s.argmax, p.argmax);
}
