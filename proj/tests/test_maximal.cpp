#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "hardy/maximal.hpp"
#include "hardy/semigroup.hpp"

using namespace hardy;

namespace {

IndicatorCombination unit_indicator(const Cube& q) {
  IndicatorCombination f(q.dim());
  f.add(1.0, q);
  return f;
}

}  // namespace

TEST(TimeGrid, LogSpacedAndNested) {
  const auto g = TimeGrid::log_spaced(1e-6, 1.0, 64);
  ASSERT_EQ(g.size(), 64u);
  EXPECT_DOUBLE_EQ(g.times.front(), 1e-6);
  EXPECT_EQ(g.times.back(), 1.0);
  const auto f = g.refined();
  ASSERT_EQ(f.size(), 127u);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_EQ(f.times[2 * k], g.times[k]);
  for (std::size_t k = 1; k < f.size(); ++k) EXPECT_GT(f.times[k], f.times[k - 1]);
  EXPECT_THROW(TimeGrid::log_spaced(1e-6, 1.0, 8), std::invalid_argument);
  EXPECT_THROW(TimeGrid::log_spaced(1.0, 1e-6, 32), std::invalid_argument);
}

TEST(MaximalFree, IndicatorInteriorIsOneAndBounded) {
  const Cube q(Point{0, 0, 0}, 0.5);
  MaximalOptions opt;
  opt.t_min = 1e-6;
  const auto res = maximal_free(unit_indicator(q), 1.0, Cube(Point{0, 0, 0}, 1.0), 16, opt);
  const auto& g = res.values;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    EXPECT_LE(g.values[i], 1.0);
    if (q.contains(g.grid.cell_center(i))) EXPECT_GE(g.values[i], 1.0 - 1e-12);
  }
}

TEST(MaximalFree, DominatesEveryGridTime) {
  IndicatorCombination f(3);
  f.add(2.0, Cube(Point{0, 0, 0}, 0.25)).add(-1.0, Cube(Point{0.6, 0, 0}, 0.25));
  MaximalOptions opt;
  opt.max_refinements = 1;
  const auto res = maximal_free(f, 1.0, Cube(Point{0.3, 0, 0}, 1.0), 8, opt);
  for (std::size_t i = 0; i < res.values.values.size(); i += 7) {
    const Point x = res.values.grid.cell_center(i);
    for (double t : res.times.times) {
      double direct = 2.0 * free_on_cube(t, x, Cube(Point{0, 0, 0}, 0.25)) -
                      free_on_cube(t, x, Cube(Point{0.6, 0, 0}, 0.25));
      EXPECT_GE(res.values.values[i], std::abs(direct));
    }
    EXPECT_LE(res.values.values[i], 2.0);
  }
}

TEST(MaximalFree, RefinementNeverDecreases) {
  IndicatorCombination f(3);
  f.add(1.0, Cube(Point{0, 0, 0}, 0.1)).add(-0.5, Cube(Point{0.4, 0.1, 0}, 0.2));
  MaximalOptions coarse;
  coarse.max_refinements = 0;
  coarse.time_points = 16;
  MaximalOptions fine = coarse;
  fine.max_refinements = 1;
  fine.refine_tolerance = 0.0;
  const Cube box(Point{0, 0, 0}, 1.0);
  const auto a = maximal_free(f, 1.0, box, 6, coarse);
  const auto b = maximal_free(f, 1.0, box, 6, fine);
  ASSERT_EQ(b.times.size(), 31u);
  for (std::size_t i = 0; i < a.values.values.size(); ++i) EXPECT_GE(b.values.values[i], a.values.values[i]);
}

TEST(MaximalFree, SerialAndParallelAgree) {
  IndicatorCombination f(3);
  f.add(1.0, Cube(Point{0, 0, 0}, 0.3));
  MaximalOptions par;
  MaximalOptions ser;
  ser.exec = Exec::serial;
  const Cube box(Point{0, 0, 0}, 1.0);
  EXPECT_EQ(maximal_free(f, 1.0, box, 6, par).values.values, maximal_free(f, 1.0, box, 6, ser).values.values);
}

TEST(MaximalFree, PointMassOptimum) {
  // sup_t |Q| P_t(rho) is attained at t = rho^2 / (2d) with value |Q| (2 pi rho^2 / d)^{-d/2} e^{-d/2}
  const int d = 3;
  const Cube q(Point{0, 0, 0}, 1e-3);
  const auto grid = TimeGrid::log_spaced(1e-5, 1.0, 64).refined();
  for (double rho : {0.2, 0.5, 0.9}) {
    const Point x{rho / std::sqrt(2.0), 0.0, rho / std::sqrt(2.0)};
    const double oracle = q.volume() * std::pow(2.0 * std::numbers::pi * rho * rho / d, -0.5 * d) * std::exp(-0.5 * d);
    const double got = free_maximal_at(unit_indicator(q), grid, x);
    EXPECT_LE(got, oracle * (1 + 1e-6));
    EXPECT_NEAR(got, oracle, 5e-3 * oracle) << rho;
  }
}

TEST(MaximalFree, CenteredCubeDecaysLikeMinusD) {
  const int n = 32;
  const auto f = unit_indicator(Cube(Point{0, 0, 0}, 1.0 / n));
  const auto grid = TimeGrid::log_spaced(1e-6, 1.0, 64).refined();
  const double r1 = 0.3;
  const double r2 = 0.9;
  const double v1 = free_maximal_at(f, grid, Point{-r1, 0, 0});
  const double v2 = free_maximal_at(f, grid, Point{-r2, 0, 0});
  EXPECT_NEAR(std::log(v2 / v1) / std::log(r2 / r1), -3.0, 0.03);
}

TEST(Region, UnitCubeMass) {
  const Cube q(Point{0, 0, 0}, 1.0);
  const auto r = l1_on_region([](const Point&) { return 1.0; }, q, cube_region(q), 64);
  EXPECT_NEAR(r.value, 8.0, 0.08);
  EXPECT_EQ(r.cells, 128u * 128u * 128u);
  EXPECT_LT(r.refinement_delta, 1e-12);
}

TEST(Region, HalfShellVolume) {
  for (int n : {4, 8}) {
    const double exact = 2.0 * std::numbers::pi / 3.0 * (1.0 - std::pow(std::sqrt(3.0) / n, 3));
    const auto r = l1_on_region([](const Point&) { return 1.0; }, Cube(Point{0, 0, 0}, 1.0),
                                example_shell(n), 48);
    EXPECT_NEAR(r.value, exact, 0.02 * exact) << n;
  }
}

TEST(Region, RadialLogIntegral) {
  const int n = 8;
  const double exact = 2.0 * std::numbers::pi * std::log(n / std::sqrt(3.0));
  const auto r = l1_on_region([](const Point& x) { return std::pow(x.norm(), -3); },
                              Cube(Point{0, 0, 0}, 1.0), example_shell(n), 64);
  EXPECT_NEAR(r.value, exact, 0.05 * exact);
}

TEST(Region, DifferenceAndEmpty) {
  const Region ring = difference_region(cube_region(Cube(Point{0, 0}, 1.0)), cube_region(Cube(Point{0, 0}, 0.5)));
  EXPECT_TRUE(ring.contains(Point{0.75, 0}));
  EXPECT_FALSE(ring.contains(Point{0.25, 0}));
  GridFunction g(CellGrid::uniform(Point{0, 0}, Point{1, 1}, 4), 1.0);
  EXPECT_THROW(l1_on_region(g, cube_region(Cube(Point{5, 5}, 0.1))), std::invalid_argument);
}

TEST(ShellRule, ExactMoments) {
  const auto rule = half_shell_rule(0.1, 1.0, 3, 8, 8, 16);
  double vol = 0.0, inv = 0.0, x1sq = 0.0, x1 = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const auto& p = rule.nodes[i];
    EXPECT_LT(p[0], 0.0);
    vol += rule.weights[i];
    inv += rule.weights[i] * std::pow(p.norm(), -3);
    x1sq += rule.weights[i] * p[0] * p[0];
    x1 += rule.weights[i] * p[0];
  }
  const double pi = std::numbers::pi;
  EXPECT_NEAR(vol, 2 * pi / 3 * (1 - 1e-3), 1e-9);
  EXPECT_NEAR(inv, 2 * pi * std::log(10.0), 1e-12);
  EXPECT_NEAR(x1sq, (1 - 1e-5) / 5 * 2 * pi / 3, 1e-9);
  EXPECT_NEAR(x1, -(1 - 1e-4) / 4 * pi, 1e-9);
}

TEST(LogFit, ExactLineAndInterval) {
  const std::vector<int> n{4, 8, 16, 32, 64};
  std::vector<double> L;
  for (int k : n) L.push_back(2.0 * std::log(k) + 1.0);
  const auto fit = fit_log_growth(n, L);
  EXPECT_NEAR(fit.alpha, 2.0, 1e-12);
  EXPECT_NEAR(fit.beta, 1.0, 1e-12);
  EXPECT_NEAR(fit.alpha_std_error, 0.0, 1e-12);

  // three points, one degree of freedom: t_{0.975, 1} = 12.7062
  const std::vector<int> m{1, 2, 4};
  const double l2 = std::log(2.0);
  const auto f3 = fit_log_growth(m, {0.0, l2 + 0.1, 2 * l2});
  EXPECT_NEAR(f3.alpha, 1.0, 1e-12);
  EXPECT_EQ(f3.dof, 1);
  // residuals (-1, 2, -1) / 30 and sxx = 2 ln^2 2
  const double resid = 0.1 * 0.1 * (1.0 / 9 + 4.0 / 9 + 1.0 / 9);
  const double se = std::sqrt(resid / (2 * l2 * l2));
  EXPECT_NEAR(f3.alpha_std_error, se, 1e-12);
  EXPECT_NEAR(f3.ci_high - f3.alpha, 12.7062 * se, 1e-4 * se);
  EXPECT_THROW(fit_log_growth({4, 8}, {1.0, 2.0}), std::invalid_argument);
}

TEST(Growth, IncreasingAndSignEven) {
  GrowthOptions opt;
  opt.spatial_check = false;
  opt.polar_nodes = 8;
  opt.azimuth_nodes = 16;
  const auto stub = [](int) { return MuValue{1.1, 0.0}; };
  const auto a = growth_experiment({4, 8, 16}, stub, opt);
  EXPECT_TRUE(a.increasing);
  EXPECT_GT(a.fit.alpha, 0.0);
  for (const auto& r : a.rows) {
    EXPECT_LT(r.time_delta, 0.005);
    EXPECT_FALSE(r.mu_uncertain);
  }
  opt.negate = true;
  const auto b = growth_experiment({4, 8, 16}, stub, opt);
  for (std::size_t i = 0; i < a.rows.size(); ++i) EXPECT_EQ(a.rows[i].L, b.rows[i].L);
}

TEST(Growth, ShellRuleMatchesCartesianGrid) {
  const int n = 8;
  const double mu = 1.1;
  GrowthOptions opt;
  const auto res = growth_experiment({n}, [&](int) { return MuValue{mu, 0.0}; }, opt);
  ASSERT_EQ(res.rows.size(), 1u);
  EXPECT_LT(res.rows[0].space_delta, 1e-3);

  const auto f = example_atom_local(n, opt.tau, res.rows[0].zeta, mu);
  auto grid = TimeGrid::log_spaced(opt.t_min, 1.0, opt.time_points).refined();
  const auto cart = l1_on_region([&](const Point& x) { return free_maximal_at(f, grid, x); },
                                 Cube(Point{0, 0, 0}, 1.0), example_shell(n), 24);
  EXPECT_NEAR(res.rows[0].L, cart.value, 0.03 * cart.value);
}

TEST(Growth, UncertainMuIsFlagged) {
  GrowthOptions opt;
  opt.spatial_check = false;
  opt.polar_nodes = 4;
  opt.azimuth_nodes = 8;
  const auto res = growth_experiment({4}, [](int) { return MuValue{1.05, 0.02}; }, opt);
  EXPECT_TRUE(res.rows[0].mu_uncertain);
}

TEST(Reflection, DipoleIsNonnegativeOnShell) {
  for (int n : {4, 16, 64}) {
    const auto rep = reflection_check(n, 4.0, 2000, 17 + n);
    EXPECT_EQ(rep.samples, 2000u);
    EXPECT_EQ(rep.violations, 0u);
    EXPECT_GE(rep.min_value, 0.0);
  }
}
