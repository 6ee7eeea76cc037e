#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "atom_cases.hpp"
#include "hardy/atoms.hpp"

using namespace hardy;
using hardy::cases::random_case;

namespace {

CubeFamily single(const Cube& q) {
  CubeFamily f;
  f.cubes = {q};
  f.bbox = q;
  return f;
}

// Brute-force sup of |f| over arrangement-cell midpoints, built independently
// of IndicatorCombination::sup_norm by sampling a fine uniform grid.
double grid_sup(const IndicatorCombination& f, const Cube& box, int per_axis) {
  double sup = 0.0;
  const int d = box.dim();
  std::vector<int> idx(d, 0);
  while (true) {
    Point p(d);
    for (int i = 0; i < d; ++i) p[i] = box.lo(i) + (idx[i] + 0.5) * box.side() / per_axis;
    sup = std::max(sup, std::abs(f(p)));
    int i = d - 1;
    for (; i >= 0; --i) {
      if (++idx[i] < per_axis) break;
      idx[i] = 0;
    }
    if (i < 0) break;
  }
  return sup;
}

}  // namespace

TEST(IndicatorCombination, MergesAndDropsTerms) {
  const Cube a(Point{0, 0, 0}, 1.0);
  IndicatorCombination f(3);
  f.add(2.0, a).add(-2.0, a);
  EXPECT_TRUE(f.empty());
  f.add(1.5, a).add(0.5, a);
  ASSERT_EQ(f.terms().size(), 1u);
  EXPECT_DOUBLE_EQ(f.terms()[0].coef, 2.0);
  EXPECT_DOUBLE_EQ(f.integral(), 16.0);
}

TEST(IndicatorCombination, SupNormOfOverlaps) {
  const Cube a(Point{0, 0, 0}, 1.0);
  const Cube b(Point{0.5, 0.5, 0}, 1.0);
  const Cube c(Point{0.25, -0.5, 0.25}, 0.5);
  IndicatorCombination f(3);
  f.add(1.0, a).add(2.0, b).add(-4.5, c);
  // c meets a outside b: 1 - 4.5
  EXPECT_DOUBLE_EQ(f.sup_norm(), 3.5);
  EXPECT_NEAR(f.sup_norm(), grid_sup(f, Cube(Point{0.25, 0.25, 0}, 1.25), 40), 1e-12);
  EXPECT_NEAR(f.integral_over(a), 8.0 + 2.0 * 4.5 - 4.5, 1e-12);
}

TEST(Atoms, CubeAverageValidates) {
  const Cube q(Point{2, 0, 0}, 1.0);
  const auto r = validate(cube_average_atom(q), single(q), unit_omega());
  EXPECT_TRUE(r.all_ok());
  EXPECT_DOUBLE_EQ(r.sup_norm, 1.0 / 8.0);
}

TEST(Atoms, HostOutsideFamilyThrows) {
  const Cube q(Point{2, 0, 0}, 1.0);
  auto a = cube_average_atom(q);
  EXPECT_THROW(validate(a, single(Cube(Point{0, 0, 0}, 1.0)), unit_omega()), std::invalid_argument);
  a.kind = AtomKind::omega_atom;
  EXPECT_NO_THROW(validate(a, single(Cube(Point{0, 0, 0}, 1.0)), unit_omega()));
}

TEST(Atoms, ValidateDetectsViolations) {
  const Cube q(Point{0, 0, 0}, 1.0);
  const Cube k(Point{0, 0, 0}, 0.5);
  Atom a;
  a.f = IndicatorCombination(3);
  a.f.add(1.0, Cube(Point{-0.25, 0, 0}, 0.25)).add(-1.0, Cube(Point{0.25, 0, 0}, 0.25));
  a.support = k;
  a.host = q;
  a.kind = AtomKind::q_atom;
  EXPECT_TRUE(validate(a, single(q), unit_omega()).all_ok());

  Atom big = a;
  big.f = a.f.scaled(2.0);
  EXPECT_FALSE(validate(big, single(q), unit_omega()).size_ok);

  Atom lopsided = a;
  lopsided.f.add(0.5, Cube(Point{-0.25, 0, 0}, 0.25));
  EXPECT_FALSE(validate(lopsided, single(q), unit_omega()).cancel_ok);

  Atom far = a;
  far.support = Cube(Point{3, 0, 0}, 0.5);
  far.f = IndicatorCombination(3);
  far.f.add(1.0, Cube(Point{2.75, 0, 0}, 0.25)).add(-1.0, Cube(Point{3.25, 0, 0}, 0.25));
  EXPECT_FALSE(validate(far, single(q), unit_omega()).support_ok);

  Atom weighted = a;
  weighted.kind = AtomKind::omega_q_atom;
  const auto w = holder_stub_omega(Point{-1, 0, 0}, 4.0, 0.5, 2.0);
  EXPECT_FALSE(validate(weighted, single(q), w).cancel_ok);
}

TEST(Split, AverageAtomGivesOneTerm) {
  const Cube q(Point{0, 0, 0}, 1.0);
  Atom a = cube_average_atom(q);
  a.kind = AtomKind::omega_q_atom;
  const auto dec = split_omega_q_atom(a, q);
  ASSERT_EQ(dec.entries.size(), 1u);
  EXPECT_DOUBLE_EQ(dec.entries[0].lambda, 1.0);
  EXPECT_EQ(dec.entries[0].atom.kind, AtomKind::cube_average);
}

TEST(Split, MeanZeroIsUnchanged) {
  const Cube q(Point{0, 0, 0}, 1.0);
  Atom a;
  a.f = IndicatorCombination(3);
  a.f.add(1.0, Cube(Point{-0.25, 0, 0}, 0.25)).add(-1.0, Cube(Point{0.25, 0, 0}, 0.25));
  a.support = Cube(Point{0, 0, 0}, 0.5);
  a.host = q;
  a.kind = AtomKind::omega_q_atom;
  const auto dec = split_omega_q_atom(a, q);
  ASSERT_EQ(dec.entries.size(), 1u);
  EXPECT_EQ(dec.entries[0].lambda, 1.0);
  EXPECT_EQ(dec.entries[0].atom.kind, AtomKind::q_atom);
}

TEST(Split, PiecesAreAtomsAndReconstruct) {
  std::mt19937_64 rng(5);
  for (int j = 1; j <= 6; ++j) {
    const auto rc = random_case(rng, j, 0.3);
    const auto dec = split_omega_q_atom(rc.atom, rc.q);
    IndicatorCombination diff = dec.combined(3);
    diff.add(-1.0, rc.atom.f);
    EXPECT_LE(diff.sup_norm(), 1e-12 * rc.atom.f.sup_norm());
    ASSERT_EQ(dec.entries.size(), 2u);
    EXPECT_TRUE(validate(dec.entries[0].atom, single(rc.q), unit_omega()).all_ok());
    EXPECT_TRUE(validate(dec.entries[1].atom, single(rc.q), unit_omega()).all_ok());
    EXPECT_NEAR(dec.entries[1].lambda, rc.atom.f.integral(), 1e-15);
  }
}

TEST(Split, RejectsNonAtoms) {
  const Cube q(Point{0, 0, 0}, 1.0);
  Atom a = cube_average_atom(q);
  a.f = a.f.scaled(1.5);
  EXPECT_THROW(split_omega_q_atom(a, q), std::invalid_argument);
  Atom far = cube_average_atom(Cube(Point{5, 0, 0}, 0.5));
  EXPECT_THROW(split_omega_q_atom(far, q), std::invalid_argument);
}

TEST(Telescope, HalfDiameterGivesThreePieces) {
  std::mt19937_64 rng(11);
  const auto rc = random_case(rng, 1, 0.3);
  const auto res = telescope(rc.atom, rc.q);
  EXPECT_EQ(res.N, 0);
  EXPECT_EQ(res.pieces.size(), 3u);
  EXPECT_LE(res.decomposition.entries.size(), 3u);
  EXPECT_GE(res.decomposition.entries.size(), 2u);
}

TEST(Telescope, ChainAndPieceInvariants) {
  std::mt19937_64 rng(2024);
  for (int j = 1; j <= 10; ++j) {
    for (int rep = 0; rep < 5; ++rep) {
      const auto rc = random_case(rng, j, 0.3);
      const auto w = holder_stub_omega(rc.atom.support.center, rc.q.diameter(), rc.eps, 2.0);
      ASSERT_TRUE(validate(rc.atom, single(rc.q), w).all_ok());
      const auto res = telescope(rc.atom, rc.q, &w, 2.0);
      const Cube qss = dilate(rc.q, 2, 0.125);

      EXPECT_LE(res.N, j);
      EXPECT_EQ(res.chain.front(), rc.atom.support);
      for (std::size_t n = 1; n < res.chain.size(); ++n) {
        EXPECT_DOUBLE_EQ(res.chain[n].radius, 2.0 * res.chain[n - 1].radius);
        EXPECT_TRUE(encloses(res.chain[n], res.chain[n - 1], 1e-12));
        EXPECT_TRUE(encloses(qss, res.chain[n], 1e-12));
      }
      EXPECT_LE(rc.q.diameter(), 2.0 * res.chain.back().diameter() * (1 + 1e-12));

      for (std::size_t p = 0; p + 1 < res.pieces.size(); ++p) {
        EXPECT_NEAR(res.pieces[p].integral, 0.0, 1e-12) << "piece " << p;
        EXPECT_TRUE(encloses(qss, res.pieces[p].support, 1e-12));
      }
      const auto& top = res.piece_functions.back();
      ASSERT_EQ(top.terms().size(), 1u);
      EXPECT_EQ(top.terms()[0].cube, rc.q);

      IndicatorCombination diff = res.decomposition.combined(3);
      diff.add(-1.0, rc.atom.f);
      EXPECT_LE(diff.sup_norm(), 1e-12 * rc.atom.f.sup_norm());
      for (const auto& e : res.decomposition.entries) {
        EXPECT_TRUE(validate(e.atom, single(rc.q), unit_omega()).all_ok());
      }

      // |t_0| |K| <= eps (d_K / 2 d_Q)^2 for the stub centered at c_K
      ASSERT_TRUE(res.t0_ratio.has_value());
      EXPECT_LE(*res.t0_ratio, 0.25 * rc.eps * (1 + 1e-9));
      EXPECT_NEAR(*res.cancellation, 0.0, 1e-12);
      EXPECT_LE(res.decomposition.total(), 1.0 + 2.0 * (std::pow(2.0, 3) - 1.0) * rc.eps);
    }
  }
}

TEST(Telescope, UnitOmegaCollapses) {
  const Cube q(Point{0, 0, 0}, 1.0);
  Atom a;
  a.f = IndicatorCombination(3);
  a.f.add(8.0, Cube(Point{-0.0625, 0, 0}, 0.0625)).add(-8.0, Cube(Point{0.0625, 0, 0}, 0.0625));
  a.support = Cube(Point{0, 0, 0}, 0.125);
  a.host = q;
  a.kind = AtomKind::omega_q_atom;
  const auto res = telescope(a, q, nullptr);
  EXPECT_TRUE(res.collapsed);
  ASSERT_EQ(res.decomposition.entries.size(), 1u);
  EXPECT_EQ(res.decomposition.entries[0].lambda, 1.0);
  for (double t : res.t) EXPECT_EQ(t, 0.0);
}

TEST(Telescope, RejectsSupportOutsideDoubleDilate) {
  const Cube q(Point{0, 0, 0}, 1.0);
  Atom a = cube_average_atom(Cube(Point{1.2, 0, 0}, 0.25));
  EXPECT_THROW(telescope(a, q), std::invalid_argument);
}

TEST(ExampleAtom, StubOmegaAtom) {
  // depressed at c_n like a potential well, recovering outward
  const Point c4 = example_center(4, 3);
  const ExactOmega w([&](const Point& x) { return 1.0 - 0.2 * std::max(0.0, 1.0 - (x - c4).norm2() / 4.0); });
  const auto ex = build_example_atom(4, 4.0, 0.0, w);
  EXPECT_GT(ex.mu, 1.0);
  EXPECT_GT(ex.kappa, 0.0);
  EXPECT_LE(ex.kappa, 1.0);
  const auto fam = even_unit_family(Cube(ex.atom.host.center, 3.0));
  ASSERT_TRUE(fam.index_of(ex.atom.host).has_value());
  const auto r = validate(ex.atom, fam, w);
  EXPECT_TRUE(r.all_ok());
  EXPECT_NEAR(r.cancellation, 0.0, 1e-15);

  const auto dec = split_omega_q_atom(ex.atom, ex.atom.host);
  IndicatorCombination diff = dec.combined(3);
  diff.add(-1.0, ex.atom.f);
  EXPECT_LE(diff.sup_norm(), 1e-12 * ex.atom.f.sup_norm());
}

TEST(ExampleAtom, WideSeparationLeavesDoubleDilate) {
  const auto w = holder_stub_omega(example_center(5, 3), 2.0, 0.2, 2.0);
  const auto ex = build_example_atom(5, 6.0, 0.0, w);
  const auto fam = even_unit_family(Cube(ex.atom.host.center, 3.0));
  const auto r = validate(ex.atom, fam, w);
  EXPECT_FALSE(r.support_ok);
  EXPECT_TRUE(r.size_ok);
}

TEST(ExampleAtom, UnitOmegaHasUnitRatio) {
  const auto ex = build_example_atom(3, 2.0, 0.0, unit_omega());
  EXPECT_DOUBLE_EQ(ex.mu, 1.0);
  EXPECT_NEAR(ex.kappa, 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(ex.zeta, std::pow(6.0, -3));
}

TEST(ExampleAtom, MonteCarloOmegaCancelsOnSharedSamples) {
  FKConfig cfg;
  cfg.paths = 400;
  cfg.steps = 64;
  cfg.adaptive = true;
  cfg.max_step = 4.0;
  const int n = 3;
  const MemoOmega w(box_potential(example_cube(n, 3), 9.0), 4.0, cfg);
  const auto ex = build_example_atom(n, 4.0, 0.0, w);
  EXPECT_EQ(w.cached(), 54u);
  const auto r = validate(ex.atom, even_unit_family(Cube(ex.atom.host.center, 3.0)), w);
  EXPECT_NEAR(r.cancellation, 0.0, 1e-15);
  EXPECT_TRUE(r.cancel_ok);
  EXPECT_GT(ex.mu, 1.0);
  EXPECT_THROW(build_example_atom(n, 4.0, 0.0, w, 3, 1e-9), std::runtime_error);
}

TEST(EvenUnitFamily, TilesWithEvenCenters) {
  const auto fam = even_unit_family(Cube(Point{16, 0, 0}, 2.5));
  EXPECT_EQ(fam.size(), 27u);
  for (const auto& c : fam.cubes) {
    for (int i = 0; i < 3; ++i) EXPECT_EQ(std::fmod(std::abs(c.center[i]), 2.0), 0.0);
  }
}
