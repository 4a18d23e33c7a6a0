#include "blockpr/analysis.hpp"
#include "blockpr/lifted_solver.hpp"

#include <gtest/gtest.h>

#include <array>

using namespace blockpr;

namespace {

std::vector<MaskEnsemble<double>> ensembles(Index d, Index delta, std::uint64_t seed) {
  return {build_deterministic_masks<double>(d, delta), build_random_masks<double>(d, delta, 1.0, seed),
          build_random_masks<double>(d, delta, 2.0, seed + 1)};
}

}  // namespace

TEST(AssembleBlocks, SmallFixtureMatrix) {
  // Block row r: m_(1,1), m_(1,2), m_(2,1), m_(2,2) at columns 3r + 0..3 (mod 12),
  // where m_(j,k) = m_j conj(m_k).
  const auto ens = build_deterministic_masks<double>(4, 2);
  const auto o = dense_oracle(ens);
  const std::array<std::array<int, 4>, 4> columns{{{0, 1, 2, 3}, {3, 4, 5, 6}, {6, 7, 8, 9}, {9, 10, 11, 0}}};
  const std::array<std::pair<int, int>, 4> products{{{0, 0}, {0, 1}, {1, 0}, {1, 1}}};
  CMatrix<double> printed = CMatrix<double>::Zero(12, 12);
  for (int r = 0; r < 4; ++r)
    for (int l = 0; l < 3; ++l)
      for (int c = 0; c < 4; ++c) {
        const auto [j, k] = products[static_cast<std::size_t>(c)];
        printed(3 * r + l, columns[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]) =
            ens.support(l, j) * std::conj(ens.support(l, k));
      }
  EXPECT_LT((o.lifted - printed).norm(), 1e-15);
}

TEST(AssembleBlocks, ShiftBlocksMatchEntrywiseDefinition) {
  for (Index delta : {2, 3, 5}) {
    for (const auto& ens : ensembles(16, delta, 3)) {
      const auto fast = shift_blocks_from_masks(ens);
      const auto entrywise = lifted_blocks_entrywise(ens);
      for (Index s = 0; s < delta; ++s)
        EXPECT_LT((fast[static_cast<std::size_t>(s)] - entrywise[static_cast<std::size_t>(s)]).norm(), 1e-15);
    }
  }
}

TEST(AssembleBlocks, ClosedFormMatchesSummation) {
  const auto ens = build_deterministic_masks<double>(16, 3);
  const auto sys = assemble_blocks(ens);
  ASSERT_EQ(sys.factorization(), Factorization::closed_form);
  const CMatrix<double> f = dft_matrix<double>(5);
  for (Index k = 0; k < 16; ++k)
    EXPECT_LT((sys.block(k) - f * sys.spectrum().row(k).transpose().asDiagonal()).norm(), 1e-12);
}

TEST(AssembleBlocks, BlockDiagonalizes) {
  for (const auto& ens : ensembles(8, 2, 5)) {
    const auto o = dense_oracle(ens);
    EXPECT_LT(off_block_diagonal_norm<double>(o.diagonalized, ens.count(), 3), 1e-12);
    const auto sys = assemble_blocks(ens);
    for (Index k = 0; k < 8; ++k)
      EXPECT_LT((o.diagonalized.block(k * ens.count(), k * 3, ens.count(), 3) - sys.block(k)).norm(), 1e-12);
  }
}

TEST(AssembleBlocks, LiftedIdentity) {
  Rng rng(8);
  for (Index d : {8, 12, 16})
    for (Index delta : {2, 3, 4})
      for (const auto& ens : ensembles(d, delta, 40 + d)) {
        const auto o = dense_oracle(ens);
        const Signal<double> x = complex_gaussian_vector<double>(d, rng);
        const CVector<double> pb = o.permutation * correlation_measure(x, ens).cast<Complex<double>>();
        EXPECT_LT((o.lifted * lift(x, delta).entries - pb).norm(), 1e-12 * pb.norm());
      }
}

TEST(AssembleBlocks, FactorizationTag) {
  EXPECT_EQ(assemble_blocks(build_deterministic_masks<double>(16, 3)).factorization(), Factorization::closed_form);
  EXPECT_EQ(assemble_blocks(build_random_masks<double>(16, 3, 1.0, 1)).factorization(), Factorization::generic);
  const auto det = build_deterministic_masks<double>(16, 3);
  EXPECT_EQ(assemble_blocks(make_custom_masks<double>(16, det.support)).factorization(), Factorization::generic);
}

TEST(AssembleBlocks, SingularBlockReported) {
  CMatrix<double> support(3, 2);
  support << 1.0, 0.5, 1.0, 0.5, 1.0, 0.5;
  const auto sys = assemble_blocks(make_custom_masks<double>(8, support));
  ASSERT_TRUE(sys.singular_block().has_value());
  try {
    solve_lifted(sys, RVector<double>(RVector<double>::Ones(24)));
    FAIL() << "expected ConditioningError";
  } catch (const ConditioningError& e) {
    EXPECT_EQ(e.block(), *sys.singular_block());
    EXPECT_LT(e.sigma_min(), 1e-10);
  }
}

TEST(Interleave, SmallFixtureOrder) {
  // b = ((b1)_1..(b1)_4, (b2)_1.., (b3)_1..) encoded as 10 l + i.
  RVector<double> b(12);
  for (int l = 1; l <= 3; ++l)
    for (int i = 1; i <= 4; ++i) b((l - 1) * 4 + i - 1) = 10 * l + i;
  const RVector<double> pb = interleave<double>(b, 3);
  const std::array<double, 12> expected{11, 21, 31, 12, 22, 32, 13, 23, 33, 14, 24, 34};
  for (Index k = 0; k < 12; ++k) EXPECT_EQ(pb(k), expected[static_cast<std::size_t>(k)]);
  EXPECT_TRUE(deinterleave<double>(pb, 3) == b);
}

TEST(Interleave, ExhaustiveTwoByTwo) {
  CMatrix<double> p(4, 4);
  p << 1, 0, 0, 0,
       0, 0, 1, 0,
       0, 1, 0, 0,
       0, 0, 0, 1;
  for (Index k = 0; k < 4; ++k) {
    const RVector<double> e = RVector<double>::Unit(4, k);
    EXPECT_TRUE(interleave<double>(e, 2).cast<Complex<double>>() == p * e.cast<Complex<double>>());
  }
  EXPECT_THROW(interleave<double>(RVector<double>(RVector<double>::Zero(7)), 2), DomainError);
  EXPECT_THROW(deinterleave<double>(RVector<double>(RVector<double>::Zero(7)), 3), DomainError);
}

TEST(SolveLifted, NoiselessRecoversProducts) {
  Rng rng(30);
  const Signal<double> x = complex_gaussian_vector<double>(8, rng);
  const auto ens = build_deterministic_masks<double>(8, 3);
  const auto y = solve_lifted(assemble_blocks(ens), correlation_measure(x, ens));
  const auto truth = lift(x, 3);
  const double scale = truth.entries.cwiseAbs().maxCoeff();
  for (Index i = 0; i < 8; ++i)
    for (Index off = -2; off <= 2; ++off) {
      const Index j = wrap_index(i + off, 8);
      EXPECT_LT(std::abs(y(i, j) - std::conj(x(i)) * x(j)), 1e-10 * scale);
    }
}

TEST(SolveLifted, GenericAndOversampled) {
  Rng rng(31);
  for (const auto& ens : ensembles(16, 4, 12)) {
    const Signal<double> x = complex_gaussian_vector<double>(16, rng);
    const auto y = solve_lifted(assemble_blocks(ens), correlation_measure(x, ens));
    const auto truth = lift(x, 4);
    EXPECT_LT((y.entries - truth.entries).norm(), 1e-10 * truth.entries.norm());
  }
  // The closed form and the generic factorization agree on the same masks.
  const auto det = build_deterministic_masks<double>(16, 4);
  const Signal<double> x = complex_gaussian_vector<double>(16, rng);
  const auto b = correlation_measure(x, det);
  const auto y1 = solve_lifted(assemble_blocks(det), b);
  const auto y2 = solve_lifted(assemble_blocks(make_custom_masks<double>(16, det.support)), b);
  EXPECT_LT((y1.entries - y2.entries).norm(), 1e-11 * y1.entries.norm());
}

TEST(SolveLifted, ZeroInZeroOut) {
  const auto ens = build_deterministic_masks<double>(8, 3);
  const auto y = solve_lifted(assemble_blocks(ens), RVector<double>(RVector<double>::Zero(40)));
  EXPECT_EQ(y.entries.norm(), 0.0);
  EXPECT_THROW(solve_lifted(assemble_blocks(ens), RVector<double>(RVector<double>::Zero(39))), DomainError);
}

TEST(SolveLifted, SmallFixture) {
  const auto ens = build_deterministic_masks<double>(4, 2);
  Signal<double> x(4);
  x << 1.0, Complex<double>(0, 1), -1.0, 2.0;
  const auto y = solve_lifted(assemble_blocks(ens), correlation_measure(x, ens));
  // y = (|x1|^2, conj(x1)x2, conj(x2)x1, |x2|^2, ..., conj(x4)x1, conj(x1)x4)
  const std::array<Complex<double>, 12> expected{
      {1.0, {0, 1}, {0, -1}, 1.0, {0, 1}, {0, -1}, 1.0, -2.0, -2.0, 4.0, 2.0, 2.0}};
  for (Index k = 0; k < 12; ++k) EXPECT_LT(std::abs(y.entries(k) - expected[static_cast<std::size_t>(k)]), 1e-12);
}

TEST(ResidualNoise, ZeroNoise) {
  const auto sys = assemble_blocks(build_deterministic_masks<double>(8, 2));
  const auto r = residual_noise(sys, RVector<double>(RVector<double>::Zero(24)));
  EXPECT_EQ(r.inf_norm, 0.0);
}

TEST(ResidualNoise, BoundedBySmallestSingularValue) {
  const auto ens = build_deterministic_masks<double>(16, 3);
  const auto sys = assemble_blocks(ens);
  const auto o = dense_oracle(ens);
  const double sigma_min = Eigen::JacobiSVD<CMatrix<double>>(o.lifted).singularValues().minCoeff();
  Rng rng(41);
  std::normal_distribution<double> g(0, 1);
  for (int t = 0; t < 100; ++t) {
    RVector<double> n(80);
    for (Index i = 0; i < 80; ++i) n(i) = g(rng);
    EXPECT_LE(residual_noise(sys, n).values.norm(), n.norm() / sigma_min * (1 + 1e-12));
  }
}

TEST(ResidualNoise, MatchesDenseInverse) {
  Rng rng(42);
  std::normal_distribution<double> g(0, 1);
  for (const auto& ens : ensembles(8, 2, 7)) {
    if (ens.count() != 3) continue;  // square systems only
    const auto o = dense_oracle(ens);
    RVector<double> n(24);
    for (Index i = 0; i < 24; ++i) n(i) = g(rng);
    const CVector<double> dense = o.lifted.partialPivLu().solve(o.permutation * n.cast<Complex<double>>());
    const auto r = residual_noise(assemble_blocks(ens), n);
    EXPECT_LT((r.values - dense).norm(), 1e-10 * dense.norm());
    EXPECT_DOUBLE_EQ(r.inf_norm, r.values.cwiseAbs().maxCoeff());
  }
}

TEST(Conditioning, BlockSingularValuesWithinBounds) {
  for (Index delta = 2; delta <= 12; ++delta) {
    const auto ens = build_deterministic_masks<double>(32, delta);
    const auto sys = assemble_blocks(ens);
    const double lo = block_sigma_lower_bound<double>(delta, ens.damping);
    const double hi = block_sigma_upper_bound<double>(ens.damping);
    for (Index k = 0; k < 32; ++k) {
      const RVector<double> sv = Eigen::JacobiSVD<CMatrix<double>>(sys.block(k)).singularValues();
      EXPECT_GE(sv.minCoeff(), lo) << "delta=" << delta << " k=" << k;
      EXPECT_LE(sv.maxCoeff(), hi) << "delta=" << delta << " k=" << k;
      EXPECT_NEAR(sv.maxCoeff(), sys.block_sigma_max()(k), 1e-12 * sv.maxCoeff());
      EXPECT_NEAR(sv.minCoeff(), sys.block_sigma_min()(k), 1e-12 * sv.maxCoeff());
    }
  }
}

TEST(Conditioning, KappaBelowTheoremBound) {
  for (Index delta = 2; delta <= 24; ++delta)
    EXPECT_LT(assemble_blocks(build_deterministic_masks<double>(128, delta)).condition().kappa(),
              kappa_upper_bound<double>(delta));
}
