#include "blockpr/analysis.hpp"
#include "blockpr/masks.hpp"

#include <gtest/gtest.h>

#include <numbers>

using namespace blockpr;

TEST(DeterministicMasks, FirstEntry) {
  const auto ens = build_deterministic_masks<double>(8, 2, 4.0);
  const Complex<double> m = ens.support(0, 0);
  EXPECT_NEAR(m.real(), std::exp(-0.25) / std::pow(3.0, 0.25), 1e-15);
  EXPECT_NEAR(m.real(), 0.591761, 1e-6);
  EXPECT_EQ(m.imag(), 0.0);
}

TEST(DeterministicMasks, SupportAndCount) {
  const auto ens = build_deterministic_masks<double>(8, 2);
  EXPECT_EQ(ens.count(), 3);
  EXPECT_DOUBLE_EQ(ens.damping, 4.0);
  for (Index l = 0; l < 3; ++l) {
    const CVector<double> m = ens.mask(l);
    for (Index i = 2; i < 8; ++i) EXPECT_EQ(m(i), Complex<double>(0));
  }
  EXPECT_DOUBLE_EQ(build_deterministic_masks<double>(64, 13).damping, 6.0);
}

TEST(DeterministicMasks, SmallFixtureFormula) {
  // (m_l)_k = e^{-k/a} / 3^{1/4} e^{2 pi i (k-1)(l-1)/3}, k, l 1-based, a = 4.
  const auto ens = build_deterministic_masks<double>(4, 2);
  for (int l = 1; l <= 3; ++l)
    for (int k = 1; k <= 2; ++k) {
      const Complex<double> expected =
          std::exp(-k / 4.0) / std::pow(3.0, 0.25) * std::polar(1.0, 2 * std::numbers::pi * (k - 1) * (l - 1) / 3);
      EXPECT_LT(std::abs(ens.support(l - 1, k - 1) - expected), 1e-15);
    }
}

TEST(DeterministicMasks, EqualNorms) {
  const auto ens = build_deterministic_masks<double>(32, 7);
  const double n0 = ens.support.row(0).norm();
  for (Index l = 1; l < ens.count(); ++l) EXPECT_NEAR(ens.support.row(l).norm(), n0, 1e-14);
}

TEST(DeterministicMasks, RejectsBadDimensions) {
  EXPECT_THROW(build_deterministic_masks<double>(8, 1), DomainError);
  EXPECT_THROW(build_deterministic_masks<double>(8, 5), DomainError);
  EXPECT_THROW(build_deterministic_masks<double>(8, 2, -1.0), DomainError);
}

TEST(RandomMasks, CountsAndSupport) {
  const auto ens = build_random_masks<double>(16, 3, 1.0, 9);
  EXPECT_EQ(ens.count(), 5);
  for (Index l = 0; l < 5; ++l) {
    const CVector<double> m = ens.mask(l);
    Index nonzero = 0;
    for (Index i = 0; i < 16; ++i) nonzero += m(i) != Complex<double>(0);
    EXPECT_EQ(nonzero, 3);
  }
  EXPECT_EQ(build_random_masks<double>(16, 2, 1.5, 1).count(), 5);
  EXPECT_EQ(random_mask_count(2, 2.0), 6);
  EXPECT_THROW(build_random_masks<double>(16, 2, 0.5, 1), DomainError);
}

TEST(RandomMasks, SeedReproducible) {
  const auto a = build_random_masks<double>(16, 4, 1.5, 77);
  const auto b = build_random_masks<double>(16, 4, 1.5, 77);
  const auto c = build_random_masks<double>(16, 4, 1.5, 78);
  EXPECT_TRUE(a.support == b.support);
  EXPECT_FALSE(a.support == c.support);
}

TEST(CorrelationMeasure, SingleSpike) {
  const Index d = 8;
  const auto ens = build_random_masks<double>(d, 3, 1.0, 4);
  const auto b = correlation_measure<double>(CVector<double>::Unit(d, 0), ens);
  for (Index l = 0; l < ens.count(); ++l) {
    const CVector<double> m = ens.mask(l);
    Index nonzero = 0;
    for (Index r = 0; r < d; ++r) {
      EXPECT_NEAR(b(l * d + r), std::norm(m(wrap_index(-r, d))), 1e-15);
      nonzero += b(l * d + r) != 0;
    }
    EXPECT_LE(nonzero, 3);
  }
}

TEST(CorrelationMeasure, SmallFixtureTermwise) {
  // (b_l)_i = | conj(m_l1) x_i + conj(m_l2) x_{i+1} |^2, 1-based and circular.
  const auto ens = build_deterministic_masks<double>(4, 2);
  Signal<double> x(4);
  x << 1.0, Complex<double>(0, 1), -1.0, 2.0;
  const auto b = correlation_measure(x, ens);
  for (Index l = 0; l < 3; ++l)
    for (Index i = 0; i < 4; ++i) {
      const Complex<double> v = std::conj(ens.support(l, 0)) * x(i) + std::conj(ens.support(l, 1)) * x((i + 1) % 4);
      EXPECT_NEAR(b(l * 4 + i), std::norm(v), 1e-15);
    }
}

TEST(CorrelationMeasure, MatchesDenseMatrix) {
  Rng rng(11);
  const Signal<double> x = complex_gaussian_vector<double>(8, rng);
  for (const auto& ens : {build_deterministic_masks<double>(8, 3), build_random_masks<double>(8, 3, 1.5, 2)}) {
    // Row r of M_l is the mask conjugated and circularly shifted by r.
    CMatrix<double> m = CMatrix<double>::Zero(ens.count() * 8, 8);
    for (Index l = 0; l < ens.count(); ++l)
      for (Index r = 0; r < 8; ++r)
        for (Index c = 0; c < 8; ++c) m(l * 8 + r, c) = std::conj(ens.mask(l)(wrap_index(c - r, 8)));
    const RVector<double> dense = (m * x).cwiseAbs2();
    EXPECT_LT((correlation_measure(x, ens) - dense).norm(), 1e-13 * dense.norm());
  }
  EXPECT_THROW(correlation_measure<double>(Signal<double>::Zero(7), build_deterministic_masks<double>(8, 3)),
               DomainError);
}

TEST(CorrelationMeasure, GlobalPhaseAndShiftInvariance) {
  Rng rng(12);
  const Index d = 12;
  const auto ens = build_deterministic_masks<double>(d, 4);
  const Signal<double> x = complex_gaussian_vector<double>(d, rng);
  const auto b = correlation_measure(x, ens);
  EXPECT_LT((correlation_measure<double>(std::polar(1.0, 1.234) * x, ens) - b).norm(), 1e-13 * b.norm());

  const Index s = 5;
  Signal<double> shifted(d);
  for (Index j = 0; j < d; ++j) shifted(j) = x(wrap_index(j + s, d));
  const auto bs = correlation_measure(shifted, ens);
  for (Index l = 0; l < ens.count(); ++l)
    for (Index r = 0; r < d; ++r) EXPECT_NEAR(bs(l * d + r), b(l * d + wrap_index(r + s, d)), 1e-13);
}

TEST(Noise, InfiniteSnrIsIdentity) {
  const RVector<double> b = RVector<double>::LinSpaced(20, 0.1, 2.0);
  const auto n = add_noise<double>(b, std::numeric_limits<double>::infinity(), 3);
  EXPECT_TRUE(n.values == b);
  EXPECT_EQ(n.noise.norm(), 0.0);
}

TEST(Noise, ReproducibleAndCalibrated) {
  Rng rng(1);
  RVector<double> b(10000);
  for (Index i = 0; i < b.size(); ++i) b(i) = std::norm(complex_gaussian<double>(rng));
  const auto a1 = add_noise<double>(b, 25.0, 99);
  const auto a2 = add_noise<double>(b, 25.0, 99);
  EXPECT_TRUE(a1.values == a2.values);
  EXPECT_LT((a1.values - b - a1.noise).norm(), 1e-14 * b.norm());
  const double empirical = 10 * std::log10(b.sum() / a1.noise.squaredNorm());
  EXPECT_NEAR(empirical, 25.0, 0.5);
}

TEST(Flattening, UnitaryAndInvertible) {
  Rng rng(21);
  const auto w = FlatteningOperator<double>::random(64, 5);
  for (int t = 0; t < 100; ++t) {
    const Signal<double> x = complex_gaussian_vector<double>(64, rng);
    const Signal<double> wx = w.apply(x);
    EXPECT_NEAR(wx.norm(), x.norm(), 1e-12 * x.norm());
    EXPECT_LT((w.apply_inverse(wx) - x).norm(), 1e-12 * x.norm());
  }
}

TEST(Flattening, MatchesDenseComposition) {
  const Index d = 8;
  const auto w = FlatteningOperator<double>::random(d, 17);
  CMatrix<double> p = CMatrix<double>::Zero(d, d);
  for (Index i = 0; i < d; ++i) p(i, w.permutation()[static_cast<std::size_t>(i)]) = 1;
  const CMatrix<double> b = w.signs().cast<Complex<double>>().asDiagonal();
  const CMatrix<double> expected = p * dft_matrix<double>(d) * b;
  EXPECT_LT((w.dense() - expected).norm(), 1e-13);
  for (Index i = 0; i < d; ++i) EXPECT_EQ(std::abs(w.signs()(i)), 1.0);
}

TEST(Flattening, IdentitySentinelAndValidation) {
  const auto id = FlatteningOperator<double>::identity(5);
  const Signal<double> x = Signal<double>::LinSpaced(5, 1, 5);
  EXPECT_TRUE(id.apply(x) == x);
  EXPECT_TRUE(id.is_identity());
  EXPECT_THROW(id.apply(Signal<double>::Zero(4)), DomainError);
  EXPECT_THROW(FlatteningOperator<double>::random(1, 0), DomainError);
}

TEST(Flattening, GaussianSignalsBecomeFlat) {
  const Index d = 1024, m = 64;
  int flat = 0;
  for (std::uint64_t t = 0; t < 500; ++t) {
    Rng rng(split_seed(100, t));
    const Signal<double> x = complex_gaussian_vector<double>(d, rng);
    flat += is_m_flat<double>(FlatteningOperator<double>::random(d, split_seed(200, t)).apply(x), m).is_flat;
  }
  EXPECT_GE(flat, 450);
}
