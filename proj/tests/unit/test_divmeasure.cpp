#include "fixtures.hpp"

#include "pdim/divmeasure.hpp"
#include "pdim/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pdim;
using pdim::testing::universe;

namespace {

Matrix toy_cov(double rho) {
  Matrix c = Matrix::Identity(3, 3);
  c(0, 1) = c(1, 0) = rho;
  return c;
}

// Equal risk contributions: y minimizing y'Cy / 2 - sum(log y) / n, normalized.
Vector numeric_risk_parity(const Matrix& c) {
  const auto n = c.rows();
  Vector y = Vector::Ones(n);
  for (int it = 0; it < 200; ++it) {
    const Vector g = c * y - (1.0 / static_cast<double>(n)) * y.cwiseInverse();
    Matrix h = c;
    h.diagonal() += (1.0 / static_cast<double>(n)) * y.cwiseInverse().cwiseAbs2();
    Vector step = h.ldlt().solve(g);
    double t = 1.0;
    while (((y - t * step).array() <= 0).any()) t *= 0.5;
    y -= t * step;
  }
  return y / y.sum();
}

// Maximizes w'sigma / sqrt(w'Cw) over a fine grid of the 3-simplex.
Vector numeric_max_diversification(const Matrix& c) {
  const Vector sigma = c.diagonal().cwiseSqrt();
  Vector best;
  double best_v = -1;
  const int m = 400;
  for (int i = 0; i <= m; ++i)
    for (int j = 0; i + j <= m; ++j) {
      Vector w(3);
      w << i, j, m - i - j;
      w /= m;
      const double v = w.dot(sigma) / std::sqrt(w.dot(c * w));
      if (v > best_v) best_v = v, best = w;
    }
  return best;
}

}  // namespace

TEST(NuMeasure, ParseAndPrint) {
  EXPECT_EQ(parse_nu_measure("excess_kurtosis"), NuMeasure::excess_kurtosis);
  EXPECT_EQ(parse_nu_measure(to_string(NuMeasure::squared_skewness)), NuMeasure::squared_skewness);
  EXPECT_THROW(parse_nu_measure("kurtosis"), InvalidInput);
}

TEST(Nu, GaussianIsFlaggedAndNigIsNot) {
  MarginTarget g{0, 1, 0, 3.0};
  const auto spec = MetaGaussianSpec::make(std::vector<Margin>(2, Margin::from_target(g)),
                                           homogeneous_correlation(2, 0.0));
  const CoMomentSet gc = build_comoments(sample_meta_gaussian(spec, 1000000, 2));
  const NuValue v = nu(Vector::Constant(2, 0.5), gc, NuMeasure::excess_kurtosis);
  EXPECT_NEAR(v.value, 0.0, 0.03);

  const CoMomentSet& c = universe(2, 0.0, 6.0, 1000000, 5);
  const NuValue e = nu(Vector::Unit(2, 0), c, NuMeasure::excess_kurtosis);
  EXPECT_TRUE(e.positive);
  EXPECT_NEAR(e.value, 3.0, 0.3);
  EXPECT_NEAR(nu(Vector::Unit(2, 0), c, NuMeasure::squared_skewness).value, 0.0, 0.01);
}

TEST(ReferenceCurve, ValuesAndMonotonicity) {
  const ReferenceAsset z(3.0, "z");
  EXPECT_EQ(reference_curve(1, z), 3.0);
  EXPECT_DOUBLE_EQ(reference_curve(3, z), 1.0);
  for (int k = 1; k <= 20; ++k) EXPECT_LT(reference_curve(k + 1, z), reference_curve(k, z));
  EXPECT_THROW(reference_curve(0.5, z), InvalidInput);
  EXPECT_THROW(ReferenceAsset(0.0), InvalidInput);
  EXPECT_THROW(ReferenceAsset(NigParams{1, 0, 1, 0}, NuMeasure::squared_skewness), InvalidInput);
  EXPECT_NEAR(ReferenceAsset(NigParams{1, 0, 1, 0}, NuMeasure::excess_kurtosis).nu_value(), 3.0,
              1e-14);
}

TEST(ReferenceCurve, CumulantAdditivityOracle) {
  // Equal-weight average of 3 iid copies of a kurtosis-6 asset.
  const CoMomentSet& c = universe(3, 0.0, 6.0, 1000000, 5);
  const double measured = nu(Vector::Constant(3, 1.0 / 3), c, NuMeasure::excess_kurtosis).value;
  EXPECT_NEAR(measured, reference_curve(3, ReferenceAsset(3.0)), 0.1);
}

TEST(Diversification, SelfReferenceAndIidCopies) {
  const ReferenceAsset z(NigParams{1, 0, 1, 0}, NuMeasure::excess_kurtosis);
  for (std::size_t k : {2u, 4u, 8u}) {
    const CoMomentSet& c = universe(k, 0.0, 6.0, 1000000, 31);
    const Vector eq = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
    EXPECT_NEAR(diversification(Vector::Unit(static_cast<Eigen::Index>(k), 0), c, z,
                                NuMeasure::excess_kurtosis).value, 1.0, 0.1);
    const auto d = dimensionality(eq, c, z, NuMeasure::excess_kurtosis);
    EXPECT_TRUE(d.defined);
    EXPECT_NEAR(d.value, static_cast<double>(k), 0.15 * static_cast<double>(k) / 2);
  }
}

TEST(Diversification, BelowOneForHeavierTails) {
  const ReferenceAsset z(1.0, "mild");
  const CoMomentSet& c = universe(2, 0.0, 6.0, 1000000, 5);
  EXPECT_LT(diversification(Vector::Unit(2, 0), c, z, NuMeasure::excess_kurtosis).value, 1.0);
}

TEST(Diversification, DimensionalityIsIdentityOfD) {
  const ReferenceAsset z(3.0);
  const CoMomentSet& c = universe(4, 0.1, 6.0, 1000000, 5);
  CounterRng rng(3);
  for (int r = 0; r < 20; ++r) {
    const Vector w = pdim::testing::random_interior(4, rng);
    const auto d = diversification(w, c, z, NuMeasure::excess_kurtosis);
    const auto dim = dimensionality(w, c, z, NuMeasure::excess_kurtosis);
    EXPECT_EQ(d.value, dim.value);
    const double k = std::floor(dim.value);
    EXPECT_LE(reference_curve(k + 1, z), d.portfolio_nu);
    EXPECT_GE(reference_curve(k, z), d.portfolio_nu);
    for (double t : {0.5, 2.0})
      EXPECT_NEAR(diversification(t * w, c, z, NuMeasure::excess_kurtosis).value, d.value, 1e-10);
  }
}

TEST(Diversification, NearGaussianIsUndefinedNotAnError) {
  // Symmetric sample: skewness is exactly zero.
  ReturnSample s;
  s.values.resize(6, 1);
  s.values << 1, -1, 2, -2, 0.5, -0.5;
  s.asset_names = {"x"};
  const CoMomentSet c = build_comoments(s);
  const auto d = diversification(Vector::Ones(1), c, ReferenceAsset(3.0), NuMeasure::squared_skewness);
  EXPECT_FALSE(d.defined);
  EXPECT_TRUE(std::isinf(d.value));
  EXPECT_FALSE(nu(Vector::Ones(1), c, NuMeasure::squared_skewness).positive);
}

TEST(ToyWeights, ClosedFormsMatchNumericPortfolios) {
  for (double rho : {-0.7, -0.3, 0.0, 0.5, 0.9}) {
    EXPECT_NEAR(toy_rp_weight(rho), numeric_risk_parity(toy_cov(rho))[2], 1e-9) << rho;
    EXPECT_NEAR(toy_dr_weight(rho), numeric_max_diversification(toy_cov(rho))[2], 3e-3) << rho;
  }
  EXPECT_NEAR(toy_rp_weight(0.0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(toy_dr_weight(0.0), 1.0 / 3, 1e-15);
  EXPECT_NEAR(toy_dr_weight(0.95), 1.95 / 3.95, 1e-15);
}

TEST(ToyWeights, LimitsContinuityAndMonotonicity) {
  EXPECT_NEAR(toy_rp_weight(1 - 1e-9), std::sqrt(2.0) - 1, 1e-6);
  EXPECT_NEAR(toy_dr_weight(1 - 1e-9), 0.5, 1e-6);
  double prev = -1;
  for (int i = 1; i < 2000; ++i) {
    const double r = -1 + i / 1000.0;
    const double d = toy_dr_weight(r);
    EXPECT_GT(d, prev);
    EXPECT_LT(std::abs(toy_rp_weight(r + 1e-7) - toy_rp_weight(r)), 1e-4);
    prev = d;
  }
  EXPECT_THROW(toy_rp_weight(1.0), InvalidInput);
  EXPECT_THROW(toy_dr_weight(-1.0), InvalidInput);
}
