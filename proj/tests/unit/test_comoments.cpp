#include "fixtures.hpp"

#include "pdim/comoments.hpp"
#include "pdim/error.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pdim;
using pdim::testing::random_interior;
using pdim::testing::random_sample;

namespace {

Matrix centered(const ReturnSample& s) {
  return s.values.rowwise() - s.values.colwise().mean();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(UniqueCounts, MatchesCountingTable) {
  const std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> table{
      {2, 4, 5},       {3, 10, 15},     {4, 20, 35},
      {10, 220, 715},  {50, 22100, 292825}, {100, 171700, 4421275}};
  for (const auto& [n, c3, c4] : table) {
    const auto u = unique_element_counts(n);
    EXPECT_EQ(u.third, c3) << n;
    EXPECT_EQ(u.fourth, c4) << n;
  }
}

TEST(UniqueCounts, IndexIsABijectionOntoSortedTuples) {
  const std::size_t n = 5;
  std::vector<int> seen3(unique_element_counts(n).third, 0);
  std::vector<int> seen4(unique_element_counts(n).fourth, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        ++seen3.at(unique_index3(k, i, j));
        for (std::size_t l = k; l < n; ++l) ++seen4.at(unique_index4(l, j, k, i));
      }
  for (int s : seen3) EXPECT_EQ(s, 1);
  for (int s : seen4) EXPECT_EQ(s, 1);
}

TEST(BuildComoments, SymmetricFourPointSample) {
  ReturnSample s;
  s.values.resize(4, 2);
  s.values << 1, 0, -1, 0, 0, 1, 0, -1;
  s.asset_names = {"x", "y"};
  const CoMomentSet c = build_comoments(s);
  EXPECT_NEAR(c.m2()(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(c.m2()(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(c.m2()(0, 1), 0.0, 1e-15);
  for (double v : c.m3_unique()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(c.m3_unique().size(), 4u);
}

TEST(BuildComoments, GaussianFourthMoment) {
  CounterRng rng(11);
  ReturnSample s;
  s.values.resize(1000000, 1);
  for (Eigen::Index i = 0; i < s.values.rows(); ++i) s.values(i, 0) = rng.normal();
  s.asset_names = {"z"};
  const CoMomentSet c = build_comoments(s);
  const double v = c.m2()(0, 0);
  EXPECT_LT(std::abs(c.k(0, 0, 0, 0) / (3.0 * v * v) - 1.0), 0.02);
}

TEST(BuildComoments, ThreeAssetStorageBudget) {
  const CoMomentSet c = build_comoments(random_sample(50, 3, 1));
  EXPECT_EQ(c.m3_unique().size(), 10u);
  EXPECT_EQ(c.m4_unique().size(), 15u);
}

TEST(BuildComoments, UniqueStorageEqualsNaiveDense) {
  for (std::size_t n = 1; n <= 4; ++n) {
    for (std::size_t t : {5u, 100u, 1000u}) {
      const ReturnSample s = random_sample(t, n, 100 + n + t);
      const CoMomentSet c = build_comoments(s);
      const Matrix x = centered(s);
      const auto N = static_cast<Eigen::Index>(n);
      const double T = static_cast<double>(t);
      const Matrix m2 = x.transpose() * x / T;
      EXPECT_LT((c.m2() - m2).cwiseAbs().maxCoeff(), 1e-12);
      for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
          for (Eigen::Index k = 0; k < N; ++k) {
            const double m3 = (x.col(i).array() * x.col(j).array() * x.col(k).array()).sum() / T;
            EXPECT_LT(rel_err(c.m3()(i, j * N + k), m3), 1e-12);
            for (Eigen::Index l = 0; l < N; ++l) {
              const double m4 = (x.col(i).array() * x.col(j).array() * x.col(k).array() *
                                 x.col(l).array()).sum() / T;
              EXPECT_LT(rel_err(c.m4()(i, j * N * N + k * N + l), m4), 1e-12);
            }
          }
    }
  }
}

TEST(BuildComoments, ResultIndependentOfThreadCount) {
  const ReturnSample s = random_sample(20000, 4, 9);
  BuildOptions one, many;
  many.threads = 4;
  const CoMomentSet a = build_comoments(s, one);
  const CoMomentSet b = build_comoments(s, many);
  EXPECT_EQ(a.m4_unique(), b.m4_unique());
  EXPECT_EQ(a.m3_unique(), b.m3_unique());
  EXPECT_TRUE(a.m2() == b.m2());
}

TEST(BuildComoments, RejectsDegenerateInput) {
  ReturnSample s = random_sample(100, 2, 3);
  s.values.col(1) = s.values.col(0);
  EXPECT_THROW(build_comoments(s), NumericalFailure);
  s = random_sample(100, 2, 3);
  s.values(5, 1) = std::nan("");
  EXPECT_THROW(build_comoments(s), InvalidInput);
}

TEST(PortfolioMoments, UnitVectorExtractsOwnMoments) {
  const ReturnSample s = random_sample(500, 3, 4);
  const CoMomentSet c = build_comoments(s);
  const Matrix x = centered(s);
  const auto m = portfolio_moments(Vector::Unit(3, 1), c);
  EXPECT_NEAR(m.variance, x.col(1).squaredNorm() / 500.0, 1e-12);
  EXPECT_NEAR(m.mu3, x.col(1).array().cube().sum() / 500.0, 1e-11);
  EXPECT_NEAR(m.mu4, x.col(1).array().pow(4).sum() / 500.0, 1e-10);
}

TEST(PortfolioMoments, TwoIidAssetsHalveExcessKurtosis) {
  const CoMomentSet& c = pdim::testing::universe(2, 0.0, 6.0, 1000000, 5);
  EXPECT_NEAR(portfolio_kurtosis(Vector::Constant(2, 0.5), c), 4.5, 0.1);
  EXPECT_NEAR(portfolio_kurtosis(Vector::Unit(2, 0), c), 6.0, 0.3);
}

TEST(PortfolioMoments, JensenAndLeverageInvariance) {
  const CoMomentSet c = build_comoments(random_sample(2000, 4, 6));
  CounterRng rng(1);
  for (int r = 0; r < 200; ++r) {
    const Vector w = random_interior(4, rng);
    const auto m = portfolio_moments(w, c);
    EXPECT_GE(m.mu4 - m.variance * m.variance, 0.0);
    const double k = portfolio_kurtosis(w, c);
    for (double t : {0.5, 2.0, 10.0}) EXPECT_NEAR(portfolio_kurtosis(t * w, c), k, 1e-12 * k);
  }
}

TEST(PortfolioMoments, GaussianKurtosisNearThree) {
  MarginTarget g{0.0, 1.0, 0.0, 3.0};
  std::vector<Margin> margins(3, Margin::from_target(g));
  const auto spec = MetaGaussianSpec::make(margins, homogeneous_correlation(3, 0.3));
  const CoMomentSet c = build_comoments(sample_meta_gaussian(spec, 1000000, 8));
  CounterRng rng(2);
  for (int r = 0; r < 10; ++r) EXPECT_NEAR(portfolio_kurtosis(random_interior(3, rng), c), 3.0, 0.05);
}

TEST(PortfolioSkewness, SymmetryAndSignFlip) {
  const CoMomentSet& sym = pdim::testing::universe(3, 0.2, 6.0, 1000000, 5);
  EXPECT_NEAR(portfolio_skewness(Vector::Constant(3, 1.0 / 3), sym), 0.0, 0.03);

  ReturnSample s = random_sample(3000, 3, 7);
  const Vector w = Vector::Constant(3, 1.0 / 3);
  const double sk = portfolio_skewness(w, build_comoments(s));
  s.values = -s.values;
  EXPECT_NEAR(portfolio_skewness(w, build_comoments(s)), -sk, 1e-12);
}

TEST(PortfolioSkewness, SkewedNigRoundTrip) {
  MarginTarget t{0.0, 1.0, 0.5, 6.0};
  const auto spec = MetaGaussianSpec::make({Margin::from_target(t)}, Matrix::Identity(1, 1));
  const CoMomentSet c = build_comoments(sample_meta_gaussian(spec, 1000000, 3));
  EXPECT_NEAR(portfolio_skewness(Vector::Ones(1), c), 0.5, 0.05);
}

class Derivatives : public ::testing::Test {
 protected:
  static const CoMomentSet& moments() {
    static const CoMomentSet c = build_comoments(random_sample(400, 4, 21));
    return c;
  }
};

TEST_F(Derivatives, GradientsMatchCentralDifferences) {
  const CoMomentSet& c = moments();
  CounterRng rng(3);
  const double h = 1e-5;
  for (int r = 0; r < 100; ++r) {
    const Vector w = random_interior(4, rng);
    const auto d = moment_derivatives(w, c);
    const Vector gk = kurtosis_gradient(w, c);
    for (Eigen::Index i = 0; i < 4; ++i) {
      Vector up = w, dn = w;
      up[i] += h;
      dn[i] -= h;
      const auto mu = portfolio_moments(up, c), md = portfolio_moments(dn, c);
      const double fd3 = (mu.mu3 - md.mu3) / (2 * h);
      const double fd4 = (mu.mu4 - md.mu4) / (2 * h);
      const double fdk = (portfolio_kurtosis(up, c) - portfolio_kurtosis(dn, c)) / (2 * h);
      EXPECT_LT(std::abs(fd3 - d.grad_mu3[i]), 1e-6 * d.grad_mu3.norm());
      EXPECT_LT(std::abs(fd4 - d.grad_mu4[i]), 1e-6 * d.grad_mu4.norm());
      EXPECT_LT(std::abs(fdk - gk[i]), 1e-6 * std::max(gk.norm(), 1e-3));
      const auto du = moment_derivatives(up, c), dd = moment_derivatives(dn, c);
      const Vector fh3 = (du.grad_mu3 - dd.grad_mu3) / (2 * h);
      const Vector fh4 = (du.grad_mu4 - dd.grad_mu4) / (2 * h);
      EXPECT_LT((fh3 - d.hess_mu3.col(i)).norm(), 1e-6 * d.hess_mu3.norm());
      EXPECT_LT((fh4 - d.hess_mu4.col(i)).norm(), 1e-6 * d.hess_mu4.norm());
    }
  }
}

TEST_F(Derivatives, EulerIdentities) {
  const CoMomentSet& c = moments();
  CounterRng rng(4);
  for (int r = 0; r < 100; ++r) {
    const Vector w = random_interior(4, rng);
    const auto m = portfolio_moments(w, c);
    const auto d = moment_derivatives(w, c);
    EXPECT_NEAR(w.dot(d.grad_mu3), 3 * m.mu3, 1e-10 * std::max(1.0, std::abs(m.mu3)));
    EXPECT_NEAR(w.dot(d.grad_mu4), 4 * m.mu4, 1e-10 * m.mu4);
    EXPECT_LT((d.hess_mu4 * w - 3 * d.grad_mu4).norm(), 1e-10 * d.grad_mu4.norm());
    EXPECT_LT((d.hess_mu3 * w - 2 * d.grad_mu3).norm(), 1e-10 * std::max(1.0, d.grad_mu3.norm()));
    EXPECT_LT((d.hess_mu3 - d.hess_mu3.transpose()).cwiseAbs().maxCoeff(), 1e-12 * d.hess_mu3.norm());
    EXPECT_NEAR(w.dot(kurtosis_gradient(w, c)), 0.0, 1e-9);
  }
}

TEST_F(Derivatives, EvaluatorAgreesWithReferenceFormulas) {
  const CoMomentSet& c = moments();
  const MomentEvaluator e(c);
  CounterRng rng(5);
  for (int r = 0; r < 20; ++r) {
    const Vector w = random_interior(4, rng);
    Vector g;
    const double k = e.kurtosis_gradient(w, g);
    EXPECT_NEAR(k, portfolio_kurtosis(w, c), 1e-12 * k);
    EXPECT_LT((g - kurtosis_gradient(w, c)).norm(), 1e-10 * std::max(1.0, g.norm()));
    Vector g4;
    EXPECT_NEAR(e.fourth_moment_gradient(w, g4), portfolio_moments(w, c).mu4, 1e-12);
    EXPECT_LT((g4 - moment_derivatives(w, c).grad_mu4).norm(), 1e-10 * g4.norm());
  }
}

TEST_F(Derivatives, ProjectedGradientVanishesAtLocalMinimum) {
  const CoMomentSet& c = moments();
  const MomentEvaluator e(c);
  const DescentResult r = local_descent(e, Vector::Constant(4, 0.25));
  ASSERT_TRUE(r.converged);
  const Vector g = kurtosis_gradient(r.w, c);
  double pg = 0.0;
  if ((r.w.array() > 1e-9).all()) {
    pg = (g.array() - g.mean()).matrix().norm();
  } else {
    pg = (r.w - project_simplex(r.w - g)).norm();
  }
  EXPECT_LT(pg, 1e-6);
}
