#include "fixtures.hpp"

#include "pdim/copula.hpp"
#include "pdim/error.hpp"
#include "pdim/nig.hpp"
#include "pdim/rng.hpp"
#include "pdim/special.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/sinh_sinh.hpp>
#include <gtest/gtest.h>

#include <cmath>

using namespace pdim;

namespace {

const NigParams kUnit{1.0, 0.0, 1.0, 0.0};

MarginTarget kurtosis6() { return {0.0, 1.0, 0.0, 6.0}; }

double sample_corr(const Matrix& x, Eigen::Index i, Eigen::Index j) {
  const Vector a = x.col(i).array() - x.col(i).mean();
  const Vector b = x.col(j).array() - x.col(j).mean();
  return a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
}

double sample_kurtosis(const Vector& x) {
  const Vector a = x.array() - x.mean();
  const double v = a.squaredNorm() / static_cast<double>(a.size());
  return a.array().pow(4).mean() / (v * v);
}

}  // namespace

TEST(Rng, DeterministicAndSplittable) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  CounterRng s0 = CounterRng(42).substream(0), s1 = CounterRng(42).substream(1);
  EXPECT_NE(s0(), s1());
  CounterRng c(42);
  c.seek(50);
  CounterRng d(42);
  for (int i = 0; i < 50; ++i) d();
  EXPECT_EQ(c(), d());
  for (int i = 0; i < 1000; ++i) {
    const double u = a.uniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
}

TEST(Rng, NormalVariatesPassKs) {
  CounterRng rng(5);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = rng.normal();
  EXPECT_GT(pdim::testing::ks_pvalue(xs, normal_cdf), 0.01);
}

TEST(Special, NormalQuantileInvertsCdf) {
  for (double p : {1e-300, 1e-12, 0.01, 0.3, 0.5, 0.9, 1 - 1e-12}) {
    const double x = normal_quantile(p);
    EXPECT_NEAR(normal_cdf(x) / p, 1.0, 1e-10) << p;
  }
}

TEST(Special, BivariateNormalKnownValues) {
  EXPECT_NEAR(bivariate_normal_cdf(0, 0, 0), 0.25, 1e-14);
  // Sheppard: P(X<=0, Y<=0) = 1/4 + asin(r) / (2 pi).
  for (double r : {-0.9, -0.5, 0.3, 0.99})
    EXPECT_NEAR(bivariate_normal_cdf(0, 0, r), 0.25 + std::asin(r) / (2 * M_PI), 1e-12);
  EXPECT_NEAR(bivariate_normal_cdf(1.0, -0.5, 0.0), normal_cdf(1.0) * normal_cdf(-0.5), 1e-14);
}

TEST(NigPdf, SymmetryAndMode) {
  const NigParams p{2.0, 0.0, 1.5, 0.0};
  for (double x : {0.1, 0.7, 2.0, 9.0}) EXPECT_NEAR(nig_pdf(x, p), nig_pdf(-x, p), 1e-14);
  const NigParams q{2.0, 0.0, 1.5, 0.4};
  for (double dx : {1e-3, 0.1, 1.0}) {
    EXPECT_GT(nig_pdf(0.4, q), nig_pdf(0.4 + dx, q));
    EXPECT_GT(nig_pdf(0.4, q), nig_pdf(0.4 - dx, q));
  }
}

TEST(NigPdf, IntegratesToOne) {
  boost::math::quadrature::sinh_sinh<double> integrator;
  for (const NigParams& p : {kUnit, NigParams{3.0, 1.2, 0.5, -0.3}}) {
    const double total = integrator.integrate([&](double x) { return nig_pdf(x, p); }, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-6);
  }
}

TEST(NigMoments, UnitParameters) {
  const MarginTarget m = nig_moments(kUnit);
  EXPECT_NEAR(m.mean, 0.0, 1e-15);
  EXPECT_NEAR(m.variance, 1.0, 1e-15);
  EXPECT_NEAR(m.skewness, 0.0, 1e-15);
  EXPECT_NEAR(m.kurtosis, 6.0, 1e-14);
  const NigParams back = nig_params_from_moments(kurtosis6());
  EXPECT_NEAR(back.alpha, 1.0, 1e-12);
  EXPECT_NEAR(back.beta, 0.0, 1e-12);
  EXPECT_NEAR(back.delta, 1.0, 1e-12);
  EXPECT_NEAR(back.mu, 0.0, 1e-12);
}

TEST(NigMoments, RoundTripAndSkewBound) {
  CounterRng rng(8);
  for (int r = 0; r < 500; ++r) {
    const double alpha = 0.2 + 5 * rng.uniform();
    const NigParams p{alpha, alpha * (2 * rng.uniform() - 1) * 0.95, 0.1 + 3 * rng.uniform(),
                      4 * rng.uniform() - 2};
    const MarginTarget m = nig_moments(p);
    EXPECT_LT(m.skewness * m.skewness, 3 * (m.kurtosis - 3) / 5);
    const NigParams q = nig_params_from_moments(m);
    EXPECT_NEAR(q.alpha, p.alpha, 1e-10 * p.alpha);
    EXPECT_NEAR(q.beta, p.beta, 1e-10 * p.alpha);
    EXPECT_NEAR(q.delta, p.delta, 1e-10 * p.delta);
    EXPECT_NEAR(q.mu, p.mu, 1e-10 * (1 + p.delta));
    const NigParams s{alpha, 0.0, p.delta, p.mu};
    EXPECT_EQ(nig_moments(s).skewness, 0.0);
  }
}

TEST(NigMoments, RejectsInfeasibleTargets) {
  EXPECT_THROW(nig_params_from_moments({0, 1, 0, 3.0}), InvalidInput);
  EXPECT_THROW(nig_params_from_moments({0, 1, 1.4, 6.0}), InvalidInput);
  EXPECT_THROW(nig_params_from_moments({0, -1, 0, 6.0}), InvalidInput);
  EXPECT_THROW((NigParams{1.0, 1.0, 1.0, 0.0}.validate()), InvalidInput);
}

TEST(NigCdf, LimitsMedianAndRoundTrip) {
  const NigDistribution d(kUnit);
  EXPECT_NEAR(d.quantile(0.5), 0.0, 1e-8);
  EXPECT_NEAR(d.cdf(-1e6), 0.0, 1e-9);
  EXPECT_NEAR(d.cdf(1e6), 1.0, 1e-9);
  const NigDistribution skew(nig_params_from_moments({0.1, 2.0, 0.8, 7.0}));
  for (const NigDistribution* dist : {&d, &skew})
    for (double u : {1e-6, 0.01, 0.25, 0.5, 0.9, 0.999999})
      EXPECT_NEAR(dist->cdf(dist->quantile(u)), u, 1e-8) << u;
}

TEST(NigCdf, MatchesIndependentQuadrature) {
  // Target (0, 1, 0.8, 7).  Reference values: 30-digit mpmath quadrature of
  // the closed-form density over (-inf, x].
  const NigParams p = nig_params_from_moments({0.0, 1.0, 0.8, 7.0});
  const NigDistribution d(p);
  const std::vector<std::pair<double, double>> ref{
      {-6.0, 2.2786001794520107e-05}, {-1.5, 0.044659121563771616},
      {-0.2, 0.4349772321000355},     {0.0, 0.5415572640204995},
      {0.7, 0.8135646143466752},      {3.0, 0.9889795812691575}};
  // Cubic Hermite error at the 2048-node spacing peaks near the mode (~2e-8).
  for (const auto& [x, f] : ref) EXPECT_NEAR(d.cdf(x), f, 5e-8) << x;
  boost::math::quadrature::exp_sinh<double> left;
  for (double x : {-50.0, -20.0, -8.0}) {
    const double q = left.integrate([&](double t) { return nig_pdf(x - t, p); }, 1e-13);
    EXPECT_NEAR(d.cdf(x), q, 1e-12) << x;
  }
  for (double x : {8.0, 30.0, 50.0}) {
    const double q = left.integrate([&](double t) { return nig_pdf(x + t, p); }, 1e-13);
    EXPECT_NEAR(1.0 - d.cdf(x), q, 1e-12) << x;
  }
}

TEST(RhoOut, ZeroGaussianAndOddSymmetry) {
  const Margin nig = Margin::from_target(kurtosis6());
  const Margin gauss = Margin::gaussian(0.0, 2.0);
  EXPECT_NEAR(rho_out(0.0, nig, nig), 0.0, 1e-10);
  for (double r : {-0.9, -0.3, 0.4, 0.95}) {
    EXPECT_NEAR(rho_out(r, gauss, gauss), r, 1e-3);
    EXPECT_NEAR(rho_out(-r, nig, nig), -rho_out(r, nig, nig), 1e-8);
  }
  double prev = -2.0;
  for (int i = 0; i < 21; ++i) {
    const double r = -0.99 + 1.98 * i / 20.0;
    const double v = rho_out(r, nig, nig);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(RhoOut, MatchesMonteCarlo) {
  const Margin nig = Margin::from_target(kurtosis6());
  MetaGaussianSpec spec;
  spec.margins = {nig, nig};
  spec.target_corr = homogeneous_correlation(2, 0.5);
  spec.input_corr = spec.target_corr;
  const ReturnSample s = sample_meta_gaussian(spec, 1000000, 12);
  const double r = sample_corr(s.values, 0, 1);
  // Standard error of a correlation estimate under heavy tails, from batches.
  std::vector<double> batch;
  for (Eigen::Index b = 0; b < 100; ++b)
    batch.push_back(sample_corr(s.values.middleRows(b * 10000, 10000), 0, 1));
  double m = 0.0, v = 0.0;
  for (double x : batch) m += x / 100;
  for (double x : batch) v += (x - m) * (x - m) / 99;
  const double se = std::sqrt(v / 100);
  EXPECT_LT(std::abs(r - rho_out(0.5, nig, nig)), 3 * se);
}

TEST(AdjustCorrelation, IdentityGaussianAndRoundTrip) {
  const Margin nig = Margin::from_target(kurtosis6());
  const std::vector<Margin> three(3, nig);
  EXPECT_TRUE(adjust_correlation(Matrix::Identity(3, 3), three).isApprox(Matrix::Identity(3, 3)));

  const std::vector<Margin> gauss(3, Margin::gaussian(0, 1));
  const Matrix target = homogeneous_correlation(3, -0.3);
  EXPECT_LT((adjust_correlation(target, gauss) - target).cwiseAbs().maxCoeff(), 1e-3);

  const Matrix adj = adjust_correlation(homogeneous_correlation(2, -0.2), {nig, nig});
  EXPECT_LT(std::abs(rho_out(adj(0, 1), nig, nig) + 0.2), 1e-4);
}

TEST(AdjustCorrelation, RejectsUnattainableTargets) {
  const Margin skew_pos = Margin::from_target({0, 1, 1.3, 9.0});
  const Margin skew_neg = Margin::from_target({0, 1, -1.3, 9.0});
  const CopulaCorrelation cc(skew_pos, skew_pos);
  EXPECT_GT(cc.rho_out(1.0), 0.999);
  const CopulaCorrelation anti(skew_pos, skew_pos);
  EXPECT_THROW(anti.invert(-0.9999), InvalidInput);
  EXPECT_THROW(adjust_correlation(homogeneous_correlation(2, 0.9999), {skew_pos, skew_neg}),
               InvalidInput);
  EXPECT_THROW(validate_correlation(Matrix::Ones(2, 2) * 2, 2, "r"), InvalidInput);
}

TEST(Sampling, DeterministicAcrossRunsAndThreads) {
  const auto spec = MetaGaussianSpec::make(std::vector<Margin>(3, Margin::from_target(kurtosis6())),
                                           homogeneous_correlation(3, -0.2));
  SampleOptions many;
  many.threads = 4;
  const ReturnSample a = sample_meta_gaussian(spec, 20000, 7);
  const ReturnSample b = sample_meta_gaussian(spec, 20000, 7);
  const ReturnSample c = sample_meta_gaussian(spec, 20000, 7, many);
  EXPECT_TRUE(a.values == b.values);
  EXPECT_TRUE(a.values == c.values);
  EXPECT_FALSE(a.values == sample_meta_gaussian(spec, 20000, 8).values);
  EXPECT_EQ(a.asset_names[0], "asset1");
}

TEST(Sampling, IndependentPairIsUncorrelated) {
  const CoMomentSet& c = pdim::testing::universe(2, 0.0, 6.0, 1000000, 5);
  EXPECT_LT(std::abs(c.m2()(0, 1) / std::sqrt(c.m2()(0, 0) * c.m2()(1, 1))), 0.004);
}

TEST(Sampling, DeskInstanceMarginsAndCorrelation) {
  const auto spec = MetaGaussianSpec::make(std::vector<Margin>(3, Margin::from_target(kurtosis6())),
                                           homogeneous_correlation(3, -0.2));
  const ReturnSample s = sample_meta_gaussian(spec, 1000000, 1);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(sample_kurtosis(s.values.col(i)), 6.0, 0.15);
    for (Eigen::Index j = i + 1; j < 3; ++j) EXPECT_NEAR(sample_corr(s.values, i, j), -0.2, 0.01);
  }
}

TEST(Sampling, MarginsPassKs) {
  const Margin skew = Margin::from_target({0, 1, 0.6, 6.0});
  const Margin sym = Margin::from_target(kurtosis6());
  const auto spec = MetaGaussianSpec::make({skew, sym}, homogeneous_correlation(2, 0.4));
  const ReturnSample s = sample_meta_gaussian(spec, 100000, 3);
  for (Eigen::Index i = 0; i < 2; ++i) {
    const Margin& m = spec.margins[static_cast<std::size_t>(i)];
    std::vector<double> xs(s.values.col(i).data(), s.values.col(i).data() + s.values.rows());
    EXPECT_GT(pdim::testing::ks_pvalue(xs, [&](double x) { return m.cdf(x); }), 0.01);
  }
}

TEST(Sampling, GaussianMarginsSatisfyIsserlis) {
  const double rho = 0.6;
  const auto spec = MetaGaussianSpec::make(std::vector<Margin>(2, Margin::gaussian(0, 1)),
                                           homogeneous_correlation(2, rho));
  const CoMomentSet c = build_comoments(sample_meta_gaussian(spec, 1000000, 4));
  const double s00 = c.m2()(0, 0), s11 = c.m2()(1, 1), s01 = c.m2()(0, 1);
  EXPECT_NEAR(c.k(0, 0, 1, 1), s00 * s11 + 2 * s01 * s01, 0.05);
  EXPECT_NEAR(c.k(0, 0, 0, 1), 3 * s00 * s01, 0.05);
  EXPECT_NEAR(c.k(0, 0, 0, 0), 3 * s00 * s00, 0.05);
}
