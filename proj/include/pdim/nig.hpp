#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace pdim {

// Normal inverse Gaussian parameters: tail heaviness alpha, asymmetry beta,
// scale delta, location mu.  Valid when delta > 0 and |beta| < alpha.
struct NigParams {
  double alpha = 1.0;
  double beta = 0.0;
  double delta = 1.0;
  double mu = 0.0;

  void validate() const;
};

// First four moments of a margin.  NIG margins need kurtosis > 3 and
// skewness^2 < 3 (kurtosis - 3) / 5.
struct MarginTarget {
  double mean = 0.0;
  double variance = 1.0;
  double skewness = 0.0;
  double kurtosis = 3.0;
};

double nig_pdf(double x, const NigParams& p);
MarginTarget nig_moments(const NigParams& p);
// Closed-form inverse of nig_moments.  Throws InvalidInput when the target
// violates the skewness-kurtosis bound or has kurtosis <= 3.
NigParams nig_params_from_moments(const MarginTarget& t);

// NIG law with a tabulated CDF: 2048 nodes spanning mean +/- 40 standard
// deviations, node values by adaptive Gauss-Kronrod quadrature of the pdf,
// monotone cubic Hermite interpolation in between.
class NigDistribution {
 public:
  static constexpr std::size_t kNodes = 2048;
  static constexpr double kHalfWidthSd = 40.0;

  explicit NigDistribution(const NigParams& p);

  const NigParams& params() const { return p_; }
  const MarginTarget& moments() const { return moments_; }

  double pdf(double x) const { return nig_pdf(x, p_); }
  double cdf(double x) const;
  // Inverse of cdf(); throws InvalidInput unless 0 < u < 1.
  double quantile(double u) const;

  double lower() const { return x0_; }
  double upper() const { return x0_ + h_ * static_cast<double>(kNodes - 1); }

 private:
  double tail_below(double x) const;
  double tail_above(double x) const;
  double interpolate(std::size_t i, double x) const;
  double interpolate_slope(std::size_t i, double x) const;

  NigParams p_;
  MarginTarget moments_;
  double x0_ = 0.0;
  double h_ = 0.0;
  std::vector<double> f_;   // cdf at nodes
  std::vector<double> df_;  // limited slopes at nodes
};

// One-off evaluations; each call tabulates afresh, so prefer NigDistribution
// for repeated use.
double nig_cdf(double x, const NigParams& p);
double nig_quantile(double u, const NigParams& p);

struct GaussianMargin {
  double mean = 0.0;
  double sd = 1.0;
};

// Marginal law of one simulated asset: either Gaussian or NIG.
class Margin {
 public:
  static Margin gaussian(double mean, double sd);
  static Margin nig(const NigParams& p);
  // Kurtosis == 3 with zero skewness selects the Gaussian law.
  static Margin from_target(const MarginTarget& t);

  bool is_gaussian() const { return std::holds_alternative<GaussianMargin>(law_); }
  const NigParams* nig_params() const;

  double pdf(double x) const;
  double cdf(double x) const;
  double quantile(double u) const;
  MarginTarget moments() const;

  // Equality of the underlying parameters.
  bool same_law(const Margin& other) const;

 private:
  std::variant<GaussianMargin, std::shared_ptr<const NigDistribution>> law_;
};

}  // namespace pdim
