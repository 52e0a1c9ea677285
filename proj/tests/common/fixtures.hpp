#pragma once

#include "pdim/comoments.hpp"
#include "pdim/copula.hpp"
#include "pdim/gld.hpp"
#include "pdim/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

namespace pdim::testing {

// Simulated universe with identical NIG margins (mean 0, variance 1,
// skewness 0, kurtosis `kappa`) and homogeneous correlation.  Cached per
// parameter set because several tests share the expensive instances.
inline const CoMomentSet& universe(std::size_t n, double rho, double kappa, std::size_t t_obs,
                                   std::uint64_t seed) {
  using Key = std::tuple<std::size_t, double, double, std::size_t, std::uint64_t>;
  static std::map<Key, CoMomentSet> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  const Key key{n, rho, kappa, t_obs, seed};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  MarginTarget t{0.0, 1.0, 0.0, kappa};
  std::vector<Margin> margins(n, Margin::from_target(t));
  const auto spec = MetaGaussianSpec::make(margins, homogeneous_correlation(n, rho));
  const ReturnSample s = sample_meta_gaussian(spec, t_obs, seed);
  return cache.emplace(key, build_comoments(s)).first->second;
}

inline ReturnSample random_sample(std::size_t t, std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  ReturnSample s;
  s.values.resize(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < s.values.rows(); ++i)
    for (Eigen::Index j = 0; j < s.values.cols(); ++j) {
      const double z = rng.normal();
      // Skewed, heavy-tailed and cross-dependent.
      s.values(i, j) = z + 0.3 * z * z + (j > 0 ? 0.5 * s.values(i, j - 1) : 0.0);
    }
  for (std::size_t j = 0; j < n; ++j) s.asset_names.push_back("a" + std::to_string(j + 1));
  return s;
}

inline Vector random_interior(std::size_t n, CounterRng& rng) {
  Vector w = sample_uniform_simplex(n, rng);
  w = (w.array() + 0.05).matrix();
  return w / w.sum();
}

// Asymptotic Kolmogorov distribution tail P(K > x).
inline double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k)
    s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(s, 0.0, 1.0);
}

// One-sample KS p-value with the Stephens small-sample correction.
template <typename Cdf>
double ks_pvalue(std::vector<double> xs, Cdf cdf) {
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = cdf(xs[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

}  // namespace pdim::testing
