#include "pdim/nig.hpp"

#include "pdim/error.hpp"
#include "pdim/special.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pdim {

namespace {

using GaussKronrod = boost::math::quadrature::gauss_kronrod<double, 15>;
constexpr double kQuadTol = 1e-13;
constexpr unsigned kQuadDepth = 20;

}  // namespace

void NigParams::validate() const {
  if (!(std::isfinite(alpha) && std::isfinite(beta) && std::isfinite(delta) && std::isfinite(mu)))
    throw InvalidInput("NIG parameters must be finite");
  if (!(delta > 0.0)) throw InvalidInput("NIG scale delta must be positive");
  if (!(std::abs(beta) < alpha)) throw InvalidInput("NIG parameters need |beta| < alpha");
}

double nig_pdf(double x, const NigParams& p) {
  p.validate();
  const double gamma = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
  const double d = x - p.mu;
  const double q = std::hypot(p.delta, d);
  const double log_f = std::log(p.delta * p.alpha / std::numbers::pi) + p.delta * gamma +
                       p.beta * d + log_bessel_k1(p.alpha * q) - std::log(q);
  return std::exp(log_f);
}

MarginTarget nig_moments(const NigParams& p) {
  p.validate();
  const double gamma = std::sqrt(p.alpha * p.alpha - p.beta * p.beta);
  const double ratio = p.beta / p.alpha;
  MarginTarget m;
  m.mean = p.mu + p.delta * p.beta / gamma;
  m.variance = p.delta * p.alpha * p.alpha / (gamma * gamma * gamma);
  m.skewness = 3.0 * ratio / std::sqrt(p.delta * gamma);
  m.kurtosis = 3.0 + 3.0 * (1.0 + 4.0 * ratio * ratio) / (p.delta * gamma);
  return m;
}

NigParams nig_params_from_moments(const MarginTarget& t) {
  if (!(std::isfinite(t.mean) && std::isfinite(t.variance) && std::isfinite(t.skewness) &&
        std::isfinite(t.kurtosis)))
    throw InvalidInput("margin target must be finite");
  if (!(t.variance > 0.0)) throw InvalidInput("margin variance must be positive");
  const double excess = t.kurtosis - 3.0;
  if (!(excess > 0.0)) {
    std::ostringstream os;
    os << "NIG kurtosis must strictly exceed 3 (got " << t.kurtosis << ")";
    throw InvalidInput(os.str());
  }
  const double s2 = t.skewness * t.skewness;
  const double bound = 3.0 * excess / 5.0;
  if (!(s2 < bound)) {
    std::ostringstream os;
    os << "skewness^2 = " << s2 << " violates the NIG bound 3(kurtosis - 3)/5 = " << bound;
    throw InvalidInput(os.str());
  }
  // With r = beta/alpha and z = delta*gamma: skew^2 = 9 r^2 / z and
  // excess = 3 (1 + 4 r^2) / z, so r^2 = skew^2 / (3 excess - 4 skew^2).
  const double r2 = s2 / (3.0 * excess - 4.0 * s2);
  const double r = std::copysign(std::sqrt(r2), t.skewness);
  const double z = 3.0 * (1.0 + 4.0 * r2) / excess;
  const double one_minus = 1.0 - r2;
  NigParams p;
  p.alpha = std::sqrt(z / t.variance) / one_minus;
  p.beta = r * p.alpha;
  const double gamma = p.alpha * std::sqrt(one_minus);
  p.delta = z / gamma;
  p.mu = t.mean - p.delta * p.beta / gamma;
  return p;
}

NigDistribution::NigDistribution(const NigParams& p) : p_(p), moments_(nig_moments(p)) {
  const double sd = std::sqrt(moments_.variance);
  h_ = 2.0 * kHalfWidthSd * sd / static_cast<double>(kNodes - 1);
  x0_ = moments_.mean - kHalfWidthSd * sd;

  f_.resize(kNodes);
  df_.resize(kNodes);
  auto pdf_fn = [this](double x) { return nig_pdf(x, p_); };
  f_[0] = GaussKronrod::integrate(pdf_fn, -std::numeric_limits<double>::infinity(), x0_,
                                  kQuadDepth, kQuadTol);
  for (std::size_t i = 1; i < kNodes; ++i) {
    const double a = x0_ + h_ * static_cast<double>(i - 1);
    // Intervals are 1/25 of a standard deviation wide; one Kronrod pass is
    // exact to rounding there, and adaptive refinement only burns time in
    // the far tails where the relative criterion cannot be met.
    f_[i] = f_[i - 1] + GaussKronrod::integrate(pdf_fn, a, a + h_, 0);
  }
  for (std::size_t i = 0; i < kNodes; ++i) df_[i] = pdf_fn(x0_ + h_ * static_cast<double>(i));

  // Fritsch-Carlson limiter keeps each Hermite piece monotone.
  for (std::size_t i = 0; i + 1 < kNodes; ++i) {
    const double secant = (f_[i + 1] - f_[i]) / h_;
    if (secant <= 0.0) {
      df_[i] = 0.0;
      df_[i + 1] = 0.0;
      continue;
    }
    const double a = df_[i] / secant;
    const double b = df_[i + 1] / secant;
    const double norm2 = a * a + b * b;
    if (norm2 > 9.0) {
      const double tau = 3.0 / std::sqrt(norm2);
      df_[i] = tau * a * secant;
      df_[i + 1] = tau * b * secant;
    }
  }
}

double NigDistribution::tail_below(double x) const {
  return GaussKronrod::integrate([this](double t) { return nig_pdf(t, p_); },
                                 -std::numeric_limits<double>::infinity(), x, kQuadDepth,
                                 kQuadTol);
}

double NigDistribution::tail_above(double x) const {
  return GaussKronrod::integrate([this](double t) { return nig_pdf(t, p_); }, x,
                                 std::numeric_limits<double>::infinity(), kQuadDepth, kQuadTol);
}

double NigDistribution::interpolate(std::size_t i, double x) const {
  const double t = (x - (x0_ + h_ * static_cast<double>(i))) / h_;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return f_[i] * (2 * t3 - 3 * t2 + 1) + h_ * df_[i] * (t3 - 2 * t2 + t) +
         f_[i + 1] * (-2 * t3 + 3 * t2) + h_ * df_[i + 1] * (t3 - t2);
}

double NigDistribution::interpolate_slope(std::size_t i, double x) const {
  const double t = (x - (x0_ + h_ * static_cast<double>(i))) / h_;
  const double t2 = t * t;
  return (f_[i] * (6 * t2 - 6 * t) + f_[i + 1] * (-6 * t2 + 6 * t)) / h_ +
         df_[i] * (3 * t2 - 4 * t + 1) + df_[i + 1] * (3 * t2 - 2 * t);
}

double NigDistribution::cdf(double x) const {
  if (std::isnan(x)) throw InvalidInput("NIG cdf of NaN");
  if (x <= x0_) return x == x0_ ? f_[0] : tail_below(x);
  if (x >= upper()) return x == upper() ? f_.back() : 1.0 - tail_above(x);
  const auto i = std::min(static_cast<std::size_t>((x - x0_) / h_), kNodes - 2);
  return interpolate(i, x);
}

double NigDistribution::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw InvalidInput("NIG quantile needs u in (0, 1)");
  if (u < f_.front() || u > f_.back()) {
    // Outside the tabulated range: bisection on the quadrature tails.
    const bool low = u < f_.front();
    double inner = low ? x0_ : upper();
    double step = h_;
    double outer = inner;
    for (int it = 0; it < 200; ++it) {
      outer = low ? inner - step : inner + step;
      if (low ? tail_below(outer) < u : 1.0 - tail_above(outer) > u) break;
      step *= 2.0;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (inner + outer);
      const double c = cdf(mid);
      if ((c < u) == low) outer = mid; else inner = mid;
      if (std::abs(outer - inner) < 1e-14 * std::max(1.0, std::abs(mid))) break;
    }
    return 0.5 * (inner + outer);
  }
  // Node bracket by binary search, then safeguarded Newton on the Hermite piece.
  const auto it = std::upper_bound(f_.begin(), f_.end(), u);
  auto i = static_cast<std::size_t>(std::distance(f_.begin(), it));
  i = std::clamp<std::size_t>(i, 1, kNodes - 1) - 1;
  double lo = x0_ + h_ * static_cast<double>(i);
  double hi = lo + h_;
  double x = lo + h_ * (u - f_[i]) / std::max(f_[i + 1] - f_[i], 1e-300);
  for (int iter = 0; iter < 60; ++iter) {
    const double r = interpolate(i, x) - u;
    if (r > 0.0) hi = x; else lo = x;
    if (std::abs(r) <= 1e-15 || hi - lo <= 1e-15 * std::max(1.0, std::abs(x))) break;
    const double s = interpolate_slope(i, x);
    double next = s > 0.0 ? x - r / s : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

double nig_cdf(double x, const NigParams& p) { return NigDistribution(p).cdf(x); }

double nig_quantile(double u, const NigParams& p) { return NigDistribution(p).quantile(u); }

Margin Margin::gaussian(double mean, double sd) {
  if (!(sd > 0.0) || !std::isfinite(mean)) throw InvalidInput("Gaussian margin needs sd > 0");
  Margin m;
  m.law_ = GaussianMargin{mean, sd};
  return m;
}

Margin Margin::nig(const NigParams& p) {
  p.validate();
  Margin m;
  m.law_ = std::make_shared<const NigDistribution>(p);
  return m;
}

Margin Margin::from_target(const MarginTarget& t) {
  if (t.kurtosis == 3.0 && t.skewness == 0.0) {
    if (!(t.variance > 0.0)) throw InvalidInput("margin variance must be positive");
    return gaussian(t.mean, std::sqrt(t.variance));
  }
  return nig(nig_params_from_moments(t));
}

const NigParams* Margin::nig_params() const {
  if (const auto* d = std::get_if<std::shared_ptr<const NigDistribution>>(&law_))
    return &(*d)->params();
  return nullptr;
}

double Margin::pdf(double x) const {
  if (const auto* g = std::get_if<GaussianMargin>(&law_))
    return normal_pdf((x - g->mean) / g->sd) / g->sd;
  return std::get<1>(law_)->pdf(x);
}

double Margin::cdf(double x) const {
  if (const auto* g = std::get_if<GaussianMargin>(&law_)) return normal_cdf((x - g->mean) / g->sd);
  return std::get<1>(law_)->cdf(x);
}

double Margin::quantile(double u) const {
  if (const auto* g = std::get_if<GaussianMargin>(&law_))
    return g->mean + g->sd * normal_quantile(u);
  return std::get<1>(law_)->quantile(u);
}

MarginTarget Margin::moments() const {
  if (const auto* g = std::get_if<GaussianMargin>(&law_))
    return MarginTarget{g->mean, g->sd * g->sd, 0.0, 3.0};
  return std::get<1>(law_)->moments();
}

bool Margin::same_law(const Margin& other) const {
  if (is_gaussian() != other.is_gaussian()) return false;
  if (is_gaussian()) {
    const auto& a = std::get<GaussianMargin>(law_);
    const auto& b = std::get<GaussianMargin>(other.law_);
    return a.mean == b.mean && a.sd == b.sd;
  }
  const auto* a = nig_params();
  const auto* b = other.nig_params();
  return a->alpha == b->alpha && a->beta == b->beta && a->delta == b->delta && a->mu == b->mu;
}

}  // namespace pdim
