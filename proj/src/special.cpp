#include "pdim/special.hpp"

#include "pdim/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace pdim {

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal quantile needs p in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double log_bessel_k1(double x) {
  if (!(x > 0.0)) throw InvalidInput("Bessel K1 needs a positive argument");
  if (x < 600.0) return std::log(std::cyl_bessel_k(1.0, x));
  // K_1(x) ~ sqrt(pi / 2x) e^{-x} sum_k a_k x^{-k}, a_k = prod_{m<=k}(4 - (2m-1)^2) / (k! 8^k)
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= (4.0 - odd * odd) / (8.0 * k * x);
    sum += term;
  }
  return 0.5 * std::log(std::numbers::pi / (2.0 * x)) - x + std::log(sum);
}

namespace {

// Upper orthant probability P(X > dh, Y > dk), after Genz's BVNU.
double bvn_upper(double dh, double dk, double r) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (std::isinf(dh) && dh > 0) return 0.0;
  if (std::isinf(dk) && dk > 0) return 0.0;
  if (std::isinf(dh)) return std::isinf(dk) ? 1.0 : normal_cdf(-dk);
  if (std::isinf(dk)) return normal_cdf(-dh);
  if (r == 0.0) return normal_cdf(-dh) * normal_cdf(-dk);

  static constexpr std::array<double, 3> w6{0.1713244923791705, 0.3607615730481384,
                                            0.4679139345726904};
  static constexpr std::array<double, 3> x6{0.9324695142031522, 0.6612093864662647,
                                            0.2386191860831970};
  static constexpr std::array<double, 6> w12{.04717533638651177, 0.1069393259953183,
                                             0.1600783285433464, 0.2031674267230659,
                                             0.2334925365383547, 0.2491470458134029};
  static constexpr std::array<double, 6> x12{0.9815606342467191, 0.9041172563704750,
                                             0.7699026741943050, 0.5873179542866171,
                                             0.3678314989981802, 0.1252334085114692};
  static constexpr std::array<double, 10> w20{
      .01761400713915212, .04060142980038694, .06267204833410906, .08327674157670475,
      0.1019301198172404, 0.1181945319615184, 0.1316886384491766, 0.1420961093183821,
      0.1491729864726037, 0.1527533871307259};
  static constexpr std::array<double, 10> x20{
      0.9931285991850949, 0.9639719272779138, 0.9122344282513259, 0.8391169718222188,
      0.7463319064601508, 0.6360536807265150, 0.5108670019508271, 0.3737060887154196,
      0.2277858511416451, 0.07652652113349733};

  const double* wp;
  const double* xp;
  std::size_t lg;
  const double ar = std::abs(r);
  if (ar < 0.3) {
    wp = w6.data(), xp = x6.data(), lg = 3;
  } else if (ar < 0.75) {
    wp = w12.data(), xp = x12.data(), lg = 6;
  } else {
    wp = w20.data(), xp = x20.data(), lg = 10;
  }

  double h = dh;
  double k = dk;
  double hk = h * k;
  double bvn = 0.0;
  if (ar < 0.925) {
    const double hs = (h * h + k * k) / 2.0;
    const double asr = std::asin(r) / 2.0;
    for (std::size_t i = 0; i < lg; ++i) {
      for (double sgn : {-1.0, 1.0}) {
        const double sn = std::sin(asr * (1.0 + sgn * xp[i]));
        bvn += wp[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      }
    }
    bvn = bvn * asr / kTwoPi + normal_cdf(-h) * normal_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (ar < 1.0) {
      const double as = 1.0 - r * r;
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 80.0;
      double asr = -(bs / as + hk) / 2.0;
      if (asr > -100.0)
        bvn = a * std::exp(asr) * (1.0 - c * (bs - as) * (1.0 - d * bs) / 3.0 + c * d * as * as);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        const double sp = std::sqrt(kTwoPi) * normal_cdf(-b / a);
        bvn -= std::exp(-hk / 2.0) * sp * b * (1.0 - c * bs * (1.0 - d * bs) / 3.0);
      }
      a /= 2.0;
      double acc = 0.0;
      for (std::size_t i = 0; i < lg; ++i) {
        for (double sgn : {-1.0, 1.0}) {
          const double xi = a * (1.0 + sgn * xp[i]);
          const double xs = xi * xi;
          const double asr_i = -(bs / xs + hk) / 2.0;
          if (asr_i <= -100.0) continue;
          const double sp = 1.0 + c * xs * (1.0 + 5.0 * d * xs);
          const double rs = std::sqrt(1.0 - xs);
          const double ep = std::exp(-(hk / 2.0) * xs / ((1.0 + rs) * (1.0 + rs))) / rs;
          acc += wp[i] * std::exp(asr_i) * (sp - ep);
        }
      }
      bvn = (a * acc - bvn) / kTwoPi;
    }
    if (r > 0.0) {
      bvn += normal_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double span = h < 0.0 ? normal_cdf(k) - normal_cdf(h) : normal_cdf(-h) - normal_cdf(-k);
      bvn = span - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

}  // namespace

double bivariate_normal_cdf(double h, double k, double r) {
  if (!(r >= -1.0 && r <= 1.0)) throw InvalidInput("bivariate normal correlation outside [-1, 1]");
  return bvn_upper(-h, -k, r);
}

QuadratureRule gauss_legendre_unit(std::size_t n) {
  if (n == 0) throw InvalidInput("quadrature rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const auto nd = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    // Newton iteration on P_n from the Tricomi initial guess.
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t m = 2; m <= n; ++m) {
        const auto md = static_cast<double>(m);
        const double p2 = ((2.0 * md - 1.0) * x * p1 - (md - 1.0) * p0) / md;
        p0 = p1;
        p1 = p2;
      }
      dp = nd * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Map [-1, 1] -> (0, 1), ascending nodes.
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.nodes[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

}  // namespace pdim
