#pragma once

#include <cstddef>
#include <vector>

namespace pdim {

double normal_pdf(double x);
double normal_cdf(double x);
// Inverse of normal_cdf on (0, 1).
double normal_quantile(double p);

// log K_1(x) for x > 0, K_1 the modified Bessel function of the second kind.
// Switches to the large-argument expansion where K_1 itself underflows.
double log_bessel_k1(double x);

// P(X <= h, Y <= k) for a standard bivariate normal with correlation r.
double bivariate_normal_cdf(double h, double k, double r);

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// n-point Gauss-Legendre rule mapped to (0, 1).
QuadratureRule gauss_legendre_unit(std::size_t n);

}  // namespace pdim
