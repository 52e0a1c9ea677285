#pragma once

#include "pdim/comoments.hpp"
#include "pdim/nig.hpp"
#include "pdim/types.hpp"

#include <cstddef>
#include <cstdint>
#include <vector>

namespace pdim {

// Linear correlation of (X, Y) when the pair is joined by a Gaussian copula
// with parameter rho_in.  Evaluates the Hoeffding covariance integral after
// the substitution x = F_X^{-1}(u), y = F_Y^{-1}(v), with a tensor 64-node
// Gauss-Legendre rule on (0, 1)^2.
class CopulaCorrelation {
 public:
  static constexpr std::size_t kNodes = 64;

  CopulaCorrelation(const Margin& x, const Margin& y);

  // Throws InvalidInput unless -1 <= rho_in <= 1.
  double rho_out(double rho_in) const;

  // Bisection on [-1, 1] to `tol` in rho_in.  Throws InvalidInput when
  // `target` lies outside [rho_out(-1), rho_out(1)].
  double invert(double target, double tol = 1e-6) const;

 private:
  std::vector<double> weights_;
  std::vector<double> z_;        // Phi^{-1}(u_i)
  std::vector<double> phi_z_;    // Phi(z_i)
  std::vector<double> inv_fx_;   // 1 / f_X(F_X^{-1}(u_i))
  std::vector<double> inv_fy_;
  double scale_ = 1.0;           // 1 / sqrt(Var X Var Y)
};

double rho_out(double rho_in, const Margin& x, const Margin& y);

// Entry-wise inverse of rho_out.  The result is checked (not repaired) for
// positive definiteness; failure throws NumericalFailure with the smallest
// eigenvalue.
Matrix adjust_correlation(const Matrix& target, const std::vector<Margin>& margins,
                          double tol = 1e-6);

// N x N matrix with unit diagonal and `rho` elsewhere.
Matrix homogeneous_correlation(std::size_t n, double rho);

// Throws InvalidInput unless `r` is a symmetric unit-diagonal positive
// definite matrix of size n.
void validate_correlation(const Matrix& r, std::size_t n, const char* what);

struct MetaGaussianSpec {
  std::vector<Margin> margins;
  Matrix target_corr;
  Matrix input_corr;

  // Computes input_corr from the target via adjust_correlation.
  static MetaGaussianSpec make(std::vector<Margin> margins, Matrix target_corr);

  std::size_t n_assets() const { return margins.size(); }
  void validate() const;
};

struct SampleOptions {
  // Each block of rows draws from its own substream (seed, block index).
  std::size_t block_rows = 4096;
  unsigned threads = 1;
};

// T draws: Z ~ N(0, R_in), U = Phi(Z), X_i = F_i^{-1}(U_i).  Deterministic in
// (spec, T, seed) regardless of the thread count.
ReturnSample sample_meta_gaussian(const MetaGaussianSpec& spec, std::size_t t_obs,
                                  std::uint64_t seed, const SampleOptions& opts = {});

}  // namespace pdim
