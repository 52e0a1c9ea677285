#pragma once

#include "pdim/types.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pdim {

// T observations (rows) of N asset returns (columns).
struct ReturnSample {
  Matrix values;
  std::vector<std::string> asset_names;

  std::size_t n_obs() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t n_assets() const { return static_cast<std::size_t>(values.cols()); }

  // Throws InvalidInput unless T >= 2, N >= 1, names match N and all entries are finite.
  void validate() const;
};

struct UniqueCounts {
  std::size_t third;
  std::size_t fourth;
};

// (n(n+1)(n+2)/6, n(n+1)(n+2)(n+3)/24): distinct entries of M3 and M4.
UniqueCounts unique_element_counts(std::size_t n);

// Position of a sorted index tuple in the unique-element arrays.  Indices may
// be passed in any order; they are sorted first.
std::size_t unique_index3(std::size_t i, std::size_t j, std::size_t k);
std::size_t unique_index4(std::size_t i, std::size_t j, std::size_t k, std::size_t l);

// Sample covariance and the third and fourth co-moment matrices.
//
// Only sorted-index co-moments are stored (s_ijk with i<=j<=k, k_ijkl with
// i<=j<=k<=l); the flattened N x N^2 and N x N^3 block matrices are built on
// first request and shared between copies.  All moments are central and use
// the divide-by-T estimator.
class CoMomentSet {
 public:
  // Validates positive definiteness of `m2` (Cholesky plus an eigenvalue
  // ratio check) and the unique-array lengths.
  CoMomentSet(Vector mean, Matrix m2, std::vector<double> m3_unique,
              std::vector<double> m4_unique, std::size_t n_obs);

  std::size_t n_assets() const { return static_cast<std::size_t>(mean_.size()); }
  std::size_t n_obs() const { return n_obs_; }
  const Vector& mean() const { return mean_; }
  const Matrix& m2() const { return m2_; }
  const std::vector<double>& m3_unique() const { return m3u_; }
  const std::vector<double>& m4_unique() const { return m4u_; }

  double s(std::size_t i, std::size_t j, std::size_t k) const {
    return m3u_[unique_index3(i, j, k)];
  }
  double k(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return m4u_[unique_index4(i, j, k, l)];
  }

  // Block layout: M3(i, j*N + k) = s_ijk, M4(i, j*N^2 + k*N + l) = k_ijkl.
  const Matrix& m3() const;
  const Matrix& m4() const;

 private:
  struct DenseCache;

  Vector mean_;
  Matrix m2_;
  std::vector<double> m3u_;
  std::vector<double> m4u_;
  std::size_t n_obs_;
  std::shared_ptr<DenseCache> cache_;
};

struct BuildOptions {
  // Rows per reduction chunk.  Chunk partial sums are combined in chunk
  // order, so the result does not depend on `threads`.
  std::size_t chunk_rows = 4096;
  unsigned threads = 1;
};

// Throws InvalidInput on non-finite data and NumericalFailure when the
// covariance is not positive definite.
CoMomentSet build_comoments(const ReturnSample& sample, const BuildOptions& opts = {});

struct PortfolioMoments {
  double variance;
  double mu3;
  double mu4;
};

// The evaluation functions below take raw weight vectors so that leverage
// (t * w) can be checked directly; they do not renormalize.
PortfolioMoments portfolio_moments(const Vector& w, const CoMomentSet& c);
double portfolio_kurtosis(const Vector& w, const CoMomentSet& c);
double portfolio_skewness(const Vector& w, const CoMomentSet& c);

struct MomentDerivatives {
  Vector grad_var;  // 2 M2 w
  Vector grad_mu3;  // 3 M3 (w (x) w)
  Vector grad_mu4;  // 4 M4 (w (x) w (x) w)
  Matrix hess_mu3;  // 6 M3 (w (x) I)
  Matrix hess_mu4;  // 12 M4 (w (x) w (x) I)
};

MomentDerivatives moment_derivatives(const Vector& w, const CoMomentSet& c);

// Gradient of mu4 / variance^2.
Vector kurtosis_gradient(const Vector& w, const CoMomentSet& c);

// Dense evaluator for the inner loops of the solvers.  Holds M2 and the
// symmetric half of M4 reshaped as an N(N+1)/2 x N^2 matrix, so one
// fourth-moment gradient costs about N^4/2 multiply-adds.
class MomentEvaluator {
 public:
  explicit MomentEvaluator(const CoMomentSet& c);

  std::size_t n_assets() const { return n_; }

  double variance(const Vector& w) const { return w.dot(m2_ * w); }
  double fourth_moment(const Vector& w) const;
  // Returns mu4 and writes 4 M4 (w (x) w (x) w) into `grad`.
  double fourth_moment_gradient(const Vector& w, Vector& grad) const;

  double kurtosis(const Vector& w) const;
  // Returns the kurtosis and writes its gradient into `grad`.
  double kurtosis_gradient(const Vector& w, Vector& grad) const;

  const Matrix& m2() const { return m2_; }

 private:
  // t(i,j) = sum_kl k_ijkl w_k w_l for i <= j, packed.
  void contract_pairs(const Vector& w, Vector& t) const;

  std::size_t n_;
  Matrix m2_;
  RowMatrix m4_half_;
  std::vector<std::array<std::uint32_t, 2>> pair_index_;
  mutable Vector kron_;
  mutable Vector t_;
};

}  // namespace pdim
