#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace pdim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A point of the asset-weight simplex: nonnegative entries summing to one.
class Weights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  // Throws InvalidInput unless `w` is feasible within kSumTolerance
  // (scaled by the number of assets).
  explicit Weights(Vector w);

  static Weights equal(std::size_t n);
  static Weights unit(std::size_t n, std::size_t i);

  const Vector& vec() const { return w_; }
  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }

  // True when `w` satisfies the simplex constraints within `tol`.
  static bool feasible(const Vector& w, double tol = kSumTolerance);

 private:
  Vector w_;
};

}  // namespace pdim
