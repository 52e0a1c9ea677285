#include "pdim/types.hpp"

#include "pdim/error.hpp"

#include <cmath>
#include <sstream>

namespace pdim {

bool Weights::feasible(const Vector& w, double tol) {
  if (w.size() == 0 || !w.allFinite()) return false;
  const double scale = static_cast<double>(w.size());
  return w.minCoeff() >= -tol * scale && std::abs(w.sum() - 1.0) <= tol * scale;
}

Weights::Weights(Vector w) : w_(std::move(w)) {
  if (!feasible(w_)) {
    std::ostringstream os;
    os << "weights are not on the simplex (sum " << (w_.size() ? w_.sum() : 0.0) << ", min "
       << (w_.size() ? w_.minCoeff() : 0.0) << ")";
    throw InvalidInput(os.str());
  }
}

Weights Weights::equal(std::size_t n) {
  return Weights(Vector::Constant(static_cast<Eigen::Index>(n), 1.0 / static_cast<double>(n)));
}

Weights Weights::unit(std::size_t n, std::size_t i) {
  Vector w = Vector::Zero(static_cast<Eigen::Index>(n));
  w[static_cast<Eigen::Index>(i)] = 1.0;
  return Weights(std::move(w));
}

}  // namespace pdim
