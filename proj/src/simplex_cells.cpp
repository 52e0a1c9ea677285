#include "pdim/simplex_cells.hpp"

#include "pdim/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <limits>
#include <numeric>

namespace pdim {

double SimplexCell::longest_edge() const {
  double best = 0.0;
  for (Eigen::Index i = 0; i < vertices.cols(); ++i)
    for (Eigen::Index j = i + 1; j < vertices.cols(); ++j)
      best = std::max(best, (vertices.col(i) - vertices.col(j)).norm());
  return best;
}

double SimplexCell::shortest_edge() const {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < vertices.cols(); ++i)
    for (Eigen::Index j = i + 1; j < vertices.cols(); ++j)
      best = std::min(best, (vertices.col(i) - vertices.col(j)).norm());
  return best;
}

SimplexCell root_cell(std::size_t n) {
  if (n == 0) throw InvalidInput("simplex needs at least one vertex");
  SimplexCell cell;
  const auto en = static_cast<Eigen::Index>(n);
  cell.vertices = Matrix::Identity(en, en);
  return cell;
}

double relative_volume(const SimplexCell& cell) {
  if (cell.vertices.rows() != cell.vertices.cols())
    throw InvalidInput("volume needs a full-dimensional cell");
  return std::abs(cell.vertices.determinant());
}

std::pair<SimplexCell, SimplexCell> bisect(const SimplexCell& cell) {
  const Eigen::Index m = cell.vertices.cols();
  if (m < 2) throw InvalidInput("cannot bisect a single point");
  if (cell.shortest_edge() < 1e-12) throw InvalidInput("cannot bisect a degenerate cell");
  Eigen::Index a = 0, b = 1;
  double longest = -1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const double len = (cell.vertices.col(i) - cell.vertices.col(j)).norm();
      // Lengths equal up to rounding count as ties; the first pair wins.
      if (len > longest * (1.0 + 1e-12)) {
        longest = len;
        a = i;
        b = j;
      }
    }
  }
  const Vector mid = 0.5 * (cell.vertices.col(a) + cell.vertices.col(b));
  SimplexCell first = cell;
  SimplexCell second = cell;
  first.vertices.col(a) = mid;
  second.vertices.col(b) = mid;
  first.depth = second.depth = cell.depth + 1;
  return {std::move(first), std::move(second)};
}

BarycentricSubdivision barycentric_points(const SimplexCell& cell) {
  const auto m = static_cast<std::size_t>(cell.vertices.cols());
  if (m == 0) throw InvalidInput("empty cell");
  if (m > kMaxSubdivisionVertices)
    throw InvalidInput("barycentric subdivision is limited to 6 vertices");
  const std::size_t n_points = (std::size_t{1} << m) - 1;
  BarycentricSubdivision out;
  out.points.resize(cell.vertices.rows(), static_cast<Eigen::Index>(n_points));
  for (std::size_t mask = 1; mask <= n_points; ++mask) {
    Vector p = Vector::Zero(cell.vertices.rows());
    int count = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::size_t{1} << i)) {
        p += cell.vertices.col(static_cast<Eigen::Index>(i));
        ++count;
      }
    }
    out.points.col(static_cast<Eigen::Index>(mask - 1)) = p / count;
  }
  std::vector<std::size_t> perm(m);
  std::iota(perm.begin(), perm.end(), 0);
  do {
    std::vector<std::size_t> chain;
    chain.reserve(m);
    std::size_t mask = 0;
    for (std::size_t i : perm) {
      mask |= std::size_t{1} << i;
      chain.push_back(mask - 1);
    }
    out.simplices.push_back(std::move(chain));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

std::vector<SimplexCell> barycentric_subdivide(const SimplexCell& cell) {
  const BarycentricSubdivision sub = barycentric_points(cell);
  std::vector<SimplexCell> out;
  out.reserve(sub.simplices.size());
  for (const auto& chain : sub.simplices) {
    SimplexCell child;
    child.vertices.resize(cell.vertices.rows(), static_cast<Eigen::Index>(chain.size()));
    for (std::size_t i = 0; i < chain.size(); ++i)
      child.vertices.col(static_cast<Eigen::Index>(i)) =
          sub.points.col(static_cast<Eigen::Index>(chain[i]));
    child.upper_bound = cell.upper_bound;
    child.depth = cell.depth + 1;
    out.push_back(std::move(child));
  }
  return out;
}

Matrix cut_points(const SimplexCell& cell, std::size_t n_c) {
  if (n_c == 0) throw InvalidInput("n_c must be at least 1");
  const Eigen::Index m = cell.vertices.cols();
  const Vector center = cell.barycenter();
  Matrix pts(cell.vertices.rows(), m * static_cast<Eigen::Index>(n_c));
  pts.leftCols(m) = cell.vertices;
  Eigen::Index col = m;
  for (std::size_t j = 1; j < n_c; ++j) {
    const double t = static_cast<double>(j) / static_cast<double>(n_c);
    for (Eigen::Index i = 0; i < m; ++i) pts.col(col++) = t * cell.vertices.col(i) + (1.0 - t) * center;
  }
  return pts;
}

}  // namespace pdim
