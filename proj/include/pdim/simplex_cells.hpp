#pragma once

#include "pdim/types.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace pdim {

// One simplex of the branch-and-bound partition.  Column i of `vertices` is
// the i-th vertex, a point of the weight simplex.
struct SimplexCell {
  Matrix vertices;
  double upper_bound = 0.0;
  std::size_t depth = 0;
  std::size_t id = 0;

  std::size_t n_vertices() const { return static_cast<std::size_t>(vertices.cols()); }
  Vector barycenter() const { return vertices.rowwise().mean(); }
  double longest_edge() const;
  double shortest_edge() const;
};

// The whole weight simplex: vertices e_1..e_N.
SimplexCell root_cell(std::size_t n);

// |det V|: volume relative to the full weight simplex.
double relative_volume(const SimplexCell& cell);

// Splits a longest edge at its midpoint.  Ties go to the lexicographically
// smallest vertex pair; the first child replaces the lower-index endpoint.
// Children inherit the parent's upper bound and get depth + 1; ids are left
// for the caller.  Throws InvalidInput when the shortest edge is below 1e-12.
std::pair<SimplexCell, SimplexCell> bisect(const SimplexCell& cell);

// Barycenters of all nonempty vertex subsets, indexed by bitmask - 1, and
// the (n+1)! chains that form the full barycentric subdivision.
struct BarycentricSubdivision {
  Matrix points;                            // N x (2^n - 1)
  std::vector<std::vector<std::size_t>> simplices;  // point indices per subsimplex
};

inline constexpr std::size_t kMaxSubdivisionVertices = 6;

// Throws InvalidInput when the cell has more than 6 vertices.
BarycentricSubdivision barycentric_points(const SimplexCell& cell);
std::vector<SimplexCell> barycentric_subdivide(const SimplexCell& cell);

// Vertices, then (j/n_c) v^i + (1 - j/n_c) v_hat for j = 1..n_c-1 and each
// vertex i.  Returns N x (n_vertices * n_c).
Matrix cut_points(const SimplexCell& cell, std::size_t n_c);

}  // namespace pdim
