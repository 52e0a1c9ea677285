#pragma once

#include "pdim/types.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace pdim {

// maximize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
// Empty `lower` means all zeros, empty `upper` means no upper bounds.  Lower
// bounds must be finite; upper entries may be +infinity.
struct LpProblem {
  Vector objective;
  Matrix a_eq;
  Vector b_eq;
  Matrix a_ub;
  Vector b_ub;
  Vector lower;
  Vector upper;

  std::size_t n_vars() const { return static_cast<std::size_t>(objective.size()); }
  // Throws InvalidInput on shape mismatches or non-finite coefficients.
  void validate() const;
  // Largest violation of any constraint or bound at x.
  double max_violation(const Vector& x) const;
};

enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double value = 0.0;
  Vector x;
  std::size_t pivots = 0;
};

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  std::size_t refactor_every = 64;
  // Bland's rule takes over after this many degenerate pivots per row.
  std::size_t degenerate_per_row = 50;
  std::size_t max_pivots = 200000;
};

// Dense revised primal simplex with a two-phase start.  Throws
// NumericalFailure on a singular basis or when the pivot budget runs out.
LpSolution solve_lp(const LpProblem& p, const LpOptions& opts = {});

struct MilpProblem {
  LpProblem lp;
  // Indices of variables restricted to {0, 1}.
  std::vector<std::size_t> binaries;
};

struct MilpOptions {
  LpOptions lp;
  std::size_t max_binaries = 24;
  double integrality_tol = 1e-6;
};

struct MilpSolution : LpSolution {
  std::size_t nodes = 0;
};

// Depth-first branch and bound on the most fractional binary.  Throws
// InvalidInput when there are more binaries than max_binaries.
MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opts = {});

}  // namespace pdim
