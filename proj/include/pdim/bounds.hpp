#pragma once

#include "pdim/comoments.hpp"
#include "pdim/lp.hpp"
#include "pdim/simplex_cells.hpp"

#include <cstddef>
#include <string>

namespace pdim {

// Objective pieces of h(w) = f(w) / g(w), f = (w'M2w)^2, g = mu4.
struct RatioObjective {
  explicit RatioObjective(const MomentEvaluator& eval) : eval(eval) {}

  double f(const Vector& w) const {
    const double v = eval.variance(w);
    return v * v;
  }
  double g(const Vector& w) const { return eval.fourth_moment(w); }
  double h(const Vector& w) const { return f(w) / g(w); }
  // Coefficients (a, c) of the tangent plane of g at r: g_r(w) = a'w + c.
  std::pair<Vector, double> tangent(const Vector& r) const;

  const MomentEvaluator& eval;
};

// safety * min of g over the weight simplex (projected gradient to 1e-10).
// Throws NumericalFailure when the descent does not converge.
double alpha_floor(const MomentEvaluator& eval, double safety = 0.999);

enum class BoundMode { lp1, lp2, milp };

const char* to_string(BoundMode m);
BoundMode parse_bound_mode(const std::string& s);

struct BoundOptions {
  BoundMode mode = BoundMode::lp2;
  std::size_t n_c = 1;
  // Adds the LP2 tangent cuts to the MILP.
  bool milp_cuts = true;
  MilpOptions milp;
};

struct CellBound {
  double upper_bound = 0.0;
  // Feasible point recovered from the LP solution (empty if none) and h there.
  Vector candidate;
  double candidate_value = 0.0;
  std::size_t pivots = 0;
  std::size_t nodes = 0;
};

CellBound bound_lp1(const SimplexCell& cell, const RatioObjective& obj, double alpha);
CellBound bound_lp2(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                    std::size_t n_c);
CellBound bound_milp(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                     const BoundOptions& opts = {});

CellBound compute_bound(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                        const BoundOptions& opts);

}  // namespace pdim
