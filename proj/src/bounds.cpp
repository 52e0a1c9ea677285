#include "pdim/bounds.hpp"

#include "pdim/error.hpp"
#include "pdim/gld.hpp"

#include <cmath>
#include <limits>

namespace pdim {

namespace {

using Index = Eigen::Index;

// Feasible weights from a Charnes-Cooper solution: points * b / u.
void recover_candidate(const Matrix& points, const Vector& b, double u,
                       const RatioObjective& obj, CellBound& out) {
  if (!(u > 1e-14)) return;
  Vector w = points * b / u;
  w = w.cwiseMax(0.0);
  const double s = w.sum();
  if (!(s > 0.0)) return;
  w /= s;
  out.candidate = std::move(w);
  out.candidate_value = obj.h(out.candidate);
}

// Rows sum_i b_i g_r(p_i) <= 1 for each tangent point r (columns of `at`).
Matrix tangent_rows(const Matrix& points, const Matrix& at, const RatioObjective& obj) {
  Matrix rows(at.cols(), points.cols());
  for (Index r = 0; r < at.cols(); ++r) {
    const auto [a, c] = obj.tangent(at.col(r));
    rows.row(r) = (a.transpose() * points).array() + c;
  }
  return rows;
}

CellBound solve_vertex_lp(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                          const Matrix& tangent_at) {
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  const Matrix& v = cell.vertices;
  const Index m = v.cols();
  LpProblem lp;
  lp.objective.resize(m + 1);
  lp.objective[0] = 0.0;
  for (Index i = 0; i < m; ++i) lp.objective[i + 1] = obj.f(v.col(i));
  lp.a_eq = Matrix::Ones(1, m + 1);
  lp.a_eq(0, 0) = -1.0;
  lp.b_eq = Vector::Zero(1);
  lp.a_ub = Matrix::Zero(tangent_at.cols(), m + 1);
  lp.a_ub.rightCols(m) = tangent_rows(v, tangent_at, obj);
  lp.b_ub = Vector::Ones(tangent_at.cols());
  lp.upper = Vector::Constant(m + 1, std::numeric_limits<double>::infinity());
  lp.upper[0] = 1.0 / alpha;

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal)
    throw NumericalFailure(std::string("bounding LP is ") + to_string(sol.status));
  CellBound out;
  out.upper_bound = sol.value;
  out.pivots = sol.pivots;
  recover_candidate(v, sol.x.tail(m), sol.x[0], obj, out);
  return out;
}

}  // namespace

std::pair<Vector, double> RatioObjective::tangent(const Vector& r) const {
  Vector grad;
  const double g_r = eval.fourth_moment_gradient(r, grad);
  return {grad, g_r - grad.dot(r)};
}

double alpha_floor(const MomentEvaluator& eval, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) throw InvalidInput("alpha safety must lie in (0, 1]");
  const auto n = static_cast<Index>(eval.n_assets());
  DescentOptions opts;
  opts.tol = 1e-10;
  const DescentResult r = projected_descent(
      [&eval](const Vector& w, Vector& g) { return eval.fourth_moment_gradient(w, g); },
      Vector::Constant(n, 1.0 / static_cast<double>(n)), opts);
  if (!r.converged) throw NumericalFailure("minimum of the fourth moment did not converge");
  return safety * r.value;
}

const char* to_string(BoundMode m) {
  switch (m) {
    case BoundMode::lp1: return "lp1";
    case BoundMode::lp2: return "lp2";
    case BoundMode::milp: return "milp";
  }
  return "unknown";
}

BoundMode parse_bound_mode(const std::string& s) {
  if (s == "lp1") return BoundMode::lp1;
  if (s == "lp2") return BoundMode::lp2;
  if (s == "milp") return BoundMode::milp;
  throw InvalidInput("unknown bound mode '" + s + "'");
}

CellBound bound_lp1(const SimplexCell& cell, const RatioObjective& obj, double alpha) {
  return solve_vertex_lp(cell, obj, alpha, cell.barycenter());
}

CellBound bound_lp2(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                    std::size_t n_c) {
  const Matrix cuts = cut_points(cell, n_c);
  Matrix at(cuts.rows(), cuts.cols() + 1);
  at.col(0) = cell.barycenter();
  at.rightCols(cuts.cols()) = cuts;
  return solve_vertex_lp(cell, obj, alpha, at);
}

CellBound bound_milp(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                     const BoundOptions& opts) {
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  const BarycentricSubdivision sub = barycentric_points(cell);
  const Matrix& p = sub.points;
  const Index np = p.cols();
  const auto nj = static_cast<Index>(sub.simplices.size());
  // Variables: u | b (np) | z (nj) | q (nj).
  const Index ib = 1, iz = 1 + np, iq = 1 + np + nj, nv = 1 + np + 2 * nj;

  Matrix at = cell.barycenter();
  if (opts.milp_cuts) {
    const Matrix cuts = cut_points(cell, opts.n_c);
    Matrix all(cuts.rows(), cuts.cols() + 1);
    all.col(0) = at.col(0);
    all.rightCols(cuts.cols()) = cuts;
    at = std::move(all);
  }
  const Index n_tan = at.cols();

  MilpProblem milp;
  LpProblem& lp = milp.lp;
  lp.objective = Vector::Zero(nv);
  for (Index i = 0; i < np; ++i) lp.objective[ib + i] = obj.f(p.col(i));

  lp.a_eq = Matrix::Zero(2, nv);
  lp.a_eq(0, 0) = -1.0;
  lp.a_eq.block(0, ib, 1, np).setOnes();
  lp.a_eq.block(1, iq, 1, nj).setOnes();
  lp.b_eq = Vector::Ones(2);
  lp.b_eq[0] = 0.0;

  const Index rows = n_tan + np + 3 * nj;
  lp.a_ub = Matrix::Zero(rows, nv);
  lp.b_ub = Vector::Zero(rows);
  lp.a_ub.block(0, ib, n_tan, np) = tangent_rows(p, at, obj);
  lp.b_ub.head(n_tan).setOnes();
  Index r = n_tan;
  // b_i <= sum of z_j over subsimplices containing point i.
  for (Index i = 0; i < np; ++i, ++r) {
    lp.a_ub(r, ib + i) = 1.0;
    for (Index j = 0; j < nj; ++j)
      for (std::size_t pt : sub.simplices[static_cast<std::size_t>(j)])
        if (static_cast<Index>(pt) == i) lp.a_ub(r, iz + j) = -1.0;
  }
  const double inv_alpha = 1.0 / alpha;
  for (Index j = 0; j < nj; ++j) {
    // z_j <= q_j / alpha
    lp.a_ub(r, iz + j) = 1.0;
    lp.a_ub(r, iq + j) = -inv_alpha;
    ++r;
    // z_j <= u
    lp.a_ub(r, iz + j) = 1.0;
    lp.a_ub(r, 0) = -1.0;
    ++r;
    // z_j >= u - (1 - q_j) / alpha
    lp.a_ub(r, 0) = 1.0;
    lp.a_ub(r, iz + j) = -1.0;
    lp.a_ub(r, iq + j) = inv_alpha;
    lp.b_ub[r] = inv_alpha;
    ++r;
  }
  lp.upper = Vector::Constant(nv, std::numeric_limits<double>::infinity());
  lp.upper[0] = inv_alpha;
  for (Index j = 0; j < nj; ++j) milp.binaries.push_back(static_cast<std::size_t>(iq + j));

  const MilpSolution sol = solve_milp(milp, opts.milp);
  if (sol.status != LpStatus::optimal)
    throw NumericalFailure(std::string("bounding MILP is ") + to_string(sol.status));
  CellBound out;
  out.upper_bound = sol.value;
  out.pivots = sol.pivots;
  out.nodes = sol.nodes;
  recover_candidate(p, sol.x.segment(ib, np), sol.x[0], obj, out);
  return out;
}

CellBound compute_bound(const SimplexCell& cell, const RatioObjective& obj, double alpha,
                        const BoundOptions& opts) {
  switch (opts.mode) {
    case BoundMode::lp1: return bound_lp1(cell, obj, alpha);
    case BoundMode::lp2: return bound_lp2(cell, obj, alpha, opts.n_c);
    case BoundMode::milp: return bound_milp(cell, obj, alpha, opts);
  }
  throw InvalidInput("unknown bound mode");
}

}  // namespace pdim
