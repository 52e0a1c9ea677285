#include "pdim/lp.hpp"

#include "pdim/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace pdim {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

using Index = Eigen::Index;

// Standard form: A y = b, y >= 0, b >= 0.
struct StandardForm {
  Matrix a;
  Vector b;
  Index n_struct = 0;
  Index n_cols = 0;     // structural + slack + artificial
  Index first_art = 0;  // artificial columns are [first_art, n_cols)
  std::vector<Index> start_basis;
};

StandardForm standardize(const LpProblem& p, const Vector& lower) {
  const Index n = p.objective.size();
  const Index m_ub = p.a_ub.rows();
  const Index m_eq = p.a_eq.rows();
  std::vector<Index> bounded;
  if (p.upper.size() > 0)
    for (Index j = 0; j < n; ++j)
      if (std::isfinite(p.upper[j])) bounded.push_back(j);
  const Index m_bnd = static_cast<Index>(bounded.size());
  const Index m_le = m_ub + m_bnd;
  const Index m = m_le + m_eq;

  Matrix rows = Matrix::Zero(m, n);
  Vector rhs(m);
  if (m_ub > 0) {
    rows.topRows(m_ub) = p.a_ub;
    rhs.head(m_ub) = p.b_ub - p.a_ub * lower;
  }
  for (Index r = 0; r < m_bnd; ++r) {
    const Index j = bounded[static_cast<std::size_t>(r)];
    rows(m_ub + r, j) = 1.0;
    rhs[m_ub + r] = p.upper[j] - lower[j];
  }
  if (m_eq > 0) {
    rows.bottomRows(m_eq) = p.a_eq;
    rhs.tail(m_eq) = p.b_eq - p.a_eq * lower;
  }

  // An artificial is needed for equality rows and for <= rows with b < 0.
  std::vector<char> needs_art(static_cast<std::size_t>(m), 0);
  Index n_art = 0;
  for (Index r = 0; r < m; ++r) {
    if (r >= m_le || rhs[r] < 0.0) {
      needs_art[static_cast<std::size_t>(r)] = 1;
      ++n_art;
    }
  }

  StandardForm sf;
  sf.n_struct = n;
  sf.first_art = n + m_le;
  sf.n_cols = sf.first_art + n_art;
  sf.a = Matrix::Zero(m, sf.n_cols);
  sf.b = rhs;
  sf.a.leftCols(n) = rows;
  for (Index r = 0; r < m_le; ++r) sf.a(r, n + r) = 1.0;
  sf.start_basis.resize(static_cast<std::size_t>(m));
  Index art = sf.first_art;
  for (Index r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) {
      sf.a.row(r) *= -1.0;
      sf.b[r] = -rhs[r];
    }
    if (needs_art[static_cast<std::size_t>(r)]) {
      sf.a(r, art) = 1.0;
      sf.start_basis[static_cast<std::size_t>(r)] = art++;
    } else {
      sf.start_basis[static_cast<std::size_t>(r)] = n + r;
    }
  }
  return sf;
}

class RevisedSimplex {
 public:
  RevisedSimplex(const StandardForm& sf, const LpOptions& opts)
      : a_(sf.a), b_(sf.b), opts_(opts), basis_(sf.start_basis),
        is_basic_(static_cast<std::size_t>(sf.n_cols), 0) {
    for (Index j : basis_) is_basic_[static_cast<std::size_t>(j)] = 1;
    degenerate_limit_ = opts_.degenerate_per_row * std::max<std::size_t>(1, basis_.size());
    refactor();
  }

  enum class Outcome { optimal, unbounded };

  // Maximizes cost'y over columns j < enter_limit (others never enter).
  Outcome run(const Vector& cost, Index enter_limit) {
    const Index m = static_cast<Index>(basis_.size());
    Vector cb(m), alpha(m);
    while (true) {
      for (Index i = 0; i < m; ++i) cb[i] = cost[basis_[static_cast<std::size_t>(i)]];
      const Vector y = binv_.transpose() * cb;

      Index enter = -1;
      double best = opts_.optimality_tol;
      for (Index j = 0; j < enter_limit; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        const double d = cost[j] - y.dot(a_.col(j));
        if (d > best) {
          enter = j;
          if (bland_) break;
          best = d;
        }
      }
      if (enter < 0) return Outcome::optimal;

      alpha.noalias() = binv_ * a_.col(enter);
      Index leave = -1;
      double ratio = kInf;
      for (Index i = 0; i < m; ++i) {
        if (alpha[i] <= kPivotTol) continue;
        const double t = std::max(xb_[i], 0.0) / alpha[i];
        if (leave < 0 || t < ratio - 1e-12 * (1.0 + ratio)) {
          leave = i;
          ratio = t;
        } else if (t <= ratio + 1e-12 * (1.0 + ratio)) {
          const auto bi = basis_[static_cast<std::size_t>(i)];
          const auto bl = basis_[static_cast<std::size_t>(leave)];
          const bool better = bland_ ? bi < bl
                                     : (alpha[i] > alpha[leave] ||
                                        (alpha[i] == alpha[leave] && bi < bl));
          if (better) {
            leave = i;
            ratio = std::min(ratio, t);
          }
        }
      }
      if (leave < 0) return Outcome::unbounded;
      if (ratio <= 1e-12 && ++degenerate_ >= degenerate_limit_) bland_ = true;
      pivot(leave, enter, alpha);
    }
  }

  // Pivots zero-level artificial columns out of the basis where possible.
  void drive_out_artificials(Index first_art) {
    const Index m = static_cast<Index>(basis_.size());
    for (Index r = 0; r < m; ++r) {
      if (basis_[static_cast<std::size_t>(r)] < first_art) continue;
      const Vector row = binv_.row(r) * a_.leftCols(first_art);
      Index enter = -1;
      double best = kPivotTol;
      for (Index j = 0; j < first_art; ++j) {
        if (is_basic_[static_cast<std::size_t>(j)]) continue;
        if (std::abs(row[j]) > best) {
          best = std::abs(row[j]);
          enter = j;
        }
      }
      if (enter < 0) continue;  // redundant row
      const Vector alpha = binv_ * a_.col(enter);
      xb_[r] = 0.0;
      pivot(r, enter, alpha);
    }
  }

  void refactor() {
    const Index m = static_cast<Index>(basis_.size());
    Matrix basis_matrix(m, m);
    for (Index i = 0; i < m; ++i) basis_matrix.col(i) = a_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Matrix> lu(basis_matrix);
    if (!lu.isInvertible()) {
      std::ostringstream os;
      os << "singular simplex basis (" << m << " rows, rank " << lu.rank() << ", after "
         << pivots_ << " pivots)";
      throw NumericalFailure(os.str());
    }
    binv_ = lu.inverse();
    xb_ = binv_ * b_;
    for (Index i = 0; i < m; ++i)
      if (xb_[i] < 0.0 && xb_[i] > -opts_.feasibility_tol) xb_[i] = 0.0;
    since_refactor_ = 0;
  }

  Vector primal(Index n_cols) const {
    Vector y = Vector::Zero(n_cols);
    for (std::size_t i = 0; i < basis_.size(); ++i)
      y[basis_[i]] = std::max(xb_[static_cast<Index>(i)], 0.0);
    return y;
  }

  std::size_t pivots() const { return pivots_; }

 private:
  void pivot(Index r, Index enter, const Vector& alpha) {
    if (++pivots_ > opts_.max_pivots)
      throw NumericalFailure("simplex pivot budget exhausted");
    const double ar = alpha[r];
    const double theta = xb_[r] / ar;
    binv_.row(r) /= ar;
    for (Index i = 0; i < binv_.rows(); ++i) {
      if (i == r || alpha[i] == 0.0) continue;
      binv_.row(i) -= alpha[i] * binv_.row(r);
      xb_[i] -= alpha[i] * theta;
    }
    xb_[r] = theta;
    is_basic_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(r)])] = 0;
    is_basic_[static_cast<std::size_t>(enter)] = 1;
    basis_[static_cast<std::size_t>(r)] = enter;
    if (++since_refactor_ >= opts_.refactor_every) refactor();
  }

  const Matrix& a_;
  const Vector& b_;
  LpOptions opts_;
  std::vector<Index> basis_;
  std::vector<char> is_basic_;
  Matrix binv_;
  Vector xb_;
  std::size_t pivots_ = 0;
  std::size_t since_refactor_ = 0;
  std::size_t degenerate_ = 0;
  std::size_t degenerate_limit_ = 0;
  bool bland_ = false;
};

}  // namespace

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
  }
  return "unknown";
}

void LpProblem::validate() const {
  const Index n = objective.size();
  if (n == 0) throw InvalidInput("LP needs at least one variable");
  if (!objective.allFinite()) throw InvalidInput("LP objective has non-finite entries");
  if (a_eq.rows() != b_eq.size() || (a_eq.rows() > 0 && a_eq.cols() != n))
    throw InvalidInput("LP equality block has inconsistent dimensions");
  if (a_ub.rows() != b_ub.size() || (a_ub.rows() > 0 && a_ub.cols() != n))
    throw InvalidInput("LP inequality block has inconsistent dimensions");
  if (!a_eq.allFinite() || !b_eq.allFinite() || !a_ub.allFinite() || !b_ub.allFinite())
    throw InvalidInput("LP constraints have non-finite entries");
  if (lower.size() != 0 && lower.size() != n) throw InvalidInput("LP lower bounds have wrong size");
  if (upper.size() != 0 && upper.size() != n) throw InvalidInput("LP upper bounds have wrong size");
  if (lower.size() != 0 && !lower.allFinite()) throw InvalidInput("LP lower bounds must be finite");
  for (Index j = 0; j < upper.size(); ++j) {
    if (std::isnan(upper[j]) || upper[j] == -kInf)
      throw InvalidInput("LP upper bounds must be finite or +infinity");
    const double lo = lower.size() ? lower[j] : 0.0;
    if (upper[j] < lo) throw InvalidInput("LP upper bound below lower bound");
  }
}

double LpProblem::max_violation(const Vector& x) const {
  double v = 0.0;
  if (a_eq.rows() > 0) v = std::max(v, (a_eq * x - b_eq).cwiseAbs().maxCoeff());
  if (a_ub.rows() > 0) v = std::max(v, (a_ub * x - b_ub).maxCoeff());
  for (Index j = 0; j < x.size(); ++j) {
    const double lo = lower.size() ? lower[j] : 0.0;
    v = std::max(v, lo - x[j]);
    if (upper.size()) v = std::max(v, x[j] - upper[j]);
  }
  return v;
}

LpSolution solve_lp(const LpProblem& p, const LpOptions& opts) {
  p.validate();
  const Index n = p.objective.size();
  const Vector lower = p.lower.size() ? p.lower : Vector::Zero(n);
  const StandardForm sf = standardize(p, lower);
  RevisedSimplex simplex(sf, opts);

  LpSolution sol;
  if (sf.first_art < sf.n_cols) {
    Vector phase1 = Vector::Zero(sf.n_cols);
    phase1.tail(sf.n_cols - sf.first_art).setConstant(-1.0);
    simplex.run(phase1, sf.n_cols);
    simplex.refactor();
    const Vector y = simplex.primal(sf.n_cols);
    const double infeas = y.tail(sf.n_cols - sf.first_art).sum();
    const double scale = std::max(1.0, sf.b.cwiseAbs().maxCoeff());
    if (infeas > opts.feasibility_tol * scale) {
      sol.status = LpStatus::infeasible;
      sol.pivots = simplex.pivots();
      return sol;
    }
    simplex.drive_out_artificials(sf.first_art);
  }

  Vector cost = Vector::Zero(sf.n_cols);
  cost.head(n) = p.objective;
  const auto outcome = simplex.run(cost, sf.first_art);
  sol.pivots = simplex.pivots();
  if (outcome == RevisedSimplex::Outcome::unbounded) {
    sol.status = LpStatus::unbounded;
    return sol;
  }
  simplex.refactor();
  const Vector y = simplex.primal(sf.n_cols);
  sol.status = LpStatus::optimal;
  sol.x = lower + y.head(n);
  sol.value = p.objective.dot(sol.x);
  return sol;
}

namespace {

struct Node {
  Vector lower;
  Vector upper;
  double bound;
};

}  // namespace

MilpSolution solve_milp(const MilpProblem& p, const MilpOptions& opts) {
  p.lp.validate();
  const Index n = p.lp.objective.size();
  if (p.binaries.size() > opts.max_binaries) {
    std::ostringstream os;
    os << "MILP has " << p.binaries.size() << " binaries, above the limit of "
       << opts.max_binaries;
    throw InvalidInput(os.str());
  }
  for (auto j : p.binaries)
    if (static_cast<Index>(j) >= n) throw InvalidInput("binary index out of range");

  LpProblem base = p.lp;
  if (base.lower.size() == 0) base.lower = Vector::Zero(n);
  if (base.upper.size() == 0) base.upper = Vector::Constant(n, kInf);
  for (auto j : p.binaries) {
    const auto i = static_cast<Index>(j);
    base.lower[i] = std::max(base.lower[i], 0.0);
    base.upper[i] = std::min(base.upper[i], 1.0);
  }

  MilpSolution best;
  best.status = LpStatus::infeasible;
  double incumbent = -kInf;
  std::size_t total_pivots = 0;

  LpProblem work = base;
  auto relax = [&](const Vector& lo, const Vector& hi) {
    work.lower = lo;
    work.upper = hi;
    ++best.nodes;
    LpSolution s = solve_lp(work, opts.lp);
    total_pivots += s.pivots;
    return s;
  };

  auto most_fractional = [&](const Vector& x) {
    Index pick = -1;
    double frac_best = opts.integrality_tol;
    for (auto j : p.binaries) {
      const auto i = static_cast<Index>(j);
      const double f = std::min(x[i] - std::floor(x[i]), std::ceil(x[i]) - x[i]);
      if (f > frac_best + 1e-15) {
        frac_best = f;
        pick = i;
      }
    }
    return pick;
  };

  std::vector<std::pair<Node, LpSolution>> stack;
  {
    LpSolution root = relax(base.lower, base.upper);
    if (root.status == LpStatus::unbounded) {
      best.status = LpStatus::unbounded;
      best.pivots = total_pivots;
      return best;
    }
    if (root.status == LpStatus::optimal)
      stack.push_back({Node{base.lower, base.upper, root.value}, std::move(root)});
  }

  while (!stack.empty()) {
    auto [node, sol] = std::move(stack.back());
    stack.pop_back();
    if (node.bound <= incumbent) continue;
    const Index j = most_fractional(sol.x);
    if (j < 0) {
      incumbent = sol.value;
      static_cast<LpSolution&>(best) = sol;
      best.status = LpStatus::optimal;
      for (auto b : p.binaries) {
        const auto i = static_cast<Index>(b);
        best.x[i] = std::round(best.x[i]);
      }
      continue;
    }
    // Children q_j = 0 and q_j = 1; the one with the better bound is explored
    // first, q_j = 1 on ties.
    std::vector<std::pair<Node, LpSolution>> kids;
    for (double v : {1.0, 0.0}) {
      Node child{node.lower, node.upper, 0.0};
      child.lower[j] = v;
      child.upper[j] = v;
      LpSolution s = relax(child.lower, child.upper);
      if (s.status != LpStatus::optimal) continue;
      child.bound = std::min(s.value, node.bound);
      if (child.bound <= incumbent) continue;
      kids.push_back({std::move(child), std::move(s)});
    }
    if (kids.size() == 2 && kids[1].first.bound > kids[0].first.bound)
      std::swap(kids[0], kids[1]);
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) stack.push_back(std::move(*it));
  }
  best.pivots = total_pivots;
  return best;
}

}  // namespace pdim
