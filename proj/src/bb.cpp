#include "pdim/bb.hpp"

#include "pdim/error.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <map>

namespace pdim {

void BbConfig::validate() const {
  if (!(rho_tol >= 0.0 && rho_tol < 1.0)) throw InvalidInput("rho_tol must lie in [0, 1)");
  if (bounds.n_c == 0) throw InvalidInput("n_c must be at least 1");
  if (!(alpha_safety > 0.0 && alpha_safety <= 1.0))
    throw InvalidInput("alpha_safety must lie in (0, 1]");
  if (!(max_seconds > 0.0)) throw InvalidInput("max_seconds must be positive");
}

const char* to_string(BbStatus s) {
  switch (s) {
    case BbStatus::optimal: return "optimal";
    case BbStatus::iteration_limit: return "iteration_limit";
    case BbStatus::time_limit: return "time_limit";
  }
  return "unknown";
}

namespace {

// Largest bound first, then oldest cell.
struct CellKey {
  double ub;
  std::size_t id;
  bool operator<(const CellKey& o) const { return ub > o.ub || (ub == o.ub && id < o.id); }
};

}  // namespace

BbResult solve(const CoMomentSet& c, const BbConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const std::size_t n = c.n_assets();
  const MomentEvaluator eval(c);
  const RatioObjective obj(eval);

  BbResult res;
  if (n == 1) {
    res.incumbent = Vector::Ones(1);
    res.incumbent_value = obj.h(res.incumbent);
    res.kurtosis = 1.0 / res.incumbent_value;
    res.lower_bound = res.upper_bound = res.root_upper_bound = res.incumbent_value;
    res.lb_history = {res.incumbent_value};
    res.ub_history = {res.incumbent_value};
    res.cells_created = 1;
    res.cells_fathomed = 1;
    res.trace.push_back({0, res.lower_bound, res.upper_bound, 0, 1, 1, 1.0});
    return res;
  }

  res.alpha = alpha_floor(eval, cfg.alpha_safety);
  const double keep = 1.0 - cfg.rho_tol;
  double lb = -std::numeric_limits<double>::infinity();
  double ub = std::numeric_limits<double>::infinity();
  double fathomed_ub = -std::numeric_limits<double>::infinity();

  auto offer = [&](const Vector& w, double value) {
    if (w.size() > 0 && value > lb) {
      lb = value;
      res.incumbent = w;
    }
  };
  auto bound_cell = [&](SimplexCell& cell) {
    const CellBound b = compute_bound(cell, obj, res.alpha, cfg.bounds);
    res.lp_pivots += b.pivots;
    res.milp_nodes += b.nodes;
    return b;
  };

  std::map<CellKey, SimplexCell> active;
  auto fathom = [&](const SimplexCell& cell) {
    fathomed_ub = std::max(fathomed_ub, cell.upper_bound);
    ++res.cells_fathomed;
    if (cfg.on_fathom) cfg.on_fathom(cell, lb);
  };
  auto sweep = [&] {
    while (!active.empty()) {
      auto last = std::prev(active.end());
      if (keep * last->first.ub > lb) break;
      fathom(last->second);
      active.erase(last);
    }
  };
  auto record = [&](std::size_t k) {
    double top = active.empty() ? -std::numeric_limits<double>::infinity()
                                : active.begin()->first.ub;
    ub = std::max(std::min(ub, std::max(top, fathomed_ub)), lb);
    res.lb_history.push_back(lb);
    res.ub_history.push_back(ub);
    res.trace.push_back({k, lb, ub, active.size(), res.cells_created, res.cells_fathomed,
                         static_cast<double>(res.cells_fathomed) /
                             static_cast<double>(res.cells_created)});
  };

  {
    SimplexCell root = root_cell(n);
    root.id = res.cells_created++;
    const CellBound b = bound_cell(root);
    root.upper_bound = b.upper_bound;
    res.root_upper_bound = b.upper_bound;
    offer(b.candidate, b.candidate_value);
    const Vector center = root.barycenter();
    offer(center, obj.h(center));
    active.emplace(CellKey{root.upper_bound, root.id}, std::move(root));
    sweep();
    record(0);
  }

  res.status = BbStatus::optimal;
  std::size_t k = 0;
  while (!active.empty()) {
    if (k >= cfg.max_iterations) {
      res.status = BbStatus::iteration_limit;
      break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > cfg.max_seconds) {
      res.status = BbStatus::time_limit;
      break;
    }
    auto top = active.begin();
    SimplexCell parent = std::move(top->second);
    active.erase(top);
    if (keep * parent.upper_bound <= lb) {
      fathom(parent);
      continue;
    }
    ++k;
    auto [left, right] = bisect(parent);
    left.id = res.cells_created++;
    right.id = res.cells_created++;
    CellBound bl, br;
    if (cfg.threads >= 2) {
      const MomentEvaluator eval2 = eval;
      const RatioObjective obj2(eval2);
      auto fut = std::async(std::launch::async, [&] {
        return compute_bound(right, obj2, res.alpha, cfg.bounds);
      });
      bl = compute_bound(left, obj, res.alpha, cfg.bounds);
      br = fut.get();
      res.lp_pivots += bl.pivots + br.pivots;
      res.milp_nodes += bl.nodes + br.nodes;
    } else {
      bl = bound_cell(left);
      br = bound_cell(right);
    }
    left.upper_bound = std::min(bl.upper_bound, parent.upper_bound);
    right.upper_bound = std::min(br.upper_bound, parent.upper_bound);
    offer(bl.candidate, bl.candidate_value);
    offer(br.candidate, br.candidate_value);
    for (SimplexCell* child : {&left, &right}) {
      const Vector center = child->barycenter();
      offer(center, obj.h(center));
    }
    active.emplace(CellKey{left.upper_bound, left.id}, std::move(left));
    active.emplace(CellKey{right.upper_bound, right.id}, std::move(right));
    sweep();
    record(k);
  }

  res.iterations = k;
  res.lower_bound = lb;
  res.upper_bound = ub;
  res.incumbent_value = lb;
  res.kurtosis = 1.0 / lb;
  return res;
}

}  // namespace pdim
