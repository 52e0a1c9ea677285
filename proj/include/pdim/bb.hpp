#pragma once

#include "pdim/bounds.hpp"
#include "pdim/comoments.hpp"
#include "pdim/simplex_cells.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace pdim {

struct BbConfig {
  double rho_tol = 1e-3;
  BoundOptions bounds;
  std::size_t max_iterations = 10000000;
  double max_seconds = std::numeric_limits<double>::infinity();
  double alpha_safety = 0.999;
  // Bound the two children of a split concurrently when >= 2.
  unsigned threads = 1;
  // Called for every fathomed cell with the lower bound at that moment.
  std::function<void(const SimplexCell&, double lb)> on_fathom;

  void validate() const;
};

enum class BbStatus { optimal, iteration_limit, time_limit };

const char* to_string(BbStatus s);

struct BbTraceRow {
  std::size_t iteration = 0;
  double lb = 0.0;
  double ub = 0.0;
  std::size_t active = 0;
  std::size_t created = 0;
  std::size_t fathomed = 0;
  double fraction_deleted = 0.0;
};

struct BbResult {
  Vector incumbent;
  double incumbent_value = 0.0;  // h = 1 / kurtosis
  double kurtosis = 0.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double alpha = 0.0;
  double root_upper_bound = 0.0;
  std::vector<double> lb_history;
  std::vector<double> ub_history;
  std::vector<BbTraceRow> trace;
  std::size_t iterations = 0;
  std::size_t cells_created = 0;
  std::size_t cells_fathomed = 0;
  std::size_t lp_pivots = 0;
  std::size_t milp_nodes = 0;
  BbStatus status = BbStatus::optimal;
};

// Maximizes h(w) = (w'M2w)^2 / mu4(w) over the weight simplex.
BbResult solve(const CoMomentSet& c, const BbConfig& cfg);

}  // namespace pdim
