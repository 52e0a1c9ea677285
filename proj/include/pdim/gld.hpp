#pragma once

#include "pdim/comoments.hpp"
#include "pdim/rng.hpp"
#include "pdim/types.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace pdim {

// Euclidean projection onto {w >= 0, sum w = 1} by the sort-threshold rule.
// Throws InvalidInput on non-finite input.
Vector project_simplex(const Vector& v);

// Uniform draw from the (n-1)-simplex via spacings of sorted uniforms.
Vector sample_uniform_simplex(std::size_t n, CounterRng& rng);

// Inverse temperature 2 lambda N^2 / c^2.
double temperature(double lambda, std::size_t n_assets, double c);

// One projected Langevin step on the kurtosis:
//   w <- P(w - lambda grad kappa(w) + sqrt(2 lambda / beta) eps).
// beta = +infinity gives plain projected gradient descent.  Writes the
// kurtosis at the input point to *kurtosis_at_w when given.
Vector gld_step(const Vector& w, const MomentEvaluator& eval, double lambda, double beta,
                CounterRng& rng, double* kurtosis_at_w = nullptr);

// f(w, grad) returns the objective and fills its gradient.
using ObjectiveFn = std::function<double(const Vector&, Vector&)>;

struct DescentOptions {
  // Stop when |w - P(w - grad f(w))| falls below this.
  double tol = 1e-8;
  double armijo = 1e-4;
  // Upper limit on the trial step length.
  double max_step = 1.0;
  std::size_t max_iterations = 100000;
};

struct DescentResult {
  Vector w;
  double value = 0.0;
  double stationarity = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Projected gradient descent with Armijo backtracking (step halving).
DescentResult projected_descent(const ObjectiveFn& f, const Vector& w0,
                                const DescentOptions& opts = {});

struct BarrierOptions {
  double mu0 = 0.1;
  double mu_factor = 0.1;
  double mu_min = 1e-10;
  // Inner loop stops when the scaled reduced gradient falls below
  // max(inner_tol, mu / 10).
  double inner_tol = 1e-9;
  std::size_t max_inner = 5000;
  // Final projected-gradient polish.
  DescentOptions polish;
};

// Log-barrier interior method: minimizes f - mu sum(log w) on sum(w) = 1 for
// a decreasing sequence of mu with affine-scaled descent steps, then
// polishes with projected_descent.  Starts on the boundary are nudged inside.
DescentResult barrier_descent(const ObjectiveFn& f, const Vector& w0,
                              const BarrierOptions& opts = {});

enum class LocalMethod { projected_gradient, barrier };

// Local minimization of the portfolio kurtosis.
DescentResult local_descent(const MomentEvaluator& eval, const Vector& w0,
                            LocalMethod method = LocalMethod::projected_gradient);

struct GldConfig {
  double lambda = 0.01;
  double c = 0.06;
  std::size_t n_sim = 1000;
  std::size_t n_iter = 10000;
  std::uint64_t seed = 1;
  bool polish = true;
  unsigned threads = 1;
  // Iterates of the first `trace_paths` paths are recorded every
  // `trace_stride` steps.
  std::size_t trace_paths = 0;
  std::size_t trace_stride = 1;
  std::size_t histogram_bins = 200;

  void validate() const;
};

struct GldResult {
  Vector best_weights;
  double best_kurtosis = 0.0;
  // Before the local polish.
  Vector gld_weights;
  double gld_kurtosis = 0.0;
  std::size_t best_path = 0;
  bool polish_improved = false;

  std::vector<double> path_best;
  Matrix path_best_weights;  // n_sim x N
  Matrix final_iterates;     // n_sim x N
  // histograms(i, b): final iterates with weight i in bin b of [0, 1].
  Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic> histograms;
  std::vector<Matrix> traces;  // one (steps/stride + 1) x N matrix per traced path
  std::uint64_t evaluations = 0;
  double beta = 0.0;
};

GldResult multistart(const CoMomentSet& c, const GldConfig& cfg);

}  // namespace pdim
