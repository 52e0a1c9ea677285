#include "pdim/gld.hpp"

#include "pdim/error.hpp"
#include "pdim/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pdim {

Vector project_simplex(const Vector& v) {
  if (v.size() == 0) throw InvalidInput("cannot project an empty vector");
  if (!v.allFinite()) throw InvalidInput("cannot project a non-finite vector");
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumsum += u[k];
    const double t = (cumsum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  Vector w = (v.array() - theta).max(0.0).matrix();
  // Remove the rounding residue of the threshold from the largest entry.
  Eigen::Index imax = 0;
  w.maxCoeff(&imax);
  w[imax] += 1.0 - w.sum();
  return w;
}

Vector sample_uniform_simplex(std::size_t n, CounterRng& rng) {
  if (n == 0) throw InvalidInput("simplex dimension must be positive");
  std::vector<double> cuts(n + 1);
  cuts[0] = 0.0;
  cuts[n] = 1.0;
  for (std::size_t i = 1; i < n; ++i) cuts[i] = rng.uniform();
  std::sort(cuts.begin() + 1, cuts.end() - 1);
  Vector w(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) w[static_cast<Eigen::Index>(i)] = cuts[i + 1] - cuts[i];
  return w;
}

double temperature(double lambda, std::size_t n_assets, double c) {
  if (!(lambda > 0.0) || !(c > 0.0) || n_assets == 0)
    throw InvalidInput("temperature needs lambda > 0, c > 0 and at least one asset");
  const auto n = static_cast<double>(n_assets);
  return 2.0 * lambda * n * n / (c * c);
}

Vector gld_step(const Vector& w, const MomentEvaluator& eval, double lambda, double beta,
                CounterRng& rng, double* kurtosis_at_w) {
  Vector grad;
  const double k = eval.kurtosis_gradient(w, grad);
  if (!grad.allFinite() || !std::isfinite(k))
    throw NumericalFailure("non-finite kurtosis gradient");
  if (kurtosis_at_w) *kurtosis_at_w = k;
  Vector next = w - lambda * grad;
  if (std::isfinite(beta)) {
    const double scale = std::sqrt(2.0 * lambda / beta);
    for (Eigen::Index i = 0; i < next.size(); ++i) next[i] += scale * rng.normal();
  }
  return project_simplex(next);
}

DescentResult projected_descent(const ObjectiveFn& f, const Vector& w0,
                                const DescentOptions& opts) {
  DescentResult r;
  r.w = project_simplex(w0);
  Vector grad, trial_grad;
  r.value = f(r.w, grad);
  double step = opts.max_step;
  for (r.iterations = 0; r.iterations < opts.max_iterations; ++r.iterations) {
    r.stationarity = (r.w - project_simplex(r.w - grad)).norm();
    if (r.stationarity < opts.tol) {
      r.converged = true;
      return r;
    }
    step = std::min(opts.max_step, 2.0 * step);
    bool moved = false;
    for (int halvings = 0; halvings < 60; ++halvings, step *= 0.5) {
      const Vector trial = project_simplex(r.w - step * grad);
      const double decrease = grad.dot(trial - r.w);
      const double v = f(trial, trial_grad);
      if (v <= r.value + opts.armijo * decrease) {
        moved = (trial - r.w).norm() > 0.0;
        r.w = trial;
        r.value = v;
        grad = trial_grad;
        break;
      }
    }
    if (!moved) {
      // No representable descent step: stationary to machine precision.
      r.stationarity = (r.w - project_simplex(r.w - grad)).norm();
      r.converged = r.stationarity < std::sqrt(opts.tol);
      return r;
    }
  }
  r.stationarity = (r.w - project_simplex(r.w - grad)).norm();
  r.converged = r.stationarity < opts.tol;
  return r;
}

DescentResult barrier_descent(const ObjectiveFn& f, const Vector& w0,
                              const BarrierOptions& opts) {
  const auto n = w0.size();
  if (n == 0) throw InvalidInput("empty start point");
  Vector w = project_simplex(w0);
  const double inside = 1e-3 / static_cast<double>(n);
  if (w.minCoeff() < inside) w = (1.0 - 1e-3) * w + Vector::Constant(n, inside);

  Vector grad, trial_grad, d(n);
  std::size_t total = 0;
  auto phi = [&](const Vector& x, double mu, Vector& g) {
    const double v = f(x, g) - mu * x.array().log().sum();
    g -= mu * x.cwiseInverse();
    return v;
  };
  for (double mu = opts.mu0; mu >= opts.mu_min; mu *= opts.mu_factor) {
    double value = phi(w, mu, grad);
    double step = 1.0;
    for (std::size_t it = 0; it < opts.max_inner; ++it, ++total) {
      // Affine scaling: d = -W^2 (g - lambda 1) with sum(d) = 0.
      const Vector w2 = w.cwiseAbs2();
      const double lambda = w2.dot(grad) / w2.sum();
      d = -(w2.array() * (grad.array() - lambda)).matrix();
      const double scaled = (w.array() * (grad.array() - lambda)).matrix().norm();
      if (scaled < std::max(opts.inner_tol, 0.1 * mu)) break;
      double t_max = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < n; ++i)
        if (d[i] < 0.0) t_max = std::min(t_max, -w[i] / d[i]);
      step = std::min({2.0 * step, 0.99 * t_max, 1e6});
      const double slope = grad.dot(d);
      bool moved = false;
      for (int h = 0; h < 60; ++h, step *= 0.5) {
        const Vector trial = w + step * d;
        const double v = phi(trial, mu, trial_grad);
        if (v <= value + 1e-4 * step * slope) {
          w = trial;
          value = v;
          grad = trial_grad;
          moved = true;
          break;
        }
      }
      if (!moved) break;
    }
  }
  w /= w.sum();
  DescentResult r = projected_descent(f, w, opts.polish);
  r.iterations += total;
  return r;
}

DescentResult local_descent(const MomentEvaluator& eval, const Vector& w0, LocalMethod method) {
  auto f = [&eval](const Vector& w, Vector& g) { return eval.kurtosis_gradient(w, g); };
  if (method == LocalMethod::barrier) return barrier_descent(f, w0);
  return projected_descent(f, w0);
}

void GldConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidInput("GLD lambda must be positive");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("GLD temperature scale c must be positive");
  if (n_sim == 0) throw InvalidInput("GLD needs at least one path");
  if (trace_stride == 0) throw InvalidInput("GLD trace stride must be positive");
  if (histogram_bins == 0) throw InvalidInput("GLD histogram needs at least one bin");
}

GldResult multistart(const CoMomentSet& c, const GldConfig& cfg) {
  cfg.validate();
  const std::size_t n = c.n_assets();
  const auto en = static_cast<Eigen::Index>(n);
  const auto n_sim = static_cast<Eigen::Index>(cfg.n_sim);
  const MomentEvaluator shared(c);

  GldResult res;
  res.beta = temperature(cfg.lambda, n, cfg.c);
  res.path_best.assign(cfg.n_sim, 0.0);
  res.path_best_weights.resize(n_sim, en);
  res.final_iterates.resize(n_sim, en);
  res.traces.resize(std::min(cfg.trace_paths, cfg.n_sim));

  const CounterRng root(cfg.seed, static_cast<std::uint64_t>(Stream::gld));
  parallel_for(cfg.n_sim, cfg.threads, [&](std::size_t s) {
    const MomentEvaluator eval = shared;
    CounterRng rng = root.substream(s);
    Vector w = sample_uniform_simplex(n, rng);
    double best = std::numeric_limits<double>::infinity();
    Vector best_w = w;
    const bool traced = s < res.traces.size();
    Matrix trace;
    if (traced) trace.resize(static_cast<Eigen::Index>(cfg.n_iter / cfg.trace_stride + 1), en);
    for (std::size_t it = 0; it < cfg.n_iter; ++it) {
      if (traced && it % cfg.trace_stride == 0)
        trace.row(static_cast<Eigen::Index>(it / cfg.trace_stride)) = w.transpose();
      double k = 0.0;
      Vector next = gld_step(w, eval, cfg.lambda, res.beta, rng, &k);
      if (k < best) {
        best = k;
        best_w = w;
      }
      w = std::move(next);
    }
    const double k_last = eval.kurtosis(w);
    if (k_last < best) {
      best = k_last;
      best_w = w;
    }
    if (traced) {
      if (cfg.n_iter % cfg.trace_stride == 0)
        trace.row(static_cast<Eigen::Index>(cfg.n_iter / cfg.trace_stride)) = w.transpose();
      res.traces[s] = std::move(trace);
    }
    const auto row = static_cast<Eigen::Index>(s);
    res.path_best[s] = best;
    res.path_best_weights.row(row) = best_w.transpose();
    res.final_iterates.row(row) = w.transpose();
  });
  res.evaluations = static_cast<std::uint64_t>(cfg.n_sim) * (cfg.n_iter + 1);

  const auto best_it = std::min_element(res.path_best.begin(), res.path_best.end());
  res.best_path = static_cast<std::size_t>(std::distance(res.path_best.begin(), best_it));
  res.gld_kurtosis = *best_it;
  res.gld_weights = res.path_best_weights.row(static_cast<Eigen::Index>(res.best_path)).transpose();
  res.best_weights = res.gld_weights;
  res.best_kurtosis = res.gld_kurtosis;

  if (cfg.polish) {
    const DescentResult local = local_descent(shared, res.gld_weights);
    res.evaluations += local.iterations + 1;
    if (local.value < res.best_kurtosis) {
      res.best_kurtosis = local.value;
      res.best_weights = local.w;
      res.polish_improved = true;
    }
  }

  const auto bins = static_cast<Eigen::Index>(cfg.histogram_bins);
  res.histograms.setZero(en, bins);
  for (Eigen::Index s = 0; s < n_sim; ++s) {
    for (Eigen::Index i = 0; i < en; ++i) {
      const double v = std::clamp(res.final_iterates(s, i), 0.0, 1.0);
      const auto b = std::min(bins - 1, static_cast<Eigen::Index>(v * static_cast<double>(bins)));
      ++res.histograms(i, b);
    }
  }
  return res;
}

}  // namespace pdim
