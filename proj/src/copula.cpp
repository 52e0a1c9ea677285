#include "pdim/copula.hpp"

#include "pdim/error.hpp"
#include "pdim/parallel.hpp"
#include "pdim/rng.hpp"
#include "pdim/special.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdim {

CopulaCorrelation::CopulaCorrelation(const Margin& x, const Margin& y) {
  const auto rule = gauss_legendre_unit(kNodes);
  weights_ = rule.weights;
  z_.resize(kNodes);
  phi_z_.resize(kNodes);
  inv_fx_.resize(kNodes);
  inv_fy_.resize(kNodes);
  for (std::size_t i = 0; i < kNodes; ++i) {
    const double u = rule.nodes[i];
    z_[i] = normal_quantile(u);
    phi_z_[i] = normal_cdf(z_[i]);
    inv_fx_[i] = 1.0 / x.pdf(x.quantile(u));
    inv_fy_[i] = 1.0 / y.pdf(y.quantile(u));
  }
  scale_ = 1.0 / std::sqrt(x.moments().variance * y.moments().variance);
}

double CopulaCorrelation::rho_out(double rho_in) const {
  if (!(rho_in >= -1.0 && rho_in <= 1.0))
    throw InvalidInput("copula correlation must lie in [-1, 1]");
  if (rho_in == 0.0) return 0.0;
  double cov = 0.0;
  for (std::size_t i = 0; i < kNodes; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < kNodes; ++j) {
      const double c = bivariate_normal_cdf(z_[i], z_[j], rho_in) - phi_z_[i] * phi_z_[j];
      row += weights_[j] * c * inv_fy_[j];
    }
    cov += weights_[i] * inv_fx_[i] * row;
  }
  return cov * scale_;
}

double CopulaCorrelation::invert(double target, double tol) const {
  if (!(target >= -1.0 && target <= 1.0))
    throw InvalidInput("target correlation must lie in [-1, 1]");
  if (target == 0.0) return 0.0;
  double lo = -1.0;
  double hi = 1.0;
  const double r_lo = rho_out(lo);
  const double r_hi = rho_out(hi);
  if (target < r_lo || target > r_hi) {
    std::ostringstream os;
    os << "target correlation " << target << " is not attainable with these margins (range ["
       << r_lo << ", " << r_hi << "])";
    throw InvalidInput(os.str());
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (rho_out(mid) < target) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double rho_out(double rho_in, const Margin& x, const Margin& y) {
  return CopulaCorrelation(x, y).rho_out(rho_in);
}

void validate_correlation(const Matrix& r, std::size_t n, const char* what) {
  const auto en = static_cast<Eigen::Index>(n);
  if (r.rows() != en || r.cols() != en) {
    std::ostringstream os;
    os << what << " must be " << n << " x " << n;
    throw InvalidInput(os.str());
  }
  if (!r.allFinite()) throw InvalidInput(std::string(what) + " has non-finite entries");
  for (Eigen::Index i = 0; i < en; ++i) {
    if (std::abs(r(i, i) - 1.0) > 1e-12)
      throw InvalidInput(std::string(what) + " must have a unit diagonal");
    for (Eigen::Index j = 0; j < i; ++j)
      if (std::abs(r(i, j) - r(j, i)) > 1e-12)
        throw InvalidInput(std::string(what) + " must be symmetric");
  }
  Eigen::LLT<Matrix> llt(r);
  if (llt.info() != Eigen::Success)
    throw InvalidInput(std::string(what) + " is not positive definite");
}

Matrix homogeneous_correlation(std::size_t n, double rho) {
  const auto en = static_cast<Eigen::Index>(n);
  Matrix r = Matrix::Constant(en, en, rho);
  r.diagonal().setOnes();
  return r;
}

Matrix adjust_correlation(const Matrix& target, const std::vector<Margin>& margins, double tol) {
  const std::size_t n = margins.size();
  validate_correlation(target, n, "target correlation");
  const auto en = static_cast<Eigen::Index>(n);
  Matrix adjusted = Matrix::Identity(en, en);

  // Pairs with identical laws and identical targets share one inversion.
  struct Solved {
    std::size_t i, j;
    double target;
    double value;
  };
  std::vector<Solved> solved;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, CopulaCorrelation>> integrators;
  for (Eigen::Index i = 0; i < en; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      const double t = target(i, j);
      double value = 0.0;
      bool found = false;
      for (const auto& s : solved) {
        if (s.target == t && margins[s.i].same_law(margins[ui]) &&
            margins[s.j].same_law(margins[uj])) {
          value = s.value;
          found = true;
          break;
        }
      }
      if (!found) {
        const CopulaCorrelation* integ = nullptr;
        for (const auto& [key, c] : integrators)
          if (margins[key.first].same_law(margins[ui]) && margins[key.second].same_law(margins[uj]))
            integ = &c;
        if (integ == nullptr) {
          integrators.emplace_back(std::make_pair(ui, uj), CopulaCorrelation(margins[ui], margins[uj]));
          integ = &integrators.back().second;
        }
        value = integ->invert(t, tol);
        solved.push_back({ui, uj, t, value});
      }
      adjusted(i, j) = adjusted(j, i) = value;
    }
  }

  Eigen::SelfAdjointEigenSolver<Matrix> eig(adjusted, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  if (!(lo > 0.0)) {
    std::ostringstream os;
    os << "adjusted copula correlation is not positive definite (smallest eigenvalue " << lo
       << ")";
    throw NumericalFailure(os.str());
  }
  return adjusted;
}

MetaGaussianSpec MetaGaussianSpec::make(std::vector<Margin> margins, Matrix target_corr) {
  MetaGaussianSpec spec;
  spec.input_corr = adjust_correlation(target_corr, margins);
  spec.margins = std::move(margins);
  spec.target_corr = std::move(target_corr);
  return spec;
}

void MetaGaussianSpec::validate() const {
  if (margins.empty()) throw InvalidInput("meta-Gaussian spec needs at least one margin");
  validate_correlation(target_corr, margins.size(), "target correlation");
  validate_correlation(input_corr, margins.size(), "input correlation");
}

ReturnSample sample_meta_gaussian(const MetaGaussianSpec& spec, std::size_t t_obs,
                                  std::uint64_t seed, const SampleOptions& opts) {
  spec.validate();
  if (t_obs == 0) throw InvalidInput("sample size must be positive");
  if (opts.block_rows == 0) throw InvalidInput("block_rows must be positive");
  const std::size_t n = spec.n_assets();
  const auto en = static_cast<Eigen::Index>(n);
  const Matrix chol = Eigen::LLT<Matrix>(spec.input_corr).matrixL();

  ReturnSample out;
  out.values.resize(static_cast<Eigen::Index>(t_obs), en);
  out.asset_names.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.asset_names.push_back("asset" + std::to_string(i + 1));

  constexpr double kUMax = 1.0 - 0x1.0p-53;
  const CounterRng root(seed, static_cast<std::uint64_t>(Stream::simulation));
  const std::size_t n_blocks = (t_obs + opts.block_rows - 1) / opts.block_rows;
  parallel_for(n_blocks, opts.threads, [&](std::size_t b) {
    CounterRng rng = root.substream(b);
    const std::size_t r0 = b * opts.block_rows;
    const std::size_t r1 = std::min(t_obs, r0 + opts.block_rows);
    Vector eps(en), z(en);
    for (std::size_t r = r0; r < r1; ++r) {
      for (Eigen::Index k = 0; k < en; ++k) eps[k] = rng.normal();
      z.noalias() = chol.triangularView<Eigen::Lower>() * eps;
      for (Eigen::Index k = 0; k < en; ++k) {
        const double u = std::clamp(normal_cdf(z[k]), 0x1.0p-1000, kUMax);
        out.values(static_cast<Eigen::Index>(r), k) = spec.margins[static_cast<std::size_t>(k)].quantile(u);
      }
    }
  });
  return out;
}

}  // namespace pdim
