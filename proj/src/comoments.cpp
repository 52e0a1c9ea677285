#include "pdim/comoments.hpp"

#include "pdim/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

namespace pdim {

namespace {

constexpr std::size_t choose2(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }
constexpr std::size_t choose3(std::size_t n) { return n < 3 ? 0 : n * (n - 1) * (n - 2) / 6; }
constexpr std::size_t choose4(std::size_t n) {
  return n < 4 ? 0 : n * (n - 1) * (n - 2) * (n - 3) / 24;
}

// Index of the sorted pair a <= b among all N(N+1)/2 pairs (colex order).
inline std::size_t pair_index(std::size_t a, std::size_t b) { return a + choose2(b + 1); }

// Number of distinct orderings of a sorted tuple: m! / prod(run length!).
template <std::size_t M>
double multiplicity(const std::array<std::size_t, M>& idx) {
  static_assert(M == 3 || M == 4);
  double denom = 1.0;
  std::size_t run = 1;
  for (std::size_t p = 1; p <= M; ++p) {
    if (p < M && idx[p] == idx[p - 1]) {
      ++run;
    } else {
      for (std::size_t r = 2; r <= run; ++r) denom *= static_cast<double>(r);
      run = 1;
    }
  }
  return (M == 3 ? 6.0 : 24.0) / denom;
}

// Visit every sorted tuple in storage order.
template <typename F>
void for_each_triple(std::size_t n, F&& f) {
  std::size_t u = 0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      for (std::size_t i = 0; i <= j; ++i) f(u++, std::array<std::size_t, 3>{i, j, k});
}

template <typename F>
void for_each_quad(std::size_t n, F&& f) {
  std::size_t u = 0;
  for (std::size_t l = 0; l < n; ++l)
    for (std::size_t k = 0; k <= l; ++k)
      for (std::size_t j = 0; j <= k; ++j)
        for (std::size_t i = 0; i <= j; ++i) f(u++, std::array<std::size_t, 4>{i, j, k, l});
}

void check_positive_definite(const Matrix& m2) {
  Eigen::LLT<Matrix> llt(m2);
  Eigen::SelfAdjointEigenSolver<Matrix> eig(m2, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (llt.info() != Eigen::Success || !(hi > 0.0) || lo <= 1e-10 * hi) {
    std::ostringstream os;
    os << "covariance matrix is not positive definite (eigenvalues in [" << lo << ", " << hi
       << "])";
    throw NumericalFailure(os.str());
  }
}

struct ChunkPartial {
  Vector m2;  // packed pairs
  Vector m3;
  Vector m4;
};

ChunkPartial reduce_chunk(const Matrix& values, const Vector& mean, Eigen::Index row0,
                          Eigen::Index rows) {
  const auto n = static_cast<std::size_t>(values.cols());
  const std::size_t npairs = n * (n + 1) / 2;
  const auto counts = unique_element_counts(n);

  Matrix x = values.middleRows(row0, rows).rowwise() - mean.transpose();
  Matrix p(rows, static_cast<Eigen::Index>(npairs));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a <= b; ++a)
      p.col(static_cast<Eigen::Index>(pair_index(a, b))) =
          x.col(static_cast<Eigen::Index>(a)).cwiseProduct(x.col(static_cast<Eigen::Index>(b)));

  ChunkPartial out;
  out.m2 = p.colwise().sum().transpose();
  out.m3.resize(static_cast<Eigen::Index>(counts.third));
  for_each_triple(n, [&](std::size_t u, const std::array<std::size_t, 3>& t) {
    out.m3[static_cast<Eigen::Index>(u)] =
        p.col(static_cast<Eigen::Index>(pair_index(t[0], t[1])))
            .dot(x.col(static_cast<Eigen::Index>(t[2])));
  });
  out.m4.resize(static_cast<Eigen::Index>(counts.fourth));
  for_each_quad(n, [&](std::size_t u, const std::array<std::size_t, 4>& q) {
    out.m4[static_cast<Eigen::Index>(u)] =
        p.col(static_cast<Eigen::Index>(pair_index(q[0], q[1])))
            .dot(p.col(static_cast<Eigen::Index>(pair_index(q[2], q[3]))));
  });
  return out;
}

}  // namespace

void ReturnSample::validate() const {
  if (values.rows() < 2) throw InvalidInput("return sample needs at least 2 observations");
  if (values.cols() < 1) throw InvalidInput("return sample needs at least 1 asset");
  if (!asset_names.empty() && asset_names.size() != n_assets())
    throw InvalidInput("asset name count does not match the number of columns");
  if (!values.allFinite()) throw InvalidInput("return sample contains non-finite values");
}

UniqueCounts unique_element_counts(std::size_t n) {
  return {n * (n + 1) * (n + 2) / 6, n * (n + 1) * (n + 2) * (n + 3) / 24};
}

std::size_t unique_index3(std::size_t i, std::size_t j, std::size_t k) {
  std::array<std::size_t, 3> t{i, j, k};
  std::sort(t.begin(), t.end());
  return t[0] + choose2(t[1] + 1) + choose3(t[2] + 2);
}

std::size_t unique_index4(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
  std::array<std::size_t, 4> t{i, j, k, l};
  std::sort(t.begin(), t.end());
  return t[0] + choose2(t[1] + 1) + choose3(t[2] + 2) + choose4(t[3] + 3);
}

struct CoMomentSet::DenseCache {
  std::once_flag once3;
  std::once_flag once4;
  Matrix m3;
  Matrix m4;
};

CoMomentSet::CoMomentSet(Vector mean, Matrix m2, std::vector<double> m3_unique,
                         std::vector<double> m4_unique, std::size_t n_obs)
    : mean_(std::move(mean)),
      m2_(std::move(m2)),
      m3u_(std::move(m3_unique)),
      m4u_(std::move(m4_unique)),
      n_obs_(n_obs),
      cache_(std::make_shared<DenseCache>()) {
  const std::size_t n = n_assets();
  if (n == 0) throw InvalidInput("co-moment set needs at least one asset");
  if (static_cast<std::size_t>(m2_.rows()) != n || static_cast<std::size_t>(m2_.cols()) != n)
    throw InvalidInput("covariance shape does not match the mean vector");
  const auto counts = unique_element_counts(n);
  if (m3u_.size() != counts.third || m4u_.size() != counts.fourth)
    throw InvalidInput("unique co-moment arrays have the wrong length");
  if (!m2_.allFinite() || !mean_.allFinite() ||
      !std::all_of(m3u_.begin(), m3u_.end(), [](double v) { return std::isfinite(v); }) ||
      !std::all_of(m4u_.begin(), m4u_.end(), [](double v) { return std::isfinite(v); }))
    throw InvalidInput("co-moments contain non-finite values");
  check_positive_definite(m2_);
}

const Matrix& CoMomentSet::m3() const {
  std::call_once(cache_->once3, [this] {
    const std::size_t n = n_assets();
    auto& m = cache_->m3;
    m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n * n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j * n + k)) = s(i, j, k);
  });
  return cache_->m3;
}

const Matrix& CoMomentSet::m4() const {
  std::call_once(cache_->once4, [this] {
    const std::size_t n = n_assets();
    auto& m = cache_->m4;
    m.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n * n * n));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          for (std::size_t l = 0; l < n; ++l)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>((j * n + k) * n + l)) =
                this->k(i, j, k, l);
  });
  return cache_->m4;
}

CoMomentSet build_comoments(const ReturnSample& sample, const BuildOptions& opts) {
  sample.validate();
  if (opts.chunk_rows == 0) throw InvalidInput("chunk_rows must be positive");
  const Matrix& values = sample.values;
  const auto n = static_cast<std::size_t>(values.cols());
  const auto t_rows = values.rows();
  const auto chunk = static_cast<Eigen::Index>(opts.chunk_rows);
  const Eigen::Index n_chunks = (t_rows + chunk - 1) / chunk;

  Vector mean = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < n_chunks; ++c) {
    const Eigen::Index r0 = c * chunk;
    const Eigen::Index rows = std::min(chunk, t_rows - r0);
    mean += values.middleRows(r0, rows).colwise().sum().transpose();
  }
  mean /= static_cast<double>(t_rows);

  const auto counts = unique_element_counts(n);
  Vector s2 = Vector::Zero(static_cast<Eigen::Index>(n * (n + 1) / 2));
  Vector s3 = Vector::Zero(static_cast<Eigen::Index>(counts.third));
  Vector s4 = Vector::Zero(static_cast<Eigen::Index>(counts.fourth));

  const unsigned threads = std::max(1u, opts.threads);
  std::vector<ChunkPartial> wave(threads);
  for (Eigen::Index c0 = 0; c0 < n_chunks; c0 += threads) {
    const Eigen::Index in_wave = std::min<Eigen::Index>(threads, n_chunks - c0);
    auto work = [&](Eigen::Index w) {
      const Eigen::Index r0 = (c0 + w) * chunk;
      wave[static_cast<std::size_t>(w)] =
          reduce_chunk(values, mean, r0, std::min(chunk, t_rows - r0));
    };
    if (in_wave == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (Eigen::Index w = 0; w < in_wave; ++w) pool.emplace_back(work, w);
      for (auto& th : pool) th.join();
    }
    for (Eigen::Index w = 0; w < in_wave; ++w) {
      const auto& part = wave[static_cast<std::size_t>(w)];
      s2 += part.m2;
      s3 += part.m3;
      s4 += part.m4;
    }
  }

  const double inv_t = 1.0 / static_cast<double>(t_rows);
  Matrix m2(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t a = 0; a <= b; ++a) {
      const double v = s2[static_cast<Eigen::Index>(pair_index(a, b))] * inv_t;
      m2(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      m2(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  std::vector<double> m3u(counts.third), m4u(counts.fourth);
  for (std::size_t u = 0; u < counts.third; ++u) m3u[u] = s3[static_cast<Eigen::Index>(u)] * inv_t;
  for (std::size_t u = 0; u < counts.fourth; ++u) m4u[u] = s4[static_cast<Eigen::Index>(u)] * inv_t;

  return CoMomentSet(std::move(mean), std::move(m2), std::move(m3u), std::move(m4u),
                     static_cast<std::size_t>(t_rows));
}

namespace {

void check_dims(const Vector& w, const CoMomentSet& c) {
  if (static_cast<std::size_t>(w.size()) != c.n_assets())
    throw InvalidInput("weight vector length does not match the number of assets");
}

}  // namespace

PortfolioMoments portfolio_moments(const Vector& w, const CoMomentSet& c) {
  check_dims(w, c);
  const std::size_t n = c.n_assets();
  PortfolioMoments out{w.dot(c.m2() * w), 0.0, 0.0};
  const auto& u3 = c.m3_unique();
  for_each_triple(n, [&](std::size_t u, const std::array<std::size_t, 3>& t) {
    out.mu3 += multiplicity(t) * u3[u] * w[static_cast<Eigen::Index>(t[0])] *
               w[static_cast<Eigen::Index>(t[1])] * w[static_cast<Eigen::Index>(t[2])];
  });
  const auto& u4 = c.m4_unique();
  for_each_quad(n, [&](std::size_t u, const std::array<std::size_t, 4>& q) {
    out.mu4 += multiplicity(q) * u4[u] * w[static_cast<Eigen::Index>(q[0])] *
               w[static_cast<Eigen::Index>(q[1])] * w[static_cast<Eigen::Index>(q[2])] *
               w[static_cast<Eigen::Index>(q[3])];
  });
  return out;
}

double portfolio_kurtosis(const Vector& w, const CoMomentSet& c) {
  if (w.size() > 0 && w.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidInput("kurtosis is undefined for the zero weight vector");
  const auto m = portfolio_moments(w, c);
  return m.mu4 / (m.variance * m.variance);
}

double portfolio_skewness(const Vector& w, const CoMomentSet& c) {
  if (w.size() > 0 && w.cwiseAbs().maxCoeff() == 0.0)
    throw InvalidInput("skewness is undefined for the zero weight vector");
  const auto m = portfolio_moments(w, c);
  return m.mu3 / std::pow(m.variance, 1.5);
}

MomentDerivatives moment_derivatives(const Vector& w, const CoMomentSet& c) {
  check_dims(w, c);
  const std::size_t n = c.n_assets();
  const auto en = static_cast<Eigen::Index>(n);
  MomentDerivatives d;
  d.grad_var = 2.0 * (c.m2() * w);
  d.grad_mu3 = Vector::Zero(en);
  d.grad_mu4 = Vector::Zero(en);
  d.hess_mu3 = Matrix::Zero(en, en);
  d.hess_mu4 = Matrix::Zero(en, en);

  // Differentiate each distinct monomial mult * s * prod(w) position by position.
  const auto& u3 = c.m3_unique();
  for_each_triple(n, [&](std::size_t u, const std::array<std::size_t, 3>& t) {
    const double coef = multiplicity(t) * u3[u];
    for (std::size_t p = 0; p < 3; ++p) {
      double rest = coef;
      for (std::size_t r = 0; r < 3; ++r)
        if (r != p) rest *= w[static_cast<Eigen::Index>(t[r])];
      d.grad_mu3[static_cast<Eigen::Index>(t[p])] += rest;
      for (std::size_t q = 0; q < 3; ++q) {
        if (q == p) continue;
        const std::size_t other = 3 - p - q;
        d.hess_mu3(static_cast<Eigen::Index>(t[p]), static_cast<Eigen::Index>(t[q])) +=
            coef * w[static_cast<Eigen::Index>(t[other])];
      }
    }
  });
  const auto& u4 = c.m4_unique();
  for_each_quad(n, [&](std::size_t u, const std::array<std::size_t, 4>& qd) {
    const double coef = multiplicity(qd) * u4[u];
    for (std::size_t p = 0; p < 4; ++p) {
      double rest = coef;
      for (std::size_t r = 0; r < 4; ++r)
        if (r != p) rest *= w[static_cast<Eigen::Index>(qd[r])];
      d.grad_mu4[static_cast<Eigen::Index>(qd[p])] += rest;
      for (std::size_t q = 0; q < 4; ++q) {
        if (q == p) continue;
        double pair_rest = coef;
        for (std::size_t r = 0; r < 4; ++r)
          if (r != p && r != q) pair_rest *= w[static_cast<Eigen::Index>(qd[r])];
        d.hess_mu4(static_cast<Eigen::Index>(qd[p]), static_cast<Eigen::Index>(qd[q])) +=
            pair_rest;
      }
    }
  });
  return d;
}

Vector kurtosis_gradient(const Vector& w, const CoMomentSet& c) {
  check_dims(w, c);
  const Vector m2w = c.m2() * w;
  const double var = w.dot(m2w);
  const auto d = moment_derivatives(w, c);
  const double mu4 = w.dot(d.grad_mu4) / 4.0;
  // d/dw [mu4 / g] with g = var^2, grad g = 4 var M2 w.
  const double g = var * var;
  return d.grad_mu4 / g - mu4 * (4.0 * var * m2w) / (g * g);
}

MomentEvaluator::MomentEvaluator(const CoMomentSet& c) : n_(c.n_assets()), m2_(c.m2()) {
  const std::size_t npairs = n_ * (n_ + 1) / 2;
  m4_half_.resize(static_cast<Eigen::Index>(npairs), static_cast<Eigen::Index>(n_ * n_));
  pair_index_.resize(npairs);
  for (std::size_t j = 0; j < n_; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      const std::size_t row = pair_index(i, j);
      pair_index_[row] = {static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
      for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t l = 0; l < n_; ++l)
          m4_half_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(k * n_ + l)) =
              c.k(i, j, k, l);
    }
  kron_.resize(static_cast<Eigen::Index>(n_ * n_));
  t_.resize(static_cast<Eigen::Index>(npairs));
}

void MomentEvaluator::contract_pairs(const Vector& w, Vector& t) const {
  for (std::size_t k = 0; k < n_; ++k)
    kron_.segment(static_cast<Eigen::Index>(k * n_), static_cast<Eigen::Index>(n_)) =
        w[static_cast<Eigen::Index>(k)] * w;
  t.noalias() = m4_half_ * kron_;
}

double MomentEvaluator::fourth_moment(const Vector& w) const {
  contract_pairs(w, t_);
  double mu4 = 0.0;
  for (std::size_t p = 0; p < pair_index_.size(); ++p) {
    const auto [i, j] = pair_index_[p];
    const double f = (i == j) ? 1.0 : 2.0;
    mu4 += f * t_[static_cast<Eigen::Index>(p)] * w[i] * w[j];
  }
  return mu4;
}

double MomentEvaluator::fourth_moment_gradient(const Vector& w, Vector& grad) const {
  contract_pairs(w, t_);
  grad.setZero(static_cast<Eigen::Index>(n_));
  for (std::size_t p = 0; p < pair_index_.size(); ++p) {
    const auto [i, j] = pair_index_[p];
    const double t = t_[static_cast<Eigen::Index>(p)];
    grad[i] += t * w[j];
    if (i != j) grad[j] += t * w[i];
  }
  const double mu4 = w.dot(grad);
  grad *= 4.0;
  return mu4;
}

double MomentEvaluator::kurtosis(const Vector& w) const {
  const double var = variance(w);
  return fourth_moment(w) / (var * var);
}

double MomentEvaluator::kurtosis_gradient(const Vector& w, Vector& grad) const {
  const Vector m2w = m2_ * w;
  const double var = w.dot(m2w);
  const double g = var * var;
  const double mu4 = fourth_moment_gradient(w, grad);
  grad = grad / g - (4.0 * mu4 * var / (g * g)) * m2w;
  return mu4 / g;
}

}  // namespace pdim
