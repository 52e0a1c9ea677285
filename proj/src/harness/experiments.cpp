#include "pdim/harness/experiments.hpp"

#include "pdim/copula.hpp"
#include "pdim/error.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#ifndef PDIM_VERSION
#define PDIM_VERSION "0.0.0"
#endif

namespace pdim::harness {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n ? static_cast<Eigen::Index>(rows[0].size()) : 0;
  Matrix out(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != m)
      throw InvalidInput("ragged matrix in JSON");
    for (Eigen::Index k = 0; k < m; ++k) out(i, k) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::size_t support_size(const Vector& w, double threshold) {
  return static_cast<std::size_t>((w.array() > threshold).count());
}

MetaGaussianSpec universe_spec(const UniverseSpec& u) {
  std::vector<Margin> margins;
  for (const auto& t : u.margin_targets()) margins.push_back(Margin::from_target(t));
  return MetaGaussianSpec::make(std::move(margins), u.target_correlation());
}

ReturnSample simulate_returns(const ExperimentConfig& c) {
  SampleOptions opts;
  opts.threads = c.threads;
  return sample_meta_gaussian(universe_spec(c.universe), c.t_obs, c.seed, opts);
}

CoMomentSet load_moments(const ExperimentConfig& c) {
  BuildOptions opts;
  opts.threads = c.threads;
  if (!c.universe.returns_csv.empty())
    return build_comoments(read_returns_csv(c.universe.returns_csv), opts);
  return build_comoments(simulate_returns(c), opts);
}

json moments_to_json(const CoMomentSet& m) {
  return {{"version", kResultsVersion},
          {"n_assets", m.n_assets()},
          {"n_obs", m.n_obs()},
          {"mean", std::vector<double>(m.mean().data(), m.mean().data() + m.mean().size())},
          {"m2", matrix_json(m.m2())},
          {"m3_unique", m.m3_unique()},
          {"m4_unique", m.m4_unique()}};
}

CoMomentSet moments_from_json(const json& j) {
  try {
    const auto mean = j.at("mean").get<std::vector<double>>();
    return CoMomentSet(Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                       matrix_from(j.at("m2")), j.at("m3_unique").get<std::vector<double>>(),
                       j.at("m4_unique").get<std::vector<double>>(), j.at("n_obs").get<std::size_t>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("moments file: ") + e.what());
  }
}

CoMomentSet load_moments_file(const std::string& path) {
  if (ends_with(path, ".json")) return moments_from_json(read_json(path));
  return build_comoments(read_returns_csv(path));
}

Matrix toy_correlation(double rho) {
  if (!(rho > -1.0 && rho < 1.0)) throw InvalidInput("toy correlation must lie in (-1, 1)");
  Matrix r = Matrix::Identity(3, 3);
  r(0, 1) = r(1, 0) = rho;
  return r;
}

ToyRow toy_point(const ExperimentConfig& c, double rho) {
  ExperimentConfig local = c;
  local.universe.n_assets = 3;
  local.universe.margins.clear();
  local.universe.margin.variance = 1.0;
  local.universe.correlation = toy_correlation(rho);
  local.universe.returns_csv.clear();
  const CoMomentSet m = load_moments(local);

  BbConfig bb = c.bb;
  bb.rho_tol = c.toy.rho_tol;
  const BbResult r = solve(m, bb);
  const MomentEvaluator eval(m);
  const DescentResult polished = local_descent(eval, r.incumbent);
  const bool use_polish = polished.value < r.kurtosis;

  ToyRow row;
  row.rho = rho;
  row.w3_min_kurtosis = use_polish ? polished.w[2] : r.incumbent[2];
  row.min_kurtosis = use_polish ? polished.value : r.kurtosis;
  row.w3_risk_parity = toy_rp_weight(rho);
  row.w3_diversification_ratio = toy_dr_weight(rho);
  return row;
}

std::vector<ToyRow> run_toy_example(const ExperimentConfig& c) {
  std::vector<ToyRow> rows;
  for (double rho : c.toy.rho_grid) rows.push_back(toy_point(c, rho));
  return rows;
}

Table toy_table(const std::vector<ToyRow>& rows) {
  Table t;
  t.columns = {"rho", "w3_min_kurtosis", "min_kurtosis", "w3_risk_parity",
               "w3_diversification_ratio"};
  for (const auto& r : rows)
    t.rows.push_back({r.rho, r.w3_min_kurtosis, r.min_kurtosis, r.w3_risk_parity,
                      r.w3_diversification_ratio});
  return t;
}

json weights_json(const Vector& w) {
  return std::vector<double>(w.data(), w.data() + w.size());
}

Vector weights_from_json(const json& j) {
  const json& arr = j.is_object() ? j.at("weights") : j;
  const auto v = arr.get<std::vector<double>>();
  Vector w = Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  Weights checked(w);
  return checked.vec();
}

json bb_result_json(const BbResult& r) {
  return {{"status", to_string(r.status)},
          {"weights", weights_json(r.incumbent)},
          {"kurtosis", r.kurtosis},
          {"objective", r.incumbent_value},
          {"lower_bound", r.lower_bound},
          {"upper_bound", r.upper_bound},
          {"root_upper_bound", r.root_upper_bound},
          {"alpha", r.alpha},
          {"iterations", r.iterations},
          {"cells_created", r.cells_created},
          {"cells_fathomed", r.cells_fathomed},
          {"lp_pivots", r.lp_pivots},
          {"milp_nodes", r.milp_nodes},
          {"support_size", support_size(r.incumbent)}};
}

Table bb_trace_table(const BbResult& r) {
  Table t;
  t.columns = {"iteration", "lb", "ub", "fraction_deleted", "active", "created", "fathomed"};
  for (const auto& row : r.trace)
    t.rows.push_back({static_cast<double>(row.iteration), row.lb, row.ub, row.fraction_deleted,
                      static_cast<double>(row.active), static_cast<double>(row.created),
                      static_cast<double>(row.fathomed)});
  return t;
}

json gld_result_json(const GldResult& r) {
  return {{"weights", weights_json(r.best_weights)},
          {"kurtosis", r.best_kurtosis},
          {"gld_weights", weights_json(r.gld_weights)},
          {"gld_kurtosis", r.gld_kurtosis},
          {"best_path", r.best_path},
          {"polish_improved", r.polish_improved},
          {"support_size", support_size(r.best_weights)},
          {"evaluations", r.evaluations},
          {"beta", r.beta}};
}

Table gld_path_table(const GldResult& r) {
  Table t;
  t.columns = {"path", "best_kurtosis"};
  const auto n = r.path_best_weights.cols();
  for (Eigen::Index i = 0; i < n; ++i) t.columns.push_back("w" + std::to_string(i + 1));
  for (std::size_t s = 0; s < r.path_best.size(); ++s) {
    std::vector<double> row{static_cast<double>(s), r.path_best[s]};
    for (Eigen::Index i = 0; i < n; ++i)
      row.push_back(r.path_best_weights(static_cast<Eigen::Index>(s), i));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table gld_histogram_table(const GldResult& r) {
  Table t;
  t.columns = {"asset", "bin_lo", "bin_hi", "count"};
  const auto bins = r.histograms.cols();
  for (Eigen::Index i = 0; i < r.histograms.rows(); ++i)
    for (Eigen::Index b = 0; b < bins; ++b)
      t.rows.push_back({static_cast<double>(i + 1), static_cast<double>(b) / static_cast<double>(bins),
                        static_cast<double>(b + 1) / static_cast<double>(bins),
                        static_cast<double>(r.histograms(i, b))});
  return t;
}

Table gld_trace_table(const GldResult& r) {
  Table t;
  t.columns = {"path", "step"};
  const auto n = r.final_iterates.cols();
  for (Eigen::Index i = 0; i < n; ++i) t.columns.push_back("w" + std::to_string(i + 1));
  for (std::size_t p = 0; p < r.traces.size(); ++p)
    for (Eigen::Index s = 0; s < r.traces[p].rows(); ++s) {
      std::vector<double> row{static_cast<double>(p), static_cast<double>(s)};
      for (Eigen::Index i = 0; i < n; ++i) row.push_back(r.traces[p](s, i));
      t.rows.push_back(std::move(row));
    }
  return t;
}

DimensionalityReport dimensionality_report(const Vector& w, const CoMomentSet& m,
                                           const ReferenceAsset& ref, NuMeasure measure,
                                           std::size_t max_k) {
  if (static_cast<std::size_t>(w.size()) != m.n_assets())
    throw InvalidInput("weights length does not match the number of assets");
  Weights checked(w);
  DimensionalityReport r;
  r.measure = measure;
  r.reference_nu = ref.nu_value();
  const auto d = dimensionality(checked.vec(), m, ref, measure);
  r.portfolio_nu = d.portfolio_nu;
  r.defined = d.defined;
  r.diversification = diversification(checked.vec(), m, ref, measure).value;
  r.dimensionality = d.value;
  for (std::size_t k = 1; k <= max_k; ++k) {
    r.curve_k.push_back(static_cast<double>(k));
    r.curve_nu.push_back(reference_curve(static_cast<double>(k), ref));
  }
  return r;
}

json dimensionality_json(const DimensionalityReport& r) {
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return {{"measure", to_string(r.measure)},
          {"reference_nu", r.reference_nu},
          {"portfolio_nu", r.portfolio_nu},
          {"defined", r.defined},
          {"diversification", finite_or_null(r.diversification)},
          {"dimensionality", finite_or_null(r.dimensionality)},
          {"reference_curve", {{"k", r.curve_k}, {"nu", r.curve_nu}}}};
}

RunWriter::RunWriter(const ExperimentConfig& c, std::string command)
    : config_(c), command_(std::move(command)), dir_(c.output_dir), hash_(config_hash(c)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw InvalidInput("cannot create output directory '" + dir_ + "': " + ec.message());
}

std::string RunWriter::path(const std::string& file) const { return (fs::path(dir_) / file).string(); }

void RunWriter::write_table(const std::string& file, const Table& t) const {
  const CsvStamp s = stamp();
  harness::write_table(path(file), t, &s);
}

void RunWriter::write_results(json results) const {
  json out = {{"version", kResultsVersion},
              {"command", command_},
              {"config_hash", hash_},
              {"seed", config_.seed},
              {"config", to_json(config_)}};
  out["config"].erase("output_dir");
  out["result"] = std::move(results);
  write_json(path("results.json"), out);
}

void RunWriter::write_run_record(double wall_seconds) const {
  json env = {{"compiler", __VERSION__},
              {"hardware_threads", std::thread::hardware_concurrency()},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                            "." + std::to_string(EIGEN_MINOR_VERSION)}};
  json rec = {{"version", kResultsVersion},
              {"artifact_version", PDIM_VERSION},
              {"command", command_},
              {"config_hash", hash_},
              {"seed", config_.seed},
              {"config", to_json(config_)},
              {"wall_seconds", wall_seconds},
              {"environment", env},
              {"results_file", "results.json"}};
  write_json(path("run_record.json"), rec);
}

void write_json(const std::string& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write '" + path + "'");
  f << j.dump(2) << '\n';
  if (!f) throw InvalidInput("write failed for '" + path + "'");
}

json read_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open '" + path + "'");
  try {
    json j;
    f >> j;
    return j;
  } catch (const json::exception& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

json run_bench(const ExperimentConfig& c) {
  json out = json::object();
  auto t0 = std::chrono::steady_clock::now();
  const ReturnSample s = simulate_returns(c);
  out["simulate_seconds"] = seconds_since(t0);

  BuildOptions bo;
  bo.threads = c.threads;
  t0 = std::chrono::steady_clock::now();
  const CoMomentSet m = build_comoments(s, bo);
  out["comoments_seconds"] = seconds_since(t0);

  const MomentEvaluator eval(m);
  const Vector w = Vector::Constant(static_cast<Eigen::Index>(m.n_assets()), 1.0 / static_cast<double>(m.n_assets()));
  Vector g;
  const std::size_t reps = 10000;
  double sink = 0.0;
  t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < reps; ++i) sink += eval.kurtosis_gradient(w, g);
  out["gradient_microseconds"] = seconds_since(t0) / static_cast<double>(reps) * 1e6;
  out["checksum"] = sink / static_cast<double>(reps);

  if (m.n_assets() <= 5) {
    t0 = std::chrono::steady_clock::now();
    const BbResult r = solve(m, c.bb);
    out["bb_seconds"] = seconds_since(t0);
    out["bb_iterations"] = r.iterations;
  }
  GldConfig g_cfg = c.gld;
  g_cfg.n_sim = std::min<std::size_t>(g_cfg.n_sim, 16);
  t0 = std::chrono::steady_clock::now();
  const GldResult gr = multistart(m, g_cfg);
  out["gld_seconds_per_path"] = seconds_since(t0) / static_cast<double>(g_cfg.n_sim);
  out["n_assets"] = m.n_assets();
  out["t_obs"] = m.n_obs();
  return out;
}

}  // namespace pdim::harness
