#pragma once

#include "pdim/bb.hpp"
#include "pdim/comoments.hpp"
#include "pdim/copula.hpp"
#include "pdim/divmeasure.hpp"
#include "pdim/gld.hpp"
#include "pdim/harness/config.hpp"
#include "pdim/harness/csv.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace pdim::harness {

// Weights below this are reported as outside the support.
inline constexpr double kSupportThreshold = 1e-4;

std::size_t support_size(const Vector& w, double threshold = kSupportThreshold);

MetaGaussianSpec universe_spec(const UniverseSpec& u);
ReturnSample simulate_returns(const ExperimentConfig& c);
// Reads universe.returns_csv when set, otherwise simulates.
CoMomentSet load_moments(const ExperimentConfig& c);

// Moments file: JSON with mean, m2, the unique third and fourth co-moments
// and the sample size.
nlohmann::json moments_to_json(const CoMomentSet& m);
CoMomentSet moments_from_json(const nlohmann::json& j);
// Accepts a moments JSON or a returns CSV, chosen by extension.
CoMomentSet load_moments_file(const std::string& path);

struct ToyRow {
  double rho = 0.0;
  double w3_min_kurtosis = 0.0;
  double min_kurtosis = 0.0;
  double w3_risk_parity = 0.0;
  double w3_diversification_ratio = 0.0;
};

// Three assets with unit variances and correlation matrix
// [[1, rho, 0], [rho, 1, 0], [0, 0, 1]]; asset three is the independent one.
Matrix toy_correlation(double rho);
// BB at toy.rho_tol followed by a projected-gradient polish of the incumbent.
ToyRow toy_point(const ExperimentConfig& c, double rho);
std::vector<ToyRow> run_toy_example(const ExperimentConfig& c);
Table toy_table(const std::vector<ToyRow>& rows);

nlohmann::json weights_json(const Vector& w);
Vector weights_from_json(const nlohmann::json& j);

nlohmann::json bb_result_json(const BbResult& r);
Table bb_trace_table(const BbResult& r);

nlohmann::json gld_result_json(const GldResult& r);
Table gld_path_table(const GldResult& r);
Table gld_histogram_table(const GldResult& r);
Table gld_trace_table(const GldResult& r);

struct DimensionalityReport {
  NuMeasure measure = NuMeasure::excess_kurtosis;
  double reference_nu = 0.0;
  double portfolio_nu = 0.0;
  bool defined = false;
  double diversification = 0.0;  // D
  double dimensionality = 0.0;   // d
  std::vector<double> curve_k;
  std::vector<double> curve_nu;
};

// Reference curve tabulated at k = 1..max_k.
DimensionalityReport dimensionality_report(const Vector& w, const CoMomentSet& m,
                                           const ReferenceAsset& ref, NuMeasure measure,
                                           std::size_t max_k = 20);
nlohmann::json dimensionality_json(const DimensionalityReport& r);

// Output directory handling.  results.json holds only deterministic output;
// run_record.json adds wall-clock time and the environment.
class RunWriter {
 public:
  RunWriter(const ExperimentConfig& c, std::string command);

  const std::string& dir() const { return dir_; }
  CsvStamp stamp() const { return {hash_, config_.seed}; }
  std::string path(const std::string& file) const;

  void write_table(const std::string& file, const Table& t) const;
  // Adds version, command, config hash, seed and the config snapshot.
  void write_results(nlohmann::json results) const;
  void write_run_record(double wall_seconds) const;

 private:
  ExperimentConfig config_;
  std::string command_;
  std::string dir_;
  std::string hash_;
};

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

// Timings of the main kernels on the configured universe.
nlohmann::json run_bench(const ExperimentConfig& c);

}  // namespace pdim::harness
