#include "fixtures.hpp"

#include "pdim/error.hpp"
#include "pdim/harness/config.hpp"
#include "pdim/harness/csv.hpp"
#include "pdim/harness/experiments.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace pdim;
using namespace pdim::harness;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pdim_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Csv, ReturnsRoundTripIsIdempotent) {
  const ReturnSample s = pdim::testing::random_sample(50, 3, 2);
  const CsvStamp stamp{"abc", 7};
  std::stringstream a;
  write_returns_csv(a, s, &stamp);
  const ReturnSample back = read_returns_csv(a);
  EXPECT_TRUE(back.values == s.values);
  EXPECT_EQ(back.asset_names, s.asset_names);
  std::stringstream b;
  write_returns_csv(b, back, &stamp);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(a.str().rfind("# config_hash=abc seed=7\n", 0), 0u);
}

TEST(Csv, ReportsMalformedRows) {
  std::stringstream ragged("x,y\n1,2\n3\n");
  EXPECT_THROW(read_returns_csv(ragged), InvalidInput);
  std::stringstream junk("x,y\n1,2\n3,abc\n");
  try {
    read_returns_csv(junk);
    FAIL();
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  std::stringstream empty("x,y\n");
  EXPECT_THROW(read_returns_csv(empty), InvalidInput);
}

TEST(Csv, TableRoundTrip) {
  Table t;
  t.columns = {"iteration", "lb", "ub"};
  t.rows = {{0, 0.1, 1.0 / 3}, {1, 0.2, 2.0 / 7}};
  std::stringstream a;
  write_table(a, t);
  const Table back = read_table(a);
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(format_double(0.1), "0.1");
}

TEST(Config, JsonRoundTripAndValidation) {
  ExperimentConfig c;
  c.seed = 9;
  c.universe.n_assets = 4;
  c.bb.bounds.mode = BoundMode::milp;
  c.gld.n_sim = 12;
  const ExperimentConfig back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back).dump(), to_json(c).dump());
  EXPECT_EQ(back.gld.seed, 9u);

  nlohmann::json j = to_json(c);
  j["bb"]["bogus"] = 1;
  EXPECT_THROW(config_from_json(j), InvalidInput);
  j = to_json(c);
  j["universe"]["rho"] = -0.5;  // not positive definite for 4 assets
  EXPECT_THROW(config_from_json(j), InvalidInput);
  j = to_json(c);
  j["gld"]["lambda"] = "fast";
  EXPECT_THROW(config_from_json(j), InvalidInput);
}

TEST(Config, OverridesAndHash) {
  nlohmann::json j = nlohmann::json::object();
  apply_override(j, "bb.rho_tol=1e-4");
  apply_override(j, "bb.bound_mode=lp1");
  apply_override(j, "universe.n_assets=5");
  const ExperimentConfig c = config_from_json(j);
  EXPECT_EQ(c.bb.rho_tol, 1e-4);
  EXPECT_EQ(c.bb.bounds.mode, BoundMode::lp1);
  EXPECT_EQ(c.universe.n_assets, 5u);
  EXPECT_THROW(apply_override(j, "novalue"), InvalidInput);

  ExperimentConfig other = c;
  other.output_dir = "elsewhere";
  EXPECT_EQ(config_hash(c), config_hash(other));
  other.seed = 2;
  EXPECT_NE(config_hash(c), config_hash(other));
}

TEST(Moments, JsonRoundTrip) {
  const CoMomentSet m = build_comoments(pdim::testing::random_sample(300, 3, 5));
  const CoMomentSet back = moments_from_json(nlohmann::json::parse(moments_to_json(m).dump()));
  EXPECT_EQ(back.m4_unique(), m.m4_unique());
  EXPECT_TRUE(back.m2() == m.m2());
  EXPECT_EQ(moments_to_json(back).dump(), moments_to_json(m).dump());
}

TEST(Simulate, RerunIsByteIdentical) {
  ExperimentConfig c;
  c.t_obs = 20000;
  c.seed = 7;
  c.universe.n_assets = 3;
  c.universe.rho = -0.2;
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  for (const fs::path& dir : {a, b}) {
    c.output_dir = dir.string();
    RunWriter out(c, "simulate");
    const CsvStamp stamp = out.stamp();
    write_returns_csv(out.path("returns.csv"), simulate_returns(c), &stamp);
  }
  EXPECT_EQ(slurp((a / "returns.csv").string()), slurp((b / "returns.csv").string()));
  std::ifstream f(a / "returns.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(f, line)) ++rows;
  EXPECT_EQ(rows, 20000u + 2);
}

TEST(OptimizeBb, IdenticalConfigGivesIdenticalFiles) {
  ExperimentConfig c;
  c.t_obs = 100000;
  std::vector<std::string> results, traces;
  for (const char* name : {"bb_a", "bb_b"}) {
    c.output_dir = scratch(name).string();
    RunWriter out(c, "optimize-bb");
    const BbResult r = solve(load_moments(c), c.bb);
    out.write_table("bb_trace.csv", bb_trace_table(r));
    out.write_results(bb_result_json(r));
    out.write_run_record(0.0);
    results.push_back(slurp(out.path("results.json")));
    traces.push_back(slurp(out.path("bb_trace.csv")));
    const auto j = read_json(out.path("results.json"));
    EXPECT_EQ(j.at("version"), kResultsVersion);
    EXPECT_EQ(j.at("config_hash"), config_hash(c));
  }
  EXPECT_EQ(results[0], results[1]);
  EXPECT_EQ(traces[0], traces[1]);
  std::stringstream trace(traces[0]);
  const Table t = read_table(trace);
  EXPECT_EQ(t.columns[0], "iteration");
  EXPECT_EQ(t.columns[3], "fraction_deleted");
}

TEST(Dimensionality, ReportOracles) {
  const ReferenceAsset z(NigParams{1, 0, 1, 0}, NuMeasure::excess_kurtosis);
  const CoMomentSet& c = pdim::testing::universe(5, 0.0, 6.0, 1000000, 3);
  Vector w = Vector::Constant(5, 0.25);
  w[4] = 0.0;
  const auto r = dimensionality_report(w, c, z, NuMeasure::excess_kurtosis);
  EXPECT_NEAR(r.dimensionality, 4.0, 0.3);
  EXPECT_EQ(r.curve_k.size(), 20u);
  EXPECT_EQ(r.curve_nu[0], z.nu_value());
  EXPECT_NEAR(dimensionality_report(Vector::Unit(5, 2), c, z, NuMeasure::excess_kurtosis).dimensionality,
              1.0, 0.1);
  Vector bad = Vector::Constant(5, 0.25);
  bad[4] = -0.0001;
  bad[0] += 0.0001;
  EXPECT_THROW(dimensionality_report(bad, c, z, NuMeasure::excess_kurtosis), InvalidInput);
  EXPECT_THROW(dimensionality_report(Vector::Constant(3, 1.0 / 3), c, z, NuMeasure::excess_kurtosis),
               InvalidInput);
  const auto j = dimensionality_json(r);
  EXPECT_TRUE(j.contains("reference_curve"));
}

TEST(Toy, PointMatchesClosedForms) {
  ExperimentConfig c;
  c.t_obs = 200000;
  const ToyRow row = toy_point(c, 0.0);
  EXPECT_EQ(row.w3_risk_parity, toy_rp_weight(0.0));
  EXPECT_EQ(row.w3_diversification_ratio, toy_dr_weight(0.0));
  // Three iid assets: the minimum is near equal weights.
  EXPECT_NEAR(row.w3_min_kurtosis, 1.0 / 3, 0.05);
  EXPECT_THROW(toy_correlation(1.0), InvalidInput);
}
