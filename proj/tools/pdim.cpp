// Command-line front end.  Settings are resolved in this order, later
// entries winning: built-in defaults, the --config JSON file, --set
// key.path=value overrides, then the dedicated flags of each subcommand.

#include "pdim/error.hpp"
#include "pdim/harness/config.hpp"
#include "pdim/harness/csv.hpp"
#include "pdim/harness/experiments.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <iostream>
#include <optional>

namespace {

using namespace pdim;
using namespace pdim::harness;
using nlohmann::json;

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> output_dir;
  std::optional<unsigned> threads;
  std::optional<std::size_t> t_obs;
  std::optional<std::size_t> n_assets;
  std::optional<double> rho;
  std::optional<double> kurtosis;
  std::optional<std::string> returns_csv;
};

void add_common(CLI::App* app, CommonOptions& o, bool universe) {
  app->add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--set", o.overrides, "Override a config field, e.g. bb.rho_tol=1e-4");
  app->add_option("--seed", o.seed, "Top-level seed");
  app->add_option("-o,--output-dir", o.output_dir, "Output directory");
  app->add_option("--threads", o.threads, "Worker threads");
  if (universe) {
    app->add_option("-T,--t-obs", o.t_obs, "Simulated observations");
    app->add_option("-n,--n-assets", o.n_assets, "Number of assets");
    app->add_option("--rho", o.rho, "Homogeneous target correlation");
    app->add_option("--kurtosis", o.kurtosis, "Marginal kurtosis of every asset");
    app->add_option("--returns", o.returns_csv, "Returns CSV instead of simulation")
        ->check(CLI::ExistingFile);
  }
}

ExperimentConfig resolve(const CommonOptions& o, const std::string& experiment,
                         const std::function<void(json&)>& flags = {}) {
  json j = json::object();
  if (!o.config_path.empty()) j = read_json(o.config_path);
  for (const auto& a : o.overrides) apply_override(j, a);
  j["experiment"] = experiment;
  if (o.seed) j["seed"] = *o.seed;
  if (o.output_dir) j["output_dir"] = *o.output_dir;
  if (o.threads) j["threads"] = *o.threads;
  if (o.t_obs) j["t_obs"] = *o.t_obs;
  if (o.n_assets) j["universe"]["n_assets"] = *o.n_assets;
  if (o.rho) j["universe"]["rho"] = *o.rho;
  if (o.kurtosis) j["universe"]["margin"]["kurtosis"] = *o.kurtosis;
  if (o.returns_csv) j["universe"]["returns_csv"] = *o.returns_csv;
  if (flags) flags(j);
  return config_from_json(j);
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Portfolio dimensionality: moment estimation, kurtosis minimization, diversification"};
  app.require_subcommand(1);

  CommonOptions sim_o, mom_o, toy_o, bb_o, gld_o, dim_o, bench_o;

  auto* sim = app.add_subcommand("simulate", "Simulate meta-Gaussian returns to CSV");
  add_common(sim, sim_o, true);

  auto* mom = app.add_subcommand("build-moments", "Co-moments of a returns CSV (or a simulation) to JSON");
  add_common(mom, mom_o, true);

  auto* toy = app.add_subcommand("toy-example", "Weight of the independent asset in the 3-asset example");
  add_common(toy, toy_o, true);
  std::vector<double> rho_grid;
  toy->add_option("--rho-grid", rho_grid, "Correlations of the duplicated pair");

  auto* bb = app.add_subcommand("optimize-bb", "Branch and bound kurtosis minimization");
  add_common(bb, bb_o, true);
  std::optional<std::string> bound_mode;
  std::optional<double> rho_tol;
  std::optional<std::size_t> n_c;
  bb->add_option("--bound", bound_mode, "lp1, lp2 or milp")
      ->check(CLI::IsMember({"lp1", "lp2", "milp"}));
  bb->add_option("--rho-tol", rho_tol, "Relative optimality tolerance");
  bb->add_option("--n-c", n_c, "Cut points per edge for lp2");

  auto* gld = app.add_subcommand("optimize-gld", "Multistart projected Langevin descent");
  add_common(gld, gld_o, true);
  std::optional<std::size_t> n_sim, n_iter, trace_paths;
  std::optional<double> lambda, c_noise;
  gld->add_option("--n-sim", n_sim, "Number of paths");
  gld->add_option("--n-iter", n_iter, "Steps per path");
  gld->add_option("--lambda", lambda, "Step size");
  gld->add_option("--noise-c", c_noise, "Noise constant c");
  gld->add_option("--trace-paths", trace_paths, "Record iterates of the first paths");

  auto* dim = app.add_subcommand("dimensionality", "Diversification and dimensionality of a portfolio");
  add_common(dim, dim_o, false);
  std::string weights_path, moments_path, measure = "excess_kurtosis";
  std::optional<double> ref_nu, ref_kurtosis;
  double ref_skewness = 0.0;
  std::size_t max_k = 20;
  dim->add_option("--weights", weights_path, "JSON weights (array or {\"weights\": [...]})")
      ->required()->check(CLI::ExistingFile);
  dim->add_option("--moments", moments_path, "Moments JSON or returns CSV")
      ->required()->check(CLI::ExistingFile);
  dim->add_option("--measure", measure, "excess_kurtosis or squared_skewness")
      ->check(CLI::IsMember({"excess_kurtosis", "squared_skewness"}));
  auto* nu_opt = dim->add_option("--reference-nu", ref_nu, "nu of the reference asset");
  dim->add_option("--reference-kurtosis", ref_kurtosis, "Kurtosis of an NIG reference asset")
      ->excludes(nu_opt);
  dim->add_option("--reference-skewness", ref_skewness, "Skewness of the NIG reference asset");
  dim->add_option("--max-k", max_k, "Length of the tabulated reference curve");

  auto* bench = app.add_subcommand("bench", "Time the main kernels");
  add_common(bench, bench_o, true);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto t0 = std::chrono::steady_clock::now();
    if (sim->parsed()) {
      const auto cfg = resolve(sim_o, "simulate");
      RunWriter out(cfg, "simulate");
      const CsvStamp stamp = out.stamp();
      write_returns_csv(out.path("returns.csv"), simulate_returns(cfg), &stamp);
      out.write_results({{"returns_file", "returns.csv"}, {"t_obs", cfg.t_obs},
                         {"n_assets", cfg.universe.n_assets}});
      out.write_run_record(elapsed(t0));
      std::cout << out.path("returns.csv") << '\n';
    } else if (mom->parsed()) {
      const auto cfg = resolve(mom_o, "build-moments");
      RunWriter out(cfg, "build-moments");
      json m = moments_to_json(load_moments(cfg));
      m["config_hash"] = config_hash(cfg);
      m["seed"] = cfg.seed;
      write_json(out.path("moments.json"), m);
      out.write_results({{"moments_file", "moments.json"}});
      out.write_run_record(elapsed(t0));
      std::cout << out.path("moments.json") << '\n';
    } else if (toy->parsed()) {
      const auto cfg = resolve(toy_o, "toy-example", [&](json& j) {
        if (!rho_grid.empty()) j["toy"]["rho_grid"] = rho_grid;
      });
      RunWriter out(cfg, "toy-example");
      const auto rows = run_toy_example(cfg);
      out.write_table("toy_example.csv", toy_table(rows));
      json res = json::array();
      for (const auto& r : rows)
        res.push_back({{"rho", r.rho}, {"w3_min_kurtosis", r.w3_min_kurtosis},
                       {"min_kurtosis", r.min_kurtosis}, {"w3_risk_parity", r.w3_risk_parity},
                       {"w3_diversification_ratio", r.w3_diversification_ratio}});
      out.write_results({{"rows", res}});
      out.write_run_record(elapsed(t0));
      for (const auto& r : rows)
        std::cout << "rho=" << r.rho << " w3: min-kurtosis " << r.w3_min_kurtosis << ", RP "
                  << r.w3_risk_parity << ", DR " << r.w3_diversification_ratio << '\n';
    } else if (bb->parsed()) {
      const auto cfg = resolve(bb_o, "optimize-bb", [&](json& j) {
        if (bound_mode) j["bb"]["bound_mode"] = *bound_mode;
        if (rho_tol) j["bb"]["rho_tol"] = *rho_tol;
        if (n_c) j["bb"]["n_c"] = *n_c;
      });
      RunWriter out(cfg, "optimize-bb");
      const BbResult r = solve(load_moments(cfg), cfg.bb);
      out.write_table("bb_trace.csv", bb_trace_table(r));
      out.write_results(bb_result_json(r));
      out.write_run_record(elapsed(t0));
      std::cout << "status " << to_string(r.status) << ", kurtosis " << r.kurtosis << ", iterations "
                << r.iterations << '\n';
    } else if (gld->parsed()) {
      const auto cfg = resolve(gld_o, "optimize-gld", [&](json& j) {
        if (n_sim) j["gld"]["n_sim"] = *n_sim;
        if (n_iter) j["gld"]["n_iter"] = *n_iter;
        if (lambda) j["gld"]["lambda"] = *lambda;
        if (c_noise) j["gld"]["c"] = *c_noise;
        if (trace_paths) j["gld"]["trace_paths"] = *trace_paths;
      });
      RunWriter out(cfg, "optimize-gld");
      const GldResult r = multistart(load_moments(cfg), cfg.gld);
      out.write_table("gld_paths.csv", gld_path_table(r));
      out.write_table("gld_histograms.csv", gld_histogram_table(r));
      if (!r.traces.empty()) out.write_table("gld_traces.csv", gld_trace_table(r));
      out.write_results(gld_result_json(r));
      out.write_run_record(elapsed(t0));
      std::cout << "kurtosis " << r.best_kurtosis << ", support " << support_size(r.best_weights)
                << '\n';
    } else if (dim->parsed()) {
      const auto cfg = resolve(dim_o, "dimensionality");
      RunWriter out(cfg, "dimensionality");
      const NuMeasure m = parse_nu_measure(measure);
      const CoMomentSet moments = load_moments_file(moments_path);
      const Vector w = weights_from_json(read_json(weights_path));
      std::optional<ReferenceAsset> ref;
      if (ref_nu) {
        ref.emplace(*ref_nu, "explicit");
      } else {
        MarginTarget t;
        t.kurtosis = ref_kurtosis.value_or(cfg.universe.margin.kurtosis);
        t.skewness = ref_kurtosis ? ref_skewness : cfg.universe.margin.skewness;
        ref.emplace(nig_params_from_moments(t), m, "nig");
      }
      const auto report = dimensionality_report(w, moments, *ref, m, max_k);
      out.write_results(dimensionality_json(report));
      out.write_run_record(elapsed(t0));
      std::cout << "nu " << report.portfolio_nu << ", dimensionality " << report.dimensionality
                << (report.defined ? "" : " (portfolio nu below floor)") << '\n';
    } else if (bench->parsed()) {
      const auto cfg = resolve(bench_o, "bench");
      RunWriter out(cfg, "bench");
      json res = run_bench(cfg);
      res["config_hash"] = config_hash(cfg);
      res["seed"] = cfg.seed;
      // Timings are not reproducible, so they live in the run record only.
      write_json(out.path("bench.json"), res);
      out.write_run_record(elapsed(t0));
      std::cout << res.dump(2) << '\n';
    }
  } catch (const InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
