#include "pdim/harness/config.hpp"

#include "pdim/copula.hpp"
#include "pdim/error.hpp"

#include <cstdio>
#include <fstream>
#include <set>

namespace pdim::harness {

using nlohmann::json;

namespace {

json margin_json(const MarginTarget& m) {
  return {{"mean", m.mean}, {"variance", m.variance}, {"skewness", m.skewness},
          {"kurtosis", m.kurtosis}};
}

void check_keys(const json& j, const std::set<std::string>& allowed, const char* where) {
  if (!j.is_object()) throw InvalidInput(std::string(where) + " must be a JSON object");
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw InvalidInput(std::string("unknown field '") + k + "' in " + where);
}

MarginTarget margin_from(const json& j) {
  check_keys(j, {"mean", "variance", "skewness", "kurtosis"}, "margin");
  MarginTarget m;
  m.mean = j.value("mean", m.mean);
  m.variance = j.value("variance", m.variance);
  m.skewness = j.value("skewness", m.skewness);
  m.kurtosis = j.value("kurtosis", m.kurtosis);
  return m;
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::vector<MarginTarget> UniverseSpec::margin_targets() const {
  if (!margins.empty()) {
    if (margins.size() != n_assets) throw InvalidInput("margins list must have n_assets entries");
    return margins;
  }
  return std::vector<MarginTarget>(n_assets, margin);
}

Matrix UniverseSpec::target_correlation() const {
  if (correlation) return *correlation;
  return homogeneous_correlation(n_assets, rho);
}

void ExperimentConfig::validate() const {
  if (universe.n_assets == 0) throw InvalidInput("n_assets must be positive");
  if (universe.returns_csv.empty()) {
    if (t_obs < 2) throw InvalidInput("t_obs must be at least 2");
    universe.margin_targets();
    validate_correlation(universe.target_correlation(), universe.n_assets, "target correlation");
  }
  bb.validate();
  gld.validate();
  for (double r : toy.rho_grid)
    if (!(r > -1.0 && r < 1.0)) throw InvalidInput("toy rho grid must lie in (-1, 1)");
  if (!(toy.rho_tol >= 0.0 && toy.rho_tol < 1.0)) throw InvalidInput("toy rho_tol must lie in [0, 1)");
}

json to_json(const ExperimentConfig& c) {
  json u = {{"n_assets", c.universe.n_assets},
            {"margin", margin_json(c.universe.margin)},
            {"rho", c.universe.rho},
            {"returns_csv", c.universe.returns_csv}};
  if (!c.universe.margins.empty()) {
    json ms = json::array();
    for (const auto& m : c.universe.margins) ms.push_back(margin_json(m));
    u["margins"] = ms;
  }
  if (c.universe.correlation) {
    json rows = json::array();
    const Matrix& r = *c.universe.correlation;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
      json row = json::array();
      for (Eigen::Index k = 0; k < r.cols(); ++k) row.push_back(r(i, k));
      rows.push_back(row);
    }
    u["correlation"] = rows;
  }
  const double max_seconds = c.bb.max_seconds;
  json bb = {{"rho_tol", c.bb.rho_tol},
             {"bound_mode", to_string(c.bb.bounds.mode)},
             {"n_c", c.bb.bounds.n_c},
             {"milp_cuts", c.bb.bounds.milp_cuts},
             {"max_binaries", c.bb.bounds.milp.max_binaries},
             {"max_iterations", c.bb.max_iterations},
             {"max_seconds", std::isfinite(max_seconds) ? json(max_seconds) : json(nullptr)},
             {"alpha_safety", c.bb.alpha_safety}};
  json gld = {{"lambda", c.gld.lambda},         {"c", c.gld.c},
              {"n_sim", c.gld.n_sim},           {"n_iter", c.gld.n_iter},
              {"polish", c.gld.polish},         {"trace_paths", c.gld.trace_paths},
              {"trace_stride", c.gld.trace_stride}, {"histogram_bins", c.gld.histogram_bins}};
  json toy = {{"rho_grid", c.toy.rho_grid}, {"rho_tol", c.toy.rho_tol}};
  return {{"experiment", c.experiment}, {"seed", c.seed},   {"t_obs", c.t_obs},
          {"threads", c.threads},       {"universe", u},    {"bb", bb},
          {"gld", gld},                 {"toy", toy},       {"output_dir", c.output_dir}};
}

ExperimentConfig config_from_json(const json& j) {
  check_keys(j, {"experiment", "seed", "t_obs", "threads", "universe", "bb", "gld", "toy",
                 "output_dir", "version"},
             "config");
  ExperimentConfig c;
  try {
    read(j, "experiment", c.experiment);
    read(j, "seed", c.seed);
    read(j, "t_obs", c.t_obs);
    read(j, "threads", c.threads);
    read(j, "output_dir", c.output_dir);
    if (j.contains("universe")) {
      const json& u = j.at("universe");
      check_keys(u, {"n_assets", "margin", "margins", "rho", "correlation", "returns_csv"},
                 "universe");
      read(u, "n_assets", c.universe.n_assets);
      read(u, "rho", c.universe.rho);
      read(u, "returns_csv", c.universe.returns_csv);
      if (u.contains("margin")) c.universe.margin = margin_from(u.at("margin"));
      if (u.contains("margins"))
        for (const auto& m : u.at("margins")) c.universe.margins.push_back(margin_from(m));
      if (u.contains("correlation") && !u.at("correlation").is_null()) {
        const auto rows = u.at("correlation").get<std::vector<std::vector<double>>>();
        Matrix r(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
        for (std::size_t i = 0; i < rows.size(); ++i) {
          if (rows[i].size() != rows.size()) throw InvalidInput("correlation must be square");
          for (std::size_t k = 0; k < rows.size(); ++k)
            r(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
        c.universe.correlation = r;
      }
    }
    if (j.contains("bb")) {
      const json& b = j.at("bb");
      check_keys(b, {"rho_tol", "bound_mode", "n_c", "milp_cuts", "max_binaries",
                     "max_iterations", "max_seconds", "alpha_safety"},
                 "bb");
      read(b, "rho_tol", c.bb.rho_tol);
      if (b.contains("bound_mode"))
        c.bb.bounds.mode = parse_bound_mode(b.at("bound_mode").get<std::string>());
      read(b, "n_c", c.bb.bounds.n_c);
      read(b, "milp_cuts", c.bb.bounds.milp_cuts);
      read(b, "max_binaries", c.bb.bounds.milp.max_binaries);
      read(b, "max_iterations", c.bb.max_iterations);
      if (b.contains("max_seconds") && !b.at("max_seconds").is_null())
        c.bb.max_seconds = b.at("max_seconds").get<double>();
      read(b, "alpha_safety", c.bb.alpha_safety);
    }
    if (j.contains("gld")) {
      const json& g = j.at("gld");
      check_keys(g, {"lambda", "c", "n_sim", "n_iter", "polish", "trace_paths", "trace_stride",
                     "histogram_bins"},
                 "gld");
      read(g, "lambda", c.gld.lambda);
      read(g, "c", c.gld.c);
      read(g, "n_sim", c.gld.n_sim);
      read(g, "n_iter", c.gld.n_iter);
      read(g, "polish", c.gld.polish);
      read(g, "trace_paths", c.gld.trace_paths);
      read(g, "trace_stride", c.gld.trace_stride);
      read(g, "histogram_bins", c.gld.histogram_bins);
    }
    if (j.contains("toy")) {
      const json& t = j.at("toy");
      check_keys(t, {"rho_grid", "rho_tol"}, "toy");
      read(t, "rho_grid", c.toy.rho_grid);
      read(t, "rho_tol", c.toy.rho_tol);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.gld.seed = c.seed;
  c.gld.threads = c.threads;
  c.bb.threads = c.threads;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidInput("cannot open config '" + path + "'");
  json j;
  try {
    f >> j;
  } catch (const json::exception& e) {
    throw InvalidInput("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw InvalidInput("override must look like key.path=value: '" + assignment + "'");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string config_hash(const ExperimentConfig& c) {
  json j = to_json(c);
  j.erase("output_dir");
  const std::string text = j.dump();
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace pdim::harness
