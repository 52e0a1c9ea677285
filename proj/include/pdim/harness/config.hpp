#pragma once

#include "pdim/bb.hpp"
#include "pdim/gld.hpp"
#include "pdim/nig.hpp"
#include "pdim/types.hpp"

#include "json.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pdim::harness {

inline constexpr const char* kResultsVersion = "1.0";

// Asset universe for simulation.  Either one margin shared by all assets or
// one per asset; either a homogeneous correlation or a full matrix.
struct UniverseSpec {
  std::size_t n_assets = 3;
  MarginTarget margin{0.0, 1.0, 0.0, 6.0};
  std::vector<MarginTarget> margins;
  double rho = -0.2;
  std::optional<Matrix> correlation;
  // When set, returns are read from this CSV instead of simulated.
  std::string returns_csv;

  std::vector<MarginTarget> margin_targets() const;
  Matrix target_correlation() const;
};

struct ToySpec {
  std::vector<double> rho_grid{-0.7, -0.5, -0.3, 0.0, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99};
  double rho_tol = 1e-4;
};

struct ExperimentConfig {
  std::string experiment = "optimize-bb";
  std::uint64_t seed = 1;
  std::size_t t_obs = 1000000;
  unsigned threads = 1;
  UniverseSpec universe;
  BbConfig bb;
  GldConfig gld;
  ToySpec toy;
  std::string output_dir = "out";

  void validate() const;
};

nlohmann::json to_json(const ExperimentConfig& c);
// Missing fields keep their defaults; unknown fields are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);

// Applies "a.b.c=value" overrides; the value is parsed as JSON when possible
// and taken as a string otherwise.
void apply_override(nlohmann::json& j, const std::string& assignment);

// FNV-1a of the canonical JSON of the config, output_dir excluded.
std::string config_hash(const ExperimentConfig& c);

}  // namespace pdim::harness
