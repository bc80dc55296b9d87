#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zrp/model.hpp"

namespace zrp {

/// Resolved driver configuration. Everything that influences the numbers is
/// in here and is echoed into every report, so a report can be re-run
/// bit-identically.
struct ExperimentConfig {
  nlohmann::json model_spec;       // graph + alpha, fully resolved
  std::vector<int> schedule;       // particle counts, strictly increasing
  std::vector<int> s1_sites;       // splitting of the maximal sites (default: first site alone)
  double epsilon = 0.015;          // test-function scale
  std::optional<int> margin;       // well margin override; default scales otherwise
  std::uint64_t seed = 20240801;
  int replicas = 64;
  std::int64_t min_transitions = 1000;
  std::int64_t size_cap = 50'000'000;
  double tolerance = -1.0;         // per-experiment pass tolerance; <0 means default
  std::string out_dir;             // empty: nothing written
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

struct ExperimentResult {
  std::string name;
  nlohmann::json report;
  std::string csv;
  bool pass = false;       // convergence target met
  bool hard_pass = true;   // every hard assertion held
  bool conclusive = true;  // extrapolation trustworthy
  double seconds = 0.0;
};

/// Convergence of the stationary normalizer to its limit.
ExperimentResult run_zk(const ExperimentConfig& config);

/// Rescaled capacities between well unions against the limit, sandwiched by
/// the tube lower bound and the smooth-candidate upper bound at every N.
ExperimentResult run_mt1(const ExperimentConfig& config);

/// The three metastability ratios over a growing schedule.
ExperimentResult run_h_conditions(const ExperimentConfig& config);

/// Simulation of the condensate walk: empirical generator against the exact
/// trace rates, exponentiality of sojourns, thermalization and the
/// transition-region occupation.
ExperimentResult run_tunneling(const ExperimentConfig& config);

/// Condensation of the stationary state: well masses against 1/kappa_star and
/// the distance of the background to the grand-canonical product.
ExperimentResult run_condensation_remark(const ExperimentConfig& config);

/// Writes <name>.json and <name>.csv into out_dir (atomically); no-op when
/// out_dir is empty.
void write_result(const ExperimentResult& result, const std::string& out_dir);

/// Built-in example graphs used by the drivers and tests.
SiteGraph preset_graph(const std::string& name);

}  // namespace zrp
