#pragma once

// Run configuration: a JSON document with one `mode` and the settings that
// mode reads.  Parsing is strict (unknown keys are errors) and reports every
// problem found, not just the first.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpq/asymptotics.hpp"

namespace gpq {

enum class Mode { Radial, Free, Minimize, Campaign, Report };

std::string to_string(Mode m);

struct SeedSpec {
  std::string name;
  std::string type = "free";  ///< free | gaussian
  Point center{0.0, 0.0};
  double width = 1.0;         ///< gaussian only

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

struct WellSpec {
  Point center{0.0, 0.0};
  double exponent = 2.0;

  friend bool operator==(const WellSpec&, const WellSpec&) = default;
};

struct SymmetrySpec {
  std::string type = "reflection";  ///< reflection | rotation
  double normal_angle = 0.0;
  int order = 2;
  Point center{0.0, 0.0};

  friend bool operator==(const SymmetrySpec&, const SymmetrySpec&) = default;
};

struct RunConfig {
  Mode mode = Mode::Radial;
  std::vector<double> q;          ///< radial, free, minimize
  std::vector<double> ratio;      ///< free (list), minimize and campaign (one value)
  std::optional<double> a;        ///< minimize: explicit coupling instead of a ratio
  std::vector<double> schedule;   ///< campaign
  double radial_r_max = 20.0;
  std::size_t radial_n = 8001;
  double tol_s = 1e-13;
  double grid_L = 8.0;
  std::size_t grid_n = 257;
  std::vector<WellSpec> wells{WellSpec{}};
  std::optional<std::string> modulation;
  double flow_dt = 0.0;
  double flow_tol_residual = 1e-5;
  std::size_t flow_max_iter = 200000;
  std::string flow_scheme = "spectral";
  std::string flow_method = "preconditioned";
  double flow_clip_tolerance = 1e-6;
  std::vector<SeedSpec> seeds;
  VerdictTolerances tolerances{};
  std::optional<SymmetrySpec> symmetry;
  std::uint64_t rng_seed = 20240601;
  std::size_t random_tests = 100;  ///< radial: randomized GN test functions per q
  std::optional<std::string> input;   ///< report: path of a stored report.json
  std::optional<std::string> output;

  bool operator==(const RunConfig& o) const;
};

/// Parse and validate; throws ConfigError listing every problem.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical JSON with all defaults filled; parse_config(dump) == config.
nlohmann::json to_json(const RunConfig& cfg);

/// SHA-256 of the canonical JSON dump (hex).
std::string config_hash(const RunConfig& cfg);

PotentialSpec make_potential(const RunConfig& cfg);
Grid2D make_grid(const RunConfig& cfg);
RadialGrid make_radial_grid(const RunConfig& cfg);
FlowConfig make_flow(const RunConfig& cfg);
std::optional<Symmetry> make_symmetry(const RunConfig& cfg);
CampaignSettings make_campaign_settings(const RunConfig& cfg);

/// Hex SHA-256 digest.
std::string sha256_hex(const std::string& data);

}  // namespace gpq
