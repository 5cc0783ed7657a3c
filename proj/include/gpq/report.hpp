#pragma once

// Output side of a run: the artifact collector with its content-hash
// manifest, campaign report emission, and the per-mode drivers used by the
// CLI.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpq/config.hpp"

namespace gpq {

struct ManifestEntry {
  std::string path;  ///< relative to the output directory
  std::string sha256;
  std::uintmax_t bytes = 0;
};

/// Owns an output directory for one run.  Every file goes through `write`,
/// and `finish` records them all in manifest.json.
class OutputCollector {
 public:
  /// Creates the directory if needed; throws std::runtime_error when it
  /// cannot be created or written.
  explicit OutputCollector(std::string dir);

  void write(const std::string& name, const std::string& content);
  void write_json(const std::string& name, const nlohmann::json& j);
  /// Raw bytes that are already on disk under `name` (binary field dumps).
  void adopt(const std::string& name);

  const std::string& dir() const { return dir_; }
  std::string path(const std::string& name) const;

  /// Writes manifest.json and returns the entries (manifest excluded).
  std::vector<ManifestEntry> finish();

 private:
  std::string dir_;
  std::vector<ManifestEntry> entries_;
};

/// Exact decimal text that reads back to the same double.
std::string format_double(double v);

std::string campaign_csv(const std::vector<CampaignPoint>& pts);

nlohmann::json to_json(const CampaignReport& rep);
/// Inverse of to_json (final_field is not stored).
CampaignReport campaign_report_from_json(const nlohmann::json& j);
/// Potential recorded in a report's provenance.
PotentialSpec provenance_potential(const nlohmann::json& provenance);

/// campaign.csv, verdicts.json, report.json, SVG plots and manifest.json.
/// Throws ParameterError for a report without points.
std::vector<ManifestEntry> emit_report(const CampaignReport& rep, const PotentialSpec& V, const std::string& dir);

struct RunOptions {
  bool verbose = false;
  std::vector<std::string> seed_filter;  ///< minimize: keep only these seeds
  std::ostream* log = nullptr;           ///< progress and verdict lines
};

/// Exit status of a mode run: 0 when every check passes, 2 otherwise.
/// Execution problems propagate as exceptions.
int run_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt = {});

int run_radial(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt);
int run_free(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt);
int run_minimize(const RunConfig& cfg, OutputCollector& out, const RunOptions& opt);
int run_campaign_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt);
int run_report_mode(const RunConfig& cfg, const std::string& out_dir, const RunOptions& opt);

/// Randomized radial test functions Σ c_k exp(−α_k r²) checked against the
/// sharp inequality; returns the smallest relative margin
/// (C K^{q/2} M − I)/I found, which must be non-negative.
double random_gn_margin(const GroundStateRecord& rec, std::uint64_t seed, std::size_t count);

}  // namespace gpq
