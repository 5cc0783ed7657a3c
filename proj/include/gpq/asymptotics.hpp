#pragma once

// q ↗ 2 campaigns: per-point diagnostics of trapped minimizers against the
// potential-free closed forms and the Townes limit profile, and the trend
// verdicts evaluated over a schedule.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gpq/minimizer.hpp"

namespace gpq {

/// w(x) = Q(|x|/√e) / (√e‖Q‖₂)
class LimitProfile {
 public:
  explicit LimitProfile(const GroundStateRecord& townes);

  double at_radius(double r) const;
  double operator()(double x, double y) const { return at_radius(std::hypot(x, y)); }
  Field2D sample(const Grid2D& grid) const;

 private:
  RadialProfile profile_;
  double norm_;
};

/// Grid on which rescaled minimizers are compared with the limit profile.
inline Grid2D reference_grid() { return Grid2D::make(10.0, 257); }

/// w̄(y) = ε u(ε y + z̄) sampled on `ref` by sine-series interpolation.
Field2D rescale_minimizer(const MinimizationResult& res, double eps,
                          const Grid2D& ref = reference_grid());

/// Inverse map u(x) = w̄((x − z)/ε)/ε sampled on `target`.
Field2D unrescale(const Field2D& wbar, double eps, Point z, const Grid2D& target);

struct CampaignPoint {
  double q = 0.0;
  double a = 0.0;
  double aq_star = 0.0;
  double tau_q = 0.0;
  double eps_q = 0.0;
  double tilde_d = 0.0;
  double tilde_d_quadrature = 0.0;
  double d = 0.0;
  double mu = 0.0;
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  double kinetic = 0.0;
  double interaction = 0.0;
  double gap = 0.0;
  double potential_energy = 0.0;
  double scaled_energy = 0.0;    ///< (2/(2−q)) ε² d
  double scaled_kinetic = 0.0;   ///< ε² ∫|∇u|²
  double scaled_mu = 0.0;        ///< μ ε²
  double beta2 = 0.0;            ///< ∫|∇w̄|²
  double rescaled_mass = 0.0;    ///< ∫w̄²
  double profile_l2_error = 0.0;
  Point z{0.0, 0.0};
  double max_value = 0.0;
  std::size_t local_maxima = 0;
  std::size_t nearest_well = 0;
  double scaled_offset = 0.0;    ///< |z̄ − nearest well| / ε
  std::string seed;
};

struct VerdictTolerances {
  double final_relative = 0.15;
  double inversion = 1e-3;
  double profile_error = 0.05;
  double window_lo = 0.1;
  double window_hi = 10.0;
  double gap_floor = -1e-8;
  double well_distance_eps = 3.0;  ///< final z̄ within this many ε of y₀
};

struct Verdict {
  std::string name;
  bool applicable = true;
  bool pass = false;
  std::string detail;
  std::vector<double> series;
};

nlohmann::json to_json(const Verdict& v);

/// Non-increasing up to one increase of at most `inversion` (absolute);
/// increases below 1e-12 count as ties.  `strict` disallows ties and
/// inversions altogether.
bool trend_decreasing(const std::vector<double>& values, double inversion, bool strict = false);

Verdict energy_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
Verdict kinetic_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
Verdict multiplier_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
/// Throws ConsistencyError when any gap is below tol.gap_floor.
Verdict gap_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
Verdict kinetic_window_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
Verdict profile_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol = {});
Verdict concentration_series(const std::vector<CampaignPoint>& pts, const PotentialSpec& V,
                             const FlatnessReport& flat, const VerdictTolerances& tol = {});

/// Index of the well nearest to z.
std::size_t nearest_well(const PotentialSpec& V, const Point& z);

/// Points of the potential-free problem with d replaced by its closed form:
/// scaled energy is −(q/2)^{q/(2−q)} exactly.
std::vector<CampaignPoint> synthetic_free_points(const std::vector<double>& schedule, double ratio);

struct SymmetryReport {
  bool broken = false;
  double distance = 0.0;      ///< max over results of ‖u − u∘S‖₂
  double displacement = 0.0;  ///< distance of that result's z̄ from the fixed set
  std::size_t witness = 0;    ///< index of the result attaining `distance`
};

/// Throws ParameterError when V is not invariant under S.
SymmetryReport symmetry_breaking_detect(const std::vector<MinimizationResult>& results,
                                        const PotentialSpec& V, const Symmetry& S);

/// u∘S on the grid of u: exact node permutation when S maps nodes to nodes,
/// bilinear sampling otherwise.
Field2D transform_field(const Field2D& u, const Symmetry& S);

struct CampaignSettings {
  std::vector<double> schedule{1.6, 1.75, 1.9};
  double ratio = 1.2;
  PotentialSpec potential = PotentialSpec::harmonic();
  Grid2D grid{8.0, 257};
  RadialGrid radial = RadialGrid::standard();
  FlowConfig flow{};
  VerdictTolerances tolerances{};
  std::optional<Symmetry> symmetry;
};

struct SkippedPoint {
  double q;
  std::string reason;
};

/// Cross-section y = 0 of w̄ and of the limit profile on the reference grid.
struct ProfileOverlay {
  std::vector<double> x;
  std::vector<double> wbar;
  std::vector<double> limit;
};

struct CampaignReport {
  std::vector<CampaignPoint> points;
  std::vector<SkippedPoint> skipped;
  std::vector<Verdict> verdicts;
  std::optional<SymmetryReport> symmetry;
  nlohmann::json provenance;
  ProfileOverlay overlay;
  /// Final-point minimizer (not part of the serialized report).
  std::optional<Field2D> final_field;

  bool all_pass() const;
};

/// Progress hook called after each point (may be empty).
using CampaignObserver = std::function<void(const CampaignPoint&)>;

CampaignReport run_campaign(const CampaignSettings& settings, const std::string& config_hash = "",
                            const CampaignObserver& observer = {});

/// All verdicts for a set of points (used by run_campaign and when
/// re-emitting a stored report).
std::vector<Verdict> evaluate_verdicts(const std::vector<CampaignPoint>& pts, double ratio,
                                       const PotentialSpec& V, const VerdictTolerances& tol);

nlohmann::json to_json(const CampaignPoint& p);
CampaignPoint campaign_point_from_json(const nlohmann::json& j);

}  // namespace gpq
