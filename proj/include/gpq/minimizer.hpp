#pragma once

// Constrained minimization of the trapped energy over unit-mass fields by a
// normalized gradient flow.

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gpq/field2d.hpp"
#include "gpq/free_problem.hpp"
#include "gpq/potentials.hpp"

namespace gpq {

struct GaussianSeed {
  Point center{0.0, 0.0};
  double width = 1.0;
};

/// The potential-free minimizer placed at `center`.
struct FreeMinimizerSeed {
  Point center{0.0, 0.0};
  std::shared_ptr<const RadialProfile> profile;
};

/// A previous minimizer compressed about its maximum point by `scale`
/// (typically ε_prev/ε_new ≥ 1).
struct WarmStartSeed {
  std::shared_ptr<const Field2D> previous;
  Point center{0.0, 0.0};
  double scale = 1.0;
};

using SeedRecipe = std::variant<GaussianSeed, FreeMinimizerSeed, WarmStartSeed>;

struct NamedSeed {
  std::string name;
  SeedRecipe recipe;
};

FreeMinimizerSeed free_minimizer_seed(const GroundStateRecord& rec, const FreeProblemParams& p,
                                      Point center);

/// Normalized, non-negative, zero on the boundary ring.
Field2D make_seed(const SeedRecipe& seed, const Grid2D& grid);

enum class FlowMethod {
  Explicit,        ///< u − dt·∇E, then clip and renormalize
  Preconditioned,  ///< the projected gradient smoothed by (1 + dt(−Δ))⁻¹
};

std::string to_string(FlowMethod m);
FlowMethod flow_method_from_string(const std::string& s);

struct FlowConfig {
  double dt = 0.0;  ///< 0 selects the default for the method (0.1h² explicit, 0.02 preconditioned)
  double tol_residual = 1e-5;
  std::size_t max_iter = 200000;
  KineticScheme scheme = KineticScheme::Spectral;
  FlowMethod method = FlowMethod::Preconditioned;
  /// Negative values below −clip_tolerance·max u are clipped each step.  The
  /// sine-series kinetic operator is non-local, so the exact discrete
  /// minimizer carries sign-alternating tails of this order far from the
  /// peak; clipping them outright stalls the residual.
  double clip_tolerance = 1e-6;

  void validate() const;
  double initial_dt(const Grid2D& grid) const;
};

struct MinimizationResult {
  Field2D field;
  double energy = 0.0;  ///< d
  double mu = 0.0;      ///< Rayleigh form ⟨u,(−Δ+V)u⟩ − a∫u^{q+2}
  double residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  Point max_point{0.0, 0.0};
  double max_value = 0.0;
  double min_value = 0.0;
  std::vector<Point> local_maxima;  ///< all local maxima above half the maximum
  EnergyBreakdown breakdown;
  double final_dt = 0.0;
  std::string seed_name;
  double a = 0.0;
  double q = 0.0;
};

/// Energy increases tolerated as round-off, relative to the size of the terms.
inline constexpr double kEnergySlack = 64.0 * 2.220446049250313e-16;
inline constexpr int kMaxHalvings = 20;
/// Step growth stops at this multiple of the initial dt.  The factored
/// preconditioner shrinks the effective step like 1/dt where V is large, so
/// unbounded growth stalls the flow.
inline constexpr double kMaxDtGrowth = 50.0;

MinimizationResult normalized_gradient_flow(const Field2D& seed, const PotentialSpec& V, double a,
                                            double q, const FlowConfig& cfg);

struct MaxPoint {
  Point point;
  double value;
  std::vector<Point> local_maxima;
};

/// Grid argmax refined by a quadratic fit on its 3×3 neighbourhood.
MaxPoint locate_max(const Field2D& field);

/// d − (qa/(q+2))∫u^{q+2}, cross-checked against the Rayleigh form.
double lagrange_multiplier(const MinimizationResult& res, const PotentialSpec& V, double a, double q,
                           KineticScheme scheme = KineticScheme::Spectral);

/// Residual −Δu + Vu − μu − a u^{q+1} in L², with μ the Rayleigh form.  At
/// nodes where u = 0 only the negative part counts (projected gradient).
double stationarity_residual(const Field2D& u, const Field2D& Vgrid, double a, double q,
                             const DirichletOperator& op, double* mu_out = nullptr);

/// Fields closer than this in L² count as the same minimizer.
inline constexpr double kDedupeDistance = 0.1;

/// Runs every seed (concurrently when threads > 1) and keeps one result per
/// distinct minimizer, ordered by energy.
std::vector<MinimizationResult> multi_seed_minimize(const std::vector<NamedSeed>& seeds,
                                                    const Grid2D& grid, const PotentialSpec& V,
                                                    double a, double q, const FlowConfig& cfg,
                                                    unsigned threads = 1);

/// Thread count from GPQ_THREADS (default 1).
unsigned configured_threads();

/// Box must resolve and contain the limiting profile: √e·ε ≥ 4h and 6ε ≤ L.
void check_domain(double eps, const Grid2D& grid);
bool domain_ok(double eps, const Grid2D& grid, std::string* reason = nullptr);

nlohmann::json to_json(const MinimizationResult& res);

}  // namespace gpq
