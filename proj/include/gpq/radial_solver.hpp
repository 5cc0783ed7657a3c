#pragma once

// Radial ground states of  u'' + u'/r = (2/q)(u - u^{q+1})  on [0, r_max].
//
// For q in (0, 2] the equation has a unique positive decaying solution phi_q;
// at q = 2 it is the Townes profile Q of  Δu - u + u^3 = 0.  The solver finds
// it by shooting on u(0) and bisecting between trajectories that turn back
// upward and trajectories that cross zero.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

namespace gpq {

struct RadialGrid {
  double r_max = 20.0;
  std::size_t n = 8001;

  /// Validated constructor: n >= 2, r_max > 0.
  static RadialGrid make(double r_max, std::size_t n);
  static RadialGrid standard() { return make(20.0, 8001); }

  double spacing() const { return r_max / static_cast<double>(n - 1); }
  double node(std::size_t i) const { return static_cast<double>(i) * spacing(); }
  std::vector<double> nodes() const;

  /// Same extent, twice the resolution (h -> h/2).
  RadialGrid refined() const { return make(r_max, 2 * n - 1); }

  friend bool operator==(const RadialGrid&, const RadialGrid&) = default;
};

/// A radial function sampled on a RadialGrid.  `slopes` holds u'(r) at the
/// same nodes when it is known (the shooter carries it); it may be empty for
/// test profiles, in which case derivatives are taken by finite differences.
struct RadialProfile {
  RadialGrid grid;
  std::vector<double> values;
  std::vector<double> slopes;
  double q = 2.0;
  double shoot_param = 0.0;

  bool has_slopes() const { return slopes.size() == values.size(); }
};

struct CrossedZero {
  double radius;
};

struct NonDecaying {
  double radius;            ///< where the upturn (or blow-up) was detected
  bool non_finite = false;  ///< state became NaN/inf during integration
};

struct Decayed {
  RadialProfile profile;
  double cutoff_radius;  ///< beyond this node the linearized tail is used
  /// The raw trajectory eventually crossed zero (rather than turning up)
  /// after reaching the tail; bisection treats it as an overshoot.
  bool overshoot = false;
};

using ShotOutcome = std::variant<CrossedZero, NonDecaying, Decayed>;

/// Tail acceptance level relative to u(0).
inline constexpr double kTailTolerance = 1e-6;

/// Integrate the radial ODE from u(0) = s, u'(0) = 0 with fixed-step RK4 and
/// classify the trajectory.
ShotOutcome shoot(double q, double s, const RadialGrid& grid);

struct GroundStateRecord {
  RadialProfile profile;
  double mass = 0.0;         ///< ∫u² over R²
  double kinetic = 0.0;      ///< ∫|∇u|²
  double interaction = 0.0;  ///< ∫u^{q+2}
  double aq_star = 0.0;      ///< mass^{q/2}
  double gn_constant = 0.0;  ///< (q+2) / (2 aq_star)
  double decay_rate = 0.0;   ///< fitted tail exponent

  double q() const { return profile.q; }
};

struct GroundStateOptions {
  double tol_s = 1e-13;
  /// Pohozaev residuals above this are reported as a convergence failure.
  double residual_threshold = 1e-6;
};

/// Bisect the shooting parameter to the decaying ground state and populate
/// all integrals.
GroundStateRecord find_ground_state(double q, const RadialGrid& grid,
                                    const GroundStateOptions& options = {});

/// Build a record (integrals, constants, decay fit) from any profile.  The
/// decay fit is skipped (left 0) when the profile has no usable tail window.
GroundStateRecord make_record(RadialProfile profile);

struct PohozaevResiduals {
  double kinetic_vs_mass;      ///< |K - M| / M
  double mass_vs_interaction;  ///< |M - 2I/(q+2)| / M
};

PohozaevResiduals pohozaev_residuals(const GroundStateRecord& rec);

/// Relative defect |I - C_q K^{q/2} M| / I of the sharp Gagliardo–Nirenberg
/// inequality with C_q = (q+2)/(2 aq_star).
double gn_equality_check(const GroundStateRecord& rec);

/// Same defect for arbitrary integrals (used on test functions).
double gn_defect(double q, double aq_star, double mass, double kinetic,
                 double interaction);

/// Least-squares decay exponent of the tail: -slope of log u + ½ log r vs r
/// over nodes with 1e-12 < u < 1e-2.  Throws if fewer than 20 such nodes.
double decay_rate_fit(const RadialProfile& profile);

/// 2π ∫ f(r) r dr over the grid by composite Simpson (3/8 rule on a trailing
/// odd panel).
double radial_integral(std::span<const double> f, const RadialGrid& grid);

/// Derivative of sampled values: the stored slopes, or fourth-order central
/// differences using the even reflection at r = 0.
std::vector<double> profile_slopes(const RadialProfile& profile);

struct MassExtrapolation {
  double coarse;        ///< a_q* on the given grid
  double fine;          ///< a_q* on grid.refined()
  double extrapolated;  ///< fine + (fine − coarse)/15
};

/// Richardson estimate of a_q* from the grid and its refinement, assuming the
/// fourth-order convergence of RK4 shooting with Simpson quadrature.
MassExtrapolation aq_star_richardson(double q, const RadialGrid& grid,
                                     const GroundStateOptions& options = {});

struct ConvergenceRow {
  double q;
  double h1_error;      ///< ‖φ_q − Q‖_{H¹}
  double aq_star_error; ///< |a_q* − a*|
};

/// Distance of φ_q to Q along a q-schedule, all on the same grid.
std::vector<ConvergenceRow> phi_to_q_convergence(std::span<const double> q_schedule,
                                                 const RadialGrid& grid,
                                                 const GroundStateOptions& options = {});

/// H¹(R²) distance between two radial profiles on the same grid.
double radial_h1_distance(const RadialProfile& a, const RadialProfile& b);

nlohmann::json to_json(const GroundStateRecord& rec);
void write_profile_csv(std::ostream& out, const RadialProfile& profile);

}  // namespace gpq
