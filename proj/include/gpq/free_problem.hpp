#pragma once

// Potential-free problem: minimize  ∫|∇u|² − (2a/(q+2))∫|u|^{q+2}  over unit
// mass.  Its minimum and minimizer are explicit in terms of φ_q, and the same
// scalings define the concentration length of the trapped problem.

#include "gpq/radial_solver.hpp"

namespace gpq {

struct FreeProblemParams {
  double a;        ///< coupling constant
  double q;        ///< exponent in (0, 2)
  double aq_star;  ///< ‖φ_q‖₂^q

  /// Validated constructor: a > 0, 0 < q < 2, aq_star > 0.
  static FreeProblemParams make(double a, double q, double aq_star);
  /// Coupling set as a multiple of aq_star.
  static FreeProblemParams from_ratio(double ratio, double q, double aq_star) {
    return make(ratio * aq_star, q, aq_star);
  }

  double ratio() const { return a / aq_star; }
};

struct ScalingRecord {
  double tau_q;
  double eps_q;
  double tilde_d;
};

/// −((2−q)/2)(q/2)^{q/(2−q)}(a/a_q*)^{2/(2−q)}, evaluated in log space.
double tilde_d_closed(const FreeProblemParams& p);

/// g(s) = s − (a/a_q*) s^{q/2}
double g_eval(double s, const FreeProblemParams& p);
/// Minimizer of g on [0, ∞): (qa/(2a_q*))^{2/(2−q)} = τ_q².
double g_argmin(const FreeProblemParams& p);

/// (qa/(2a_q*))^{1/(2−q)}
double tau_q(const FreeProblemParams& p);
/// (a/a_q*)^{−1/(2−q)}
double eps_q(const FreeProblemParams& p);

ScalingRecord scaling(const FreeProblemParams& p);

/// (τ/‖φ_q‖₂) φ_q(τ r) on rec's grid contracted by τ (r_max/τ, same n).
RadialProfile tilde_minimizer_profile(const GroundStateRecord& rec, const FreeProblemParams& p);

/// Free energy of a unit-mass radial profile by radial quadrature.
double tilde_energy_quadrature(const RadialProfile& profile, const FreeProblemParams& p);

}  // namespace gpq
