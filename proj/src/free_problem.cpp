#include "gpq/free_problem.hpp"

#include <cmath>

#include <fmt/format.h>

#include "gpq/errors.hpp"

namespace gpq {

FreeProblemParams FreeProblemParams::make(double a, double q, double aq_star) {
  if (!(a > 0.0) || !std::isfinite(a))
    throw ParameterError(fmt::format("coupling a = {} must be positive", a));
  if (!(q > 0.0 && q < 2.0))
    throw ParameterError(fmt::format("free problem needs q in (0, 2), got {}", q));
  if (!(aq_star > 0.0) || !std::isfinite(aq_star))
    throw ParameterError(fmt::format("aq_star = {} must be positive", aq_star));
  return FreeProblemParams{a, q, aq_star};
}

namespace {

const FreeProblemParams& checked(const FreeProblemParams& p) {
  FreeProblemParams::make(p.a, p.q, p.aq_star);
  return p;
}

}  // namespace

double tilde_d_closed(const FreeProblemParams& p) {
  checked(p);
  const double q = p.q;
  const double e = 1.0 / (2.0 - q);
  const double log_mag =
      std::log(0.5 * (2.0 - q)) + q * e * std::log(0.5 * q) + 2.0 * e * std::log(p.ratio());
  return -std::exp(log_mag);
}

double g_eval(double s, const FreeProblemParams& p) {
  checked(p);
  if (!(s >= 0.0)) throw ParameterError("g is defined for s >= 0");
  return s - p.ratio() * std::pow(s, 0.5 * p.q);
}

double g_argmin(const FreeProblemParams& p) {
  const double t = tau_q(p);
  return t * t;
}

double tau_q(const FreeProblemParams& p) {
  checked(p);
  return std::exp(std::log(0.5 * p.q * p.ratio()) / (2.0 - p.q));
}

double eps_q(const FreeProblemParams& p) {
  checked(p);
  return std::exp(-std::log(p.ratio()) / (2.0 - p.q));
}

ScalingRecord scaling(const FreeProblemParams& p) {
  return {tau_q(p), eps_q(p), tilde_d_closed(p)};
}

RadialProfile tilde_minimizer_profile(const GroundStateRecord& rec, const FreeProblemParams& p) {
  checked(p);
  if (rec.q() != p.q)
    throw ParameterError(fmt::format("ground state has q = {}, parameters q = {}", rec.q(), p.q));
  const RadialProfile& phi = rec.profile;
  const double tau = tau_q(p);
  const double scale = tau / std::sqrt(rec.mass);
  const std::vector<double> slopes = profile_slopes(phi);

  // u(r) = scale φ(τ r) on the grid contracted by τ, so every node lands on a
  // node of φ and no interpolation is needed
  RadialProfile out;
  out.grid = RadialGrid::make(phi.grid.r_max / tau, phi.grid.n);
  out.q = p.q;
  out.values.resize(phi.grid.n);
  out.slopes.resize(phi.grid.n);
  for (std::size_t i = 0; i < phi.grid.n; ++i) {
    out.values[i] = std::max(scale * phi.values[i], 0.0);
    out.slopes[i] = scale * tau * slopes[i];
  }
  out.shoot_param = out.values[0];
  return out;
}

double tilde_energy_quadrature(const RadialProfile& profile, const FreeProblemParams& p) {
  checked(p);
  const std::size_t n = profile.values.size();
  const std::vector<double> du = profile_slopes(profile);
  std::vector<double> u2(n), du2(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = profile.values[i];
    u2[i] = u * u;
    du2[i] = du[i] * du[i];
    up[i] = std::pow(std::abs(u), p.q + 2.0);
  }
  const double mass = radial_integral(u2, profile.grid);
  if (std::abs(mass - 1.0) > 1e-6)
    throw ParameterError(fmt::format("free energy needs a unit-mass profile, mass = {}", mass));
  return radial_integral(du2, profile.grid) -
         2.0 * p.a / (p.q + 2.0) * radial_integral(up, profile.grid);
}

}  // namespace gpq
