#include "gpq/radial_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "gpq/errors.hpp"

namespace gpq {

namespace {

void check_exponent(double q) {
  if (!(q > 0.0 && q <= 2.0) || !std::isfinite(q))
    throw ParameterError(fmt::format("exponent q = {} outside (0, 2]", q));
}

/// Odd extension of the nonlinearity so trajectories stay defined past zero.
double odd_power(double u, double q) { return std::copysign(std::pow(std::abs(u), q + 1.0), u); }

struct State {
  double u;
  double v;
};

State rhs(double r, const State& y, double c, double q) {
  return {y.v, c * (y.u - odd_power(y.u, q)) - y.v / r};
}

State rk4_step(double r, double h, const State& y, double c, double q) {
  const State k1 = rhs(r, y, c, q);
  const State k2 = rhs(r + 0.5 * h, {y.u + 0.5 * h * k1.u, y.v + 0.5 * h * k1.v}, c, q);
  const State k3 = rhs(r + 0.5 * h, {y.u + 0.5 * h * k2.u, y.v + 0.5 * h * k2.v}, c, q);
  const State k4 = rhs(r + h, {y.u + h * k3.u, y.v + h * k3.v}, c, q);
  return {y.u + h / 6.0 * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
          y.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

/// Replace everything past `cut` with the decaying solution of the linearized
/// equation u'' + u'/r = c u, i.e. a multiple of K0(√c r).
void attach_tail(std::vector<double>& u, std::vector<double>& v, std::size_t cut,
                 const RadialGrid& grid, double c) {
  const double kappa = std::sqrt(c);
  const double rc = grid.node(cut);
  const double k0c = std::cyl_bessel_k(0.0, kappa * rc);
  const double amplitude = u[cut] / k0c;
  for (std::size_t i = cut + 1; i < u.size(); ++i) {
    const double x = kappa * grid.node(i);
    u[i] = amplitude * std::cyl_bessel_k(0.0, x);
    v[i] = -kappa * amplitude * std::cyl_bessel_k(1.0, x);
  }
}

bool is_overshoot(const ShotOutcome& outcome) {
  if (std::holds_alternative<CrossedZero>(outcome)) return true;
  if (const auto* d = std::get_if<Decayed>(&outcome)) return d->overshoot;
  return false;
}

}  // namespace

RadialGrid RadialGrid::make(double r_max, std::size_t n) {
  if (!(r_max > 0.0) || !std::isfinite(r_max))
    throw ParameterError(fmt::format("radial grid r_max = {} must be positive", r_max));
  if (n < 2) throw ParameterError(fmt::format("radial grid needs n >= 2, got {}", n));
  return RadialGrid{r_max, n};
}

std::vector<double> RadialGrid::nodes() const {
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = node(i);
  return r;
}

ShotOutcome shoot(double q, double s, const RadialGrid& grid) {
  check_exponent(q);
  if (!(s > 0.0) || !std::isfinite(s))
    throw ParameterError(fmt::format("shooting amplitude s = {} must be positive", s));
  RadialGrid::make(grid.r_max, grid.n);

  const double c = 2.0 / q;
  const double h = grid.spacing();
  const std::size_t n = grid.n;
  std::vector<double> u(n), v(n);
  u[0] = s;
  v[0] = 0.0;

  // Series start removes the u'/r singularity: u = s + A r² + B r⁴.
  const double g = s - std::pow(s, q + 1.0);
  const double dg = 1.0 - (q + 1.0) * std::pow(s, q);
  const double A = 0.25 * c * g;
  const double B = c * dg * A / 16.0;
  u[1] = s + A * h * h + B * h * h * h * h;
  v[1] = 2.0 * A * h + 4.0 * B * h * h * h;

  const double tail_level = kTailTolerance * s;
  std::size_t first_tail = 0;  // first node with u <= tail_level, 0 = not yet

  auto decayed = [&](std::size_t cut, bool overshoot) -> ShotOutcome {
    attach_tail(u, v, cut, grid, c);
    RadialProfile p{grid, std::move(u), std::move(v), q, s};
    return Decayed{std::move(p), grid.node(cut), overshoot};
  };

  for (std::size_t i = 1; i < n; ++i) {
    if (i > 1) {
      const State next = rk4_step(grid.node(i - 1), h, {u[i - 1], v[i - 1]}, c, q);
      u[i] = next.u;
      v[i] = next.v;
    }
    if (!std::isfinite(u[i]) || !std::isfinite(v[i]))
      return NonDecaying{grid.node(i), true};

    if (u[i] < 0.0) {
      if (first_tail == 0) {
        const double r0 = grid.node(i - 1);
        const double frac = u[i - 1] / (u[i - 1] - u[i]);
        return CrossedZero{r0 + frac * h};
      }
      return decayed(first_tail, true);
    }
    if (v[i] > 0.0) {
      if (first_tail == 0) return NonDecaying{grid.node(i), false};
      // Keep only the part of the trajectory well above the departure level.
      const double keep_above = 1e3 * u[i];
      std::size_t cut = i - 1;
      while (cut > 1 && u[cut] < keep_above) --cut;
      return decayed(std::min(std::max(cut, first_tail), i - 1), false);
    }
    if (first_tail == 0 && u[i] <= tail_level) first_tail = i;
  }

  if (u[n - 1] <= tail_level) {
    RadialProfile p{grid, std::move(u), std::move(v), q, s};
    return Decayed{std::move(p), grid.r_max, false};
  }
  return NonDecaying{grid.r_max, false};
}

double radial_integral(std::span<const double> f, const RadialGrid& grid) {
  if (f.size() != grid.n) throw ParameterError("integrand length does not match grid");
  const double h = grid.spacing();
  const std::size_t intervals = grid.n - 1;
  auto g = [&](std::size_t i) { return f[i] * grid.node(i); };

  double sum = 0.0;
  if (intervals == 1) {
    sum = 0.5 * h * (g(0) + g(1));
  } else {
    const std::size_t simpson_end = (intervals % 2 == 0) ? intervals : intervals - 3;
    double acc = 0.0;
    for (std::size_t i = 0; i + 2 <= simpson_end; i += 2)
      acc += g(i) + 4.0 * g(i + 1) + g(i + 2);
    sum = acc * h / 3.0;
    if (simpson_end != intervals) {
      const std::size_t k = simpson_end;
      sum += 3.0 * h / 8.0 * (g(k) + 3.0 * g(k + 1) + 3.0 * g(k + 2) + g(k + 3));
    }
  }
  return 2.0 * std::numbers::pi * sum;
}

std::vector<double> profile_slopes(const RadialProfile& profile) {
  if (profile.has_slopes()) return profile.slopes;
  const auto& u = profile.values;
  const std::size_t n = u.size();
  const double h = profile.grid.spacing();
  std::vector<double> d(n, 0.0);
  if (n < 5) {
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
    if (n >= 2) d[n - 1] = (u[n - 1] - u[n - 2]) / h;
    return d;
  }
  // u is even in r, so u(-r) = u(r) supplies the left stencil points.
  auto at = [&](std::ptrdiff_t i) { return u[static_cast<std::size_t>(std::abs(i))]; };
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const auto k = static_cast<std::ptrdiff_t>(i);
    d[i] = (at(k - 2) - 8.0 * at(k - 1) + 8.0 * at(k + 1) - at(k + 2)) / (12.0 * h);
  }
  // One-sided fourth-order stencils at the outer edge.
  for (std::size_t i = n - 2; i < n; ++i) {
    const double f0 = u[i], f1 = u[i - 1], f2 = u[i - 2], f3 = u[i - 3], f4 = u[i - 4];
    d[i] = (25.0 * f0 - 48.0 * f1 + 36.0 * f2 - 16.0 * f3 + 3.0 * f4) / (12.0 * h);
  }
  return d;
}

double decay_rate_fit(const RadialProfile& profile) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 1; i < profile.values.size(); ++i) {
    const double u = profile.values[i];
    if (!(u > 1e-12 && u < 1e-2)) continue;
    const double r = profile.grid.node(i);
    const double y = std::log(u) + 0.5 * std::log(r);
    sx += r;
    sy += y;
    sxx += r * r;
    sxy += r * y;
    ++count;
  }
  if (count < 20)
    throw ParameterError(fmt::format("decay fit needs 20 tail nodes in (1e-12, 1e-2), found {}", count));
  const double m = static_cast<double>(count);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  return -slope;
}

GroundStateRecord make_record(RadialProfile profile) {
  const double q = profile.q;
  const std::size_t n = profile.values.size();
  if (n != profile.grid.n) throw ParameterError("profile length does not match grid");
  const std::vector<double> du = profile_slopes(profile);
  std::vector<double> u2(n), du2(n), uq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = profile.values[i];
    u2[i] = u * u;
    du2[i] = du[i] * du[i];
    uq[i] = std::pow(std::abs(u), q + 2.0);
  }
  GroundStateRecord rec;
  rec.mass = radial_integral(u2, profile.grid);
  rec.kinetic = radial_integral(du2, profile.grid);
  rec.interaction = radial_integral(uq, profile.grid);
  rec.aq_star = std::pow(rec.mass, 0.5 * q);
  rec.gn_constant = (q + 2.0) / (2.0 * rec.aq_star);
  try {
    rec.decay_rate = decay_rate_fit(profile);
  } catch (const ParameterError&) {
    rec.decay_rate = 0.0;
  }
  rec.profile = std::move(profile);
  return rec;
}

PohozaevResiduals pohozaev_residuals(const GroundStateRecord& rec) {
  const double q = rec.q();
  return {std::abs(rec.kinetic - rec.mass) / rec.mass,
          std::abs(rec.mass - 2.0 / (q + 2.0) * rec.interaction) / rec.mass};
}

double gn_defect(double q, double aq_star, double mass, double kinetic, double interaction) {
  const double cq = (q + 2.0) / (2.0 * aq_star);
  return std::abs(interaction - cq * std::pow(kinetic, 0.5 * q) * mass) / interaction;
}

double gn_equality_check(const GroundStateRecord& rec) {
  return gn_defect(rec.q(), rec.aq_star, rec.mass, rec.kinetic, rec.interaction);
}

GroundStateRecord find_ground_state(double q, const RadialGrid& grid,
                                    const GroundStateOptions& options) {
  check_exponent(q);
  if (!(options.tol_s > 0.0)) throw ParameterError("bisection tolerance must be positive");

  double lo = 1.01;
  if (is_overshoot(shoot(q, lo, grid)))
    throw ConvergenceError(fmt::format("q = {}: no undershooting amplitude at s = {}", q, lo));
  double hi = 10.0;
  while (!is_overshoot(shoot(q, hi, grid))) {
    hi *= 2.0;
    if (hi > 1e3)
      throw ConvergenceError(fmt::format("q = {}: no overshooting amplitude below 1e3", q));
  }

  auto bisect_until = [&](double tol) {
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      (is_overshoot(shoot(q, mid, grid)) ? hi : lo) = mid;
    }
  };

  bisect_until(options.tol_s);
  ShotOutcome best = shoot(q, lo, grid);
  if (!std::holds_alternative<Decayed>(best)) {
    bisect_until(0.0);
    best = shoot(q, lo, grid);
  }
  auto* decayed = std::get_if<Decayed>(&best);
  if (decayed == nullptr)
    throw ConvergenceError(fmt::format(
        "q = {}: bisection converged to s = {} but the trajectory left the tail "
        "before decaying; increase the radial resolution",
        q, lo));

  GroundStateRecord rec = make_record(std::move(decayed->profile));
  const auto res = pohozaev_residuals(rec);
  const double worst = std::max(res.kinetic_vs_mass, res.mass_vs_interaction);
  if (worst > options.residual_threshold)
    throw ConvergenceError(fmt::format(
        "q = {}: Pohozaev residual {:.3e} above {:.1e}; refine the radial grid", q, worst,
        options.residual_threshold));
  return rec;
}

double radial_h1_distance(const RadialProfile& a, const RadialProfile& b) {
  if (!(a.grid == b.grid)) throw ParameterError("H1 distance needs profiles on the same grid");
  const auto da = profile_slopes(a);
  const auto db = profile_slopes(b);
  std::vector<double> f(a.values.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double e = a.values[i] - b.values[i];
    const double de = da[i] - db[i];
    f[i] = e * e + de * de;
  }
  return std::sqrt(std::max(radial_integral(f, a.grid), 0.0));
}

MassExtrapolation aq_star_richardson(double q, const RadialGrid& grid, const GroundStateOptions& options) {
  MassExtrapolation m;
  m.coarse = find_ground_state(q, grid, options).aq_star;
  m.fine = find_ground_state(q, grid.refined(), options).aq_star;
  m.extrapolated = m.fine + (m.fine - m.coarse) / 15.0;
  return m;
}

std::vector<ConvergenceRow> phi_to_q_convergence(std::span<const double> q_schedule,
                                                 const RadialGrid& grid,
                                                 const GroundStateOptions& options) {
  const GroundStateRecord townes = find_ground_state(2.0, grid, options);
  std::vector<ConvergenceRow> rows;
  rows.reserve(q_schedule.size());
  for (double q : q_schedule) {
    if (q == 2.0) {
      rows.push_back({q, 0.0, 0.0});
      continue;
    }
    const GroundStateRecord rec = find_ground_state(q, grid, options);
    rows.push_back({q, radial_h1_distance(rec.profile, townes.profile),
                    std::abs(rec.aq_star - townes.aq_star)});
  }
  return rows;
}

nlohmann::json to_json(const GroundStateRecord& rec) {
  return {{"q", rec.q()},
          {"shoot_param", rec.profile.shoot_param},
          {"mass", rec.mass},
          {"kinetic", rec.kinetic},
          {"interaction", rec.interaction},
          {"aq_star", rec.aq_star},
          {"gn_constant", rec.gn_constant},
          {"decay_rate", rec.decay_rate},
          {"grid", {{"r_max", rec.profile.grid.r_max}, {"n", rec.profile.grid.n}}}};
}

void write_profile_csv(std::ostream& out, const RadialProfile& profile) {
  out << "r,u\n";
  for (std::size_t i = 0; i < profile.values.size(); ++i)
    out << fmt::format("{:.17g},{:.17g}\n", profile.grid.node(i), profile.values[i]);
}

}  // namespace gpq
