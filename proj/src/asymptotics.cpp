#include "gpq/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "gpq/errors.hpp"
#include "gpq/interpolation.hpp"

namespace gpq {

namespace {

const double kInvE = std::exp(-1.0);
const double kSqrtE = std::sqrt(std::numbers::e);

}  // namespace

LimitProfile::LimitProfile(const GroundStateRecord& townes)
    : profile_(townes.profile), norm_(std::sqrt(townes.mass)) {
  if (townes.q() != 2.0) throw ParameterError("limit profile is built from the q = 2 ground state");
}

double LimitProfile::at_radius(double r) const {
  // Interpolant is rebuilt lazily per call site via sample(); single points
  // use a local one.
  const MonotoneCubic interp = profile_.has_slopes()
                                   ? MonotoneCubic(0.0, profile_.grid.spacing(), profile_.values, profile_.slopes)
                                   : MonotoneCubic(0.0, profile_.grid.spacing(), profile_.values);
  return std::max(interp.value(r / kSqrtE), 0.0) / (kSqrtE * norm_);
}

Field2D LimitProfile::sample(const Grid2D& grid) const {
  const MonotoneCubic interp = profile_.has_slopes()
                                   ? MonotoneCubic(0.0, profile_.grid.spacing(), profile_.values, profile_.slopes)
                                   : MonotoneCubic(0.0, profile_.grid.spacing(), profile_.values);
  const double c = 1.0 / (kSqrtE * norm_);
  return Field2D::sample(grid, [&](double x, double y) {
    return c * std::max(interp.value(std::hypot(x, y) / kSqrtE), 0.0);
  });
}

Field2D rescale_minimizer(const MinimizationResult& res, double eps, const Grid2D& ref) {
  if (!(eps > 0.0)) throw ParameterError("rescaling length must be positive");
  check_domain(eps, res.field.grid);
  std::vector<double> xs(ref.n), ys(ref.n);
  for (std::size_t i = 0; i < ref.n; ++i) {
    xs[i] = eps * ref.coord(i) + res.max_point[0];
    ys[i] = eps * ref.coord(i) + res.max_point[1];
  }
  Field2D w(ref, sine_interpolate(res.field, xs, ys));
  for (double& v : w.values) v *= eps;
  return w;
}

Field2D unrescale(const Field2D& wbar, double eps, Point z, const Grid2D& target) {
  if (!(eps > 0.0)) throw ParameterError("rescaling length must be positive");
  std::vector<double> xs(target.n), ys(target.n);
  for (std::size_t i = 0; i < target.n; ++i) {
    xs[i] = (target.coord(i) - z[0]) / eps;
    ys[i] = (target.coord(i) - z[1]) / eps;
  }
  Field2D u(target, sine_interpolate(wbar, xs, ys));
  for (double& v : u.values) v /= eps;
  return u;
}

nlohmann::json to_json(const Verdict& v) {
  return {{"name", v.name}, {"applicable", v.applicable}, {"pass", v.pass}, {"detail", v.detail},
          {"series", v.series}};
}

bool trend_decreasing(const std::vector<double>& values, double inversion, bool strict) {
  int inversions = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double rise = values[i] - values[i - 1];
    if (strict) {
      if (!(rise < 0.0)) return false;
      continue;
    }
    if (rise <= 1e-12) continue;
    if (rise > inversion || ++inversions > 1) return false;
  }
  return true;
}

namespace {

Verdict too_few(std::string name, std::size_t n) {
  Verdict v;
  v.name = std::move(name);
  v.pass = false;
  v.detail = fmt::format("needs at least 3 points, got {}", n);
  return v;
}

// Shared shape of the three limit verdicts: |x_k − target| non-increasing and
// the last point within tol.final_relative·|target|.
Verdict limit_verdict(std::string name, const std::vector<CampaignPoint>& pts, double target,
                      double CampaignPoint::*field, const VerdictTolerances& tol) {
  if (pts.size() < 3) return too_few(std::move(name), pts.size());
  Verdict v;
  v.name = std::move(name);
  std::vector<double> dev;
  for (const auto& p : pts) {
    v.series.push_back(p.*field);
    dev.push_back(std::abs(p.*field - target));
  }
  const bool trend = trend_decreasing(dev, tol.inversion);
  const double final_rel = dev.back() / std::abs(target);
  const bool close = final_rel <= tol.final_relative;
  v.pass = trend && close;
  v.detail = fmt::format("target {:.6f}; deviations [{}]; trend {}; final relative deviation {:.4f} (limit {})",
                         target, fmt::join(dev, ", "), trend ? "decreasing" : "NOT decreasing", final_rel,
                         tol.final_relative);
  return v;
}

}  // namespace

Verdict energy_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  return limit_verdict("energy_limit", pts, -kInvE, &CampaignPoint::scaled_energy, tol);
}

Verdict kinetic_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  return limit_verdict("kinetic_limit", pts, kInvE, &CampaignPoint::beta2, tol);
}

Verdict multiplier_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  return limit_verdict("multiplier_limit", pts, -kInvE, &CampaignPoint::scaled_mu, tol);
}

Verdict gap_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  for (const auto& p : pts)
    if (p.gap < tol.gap_floor)
      throw ConsistencyError(fmt::format(
          "energy gap {:.3e} at q = {} is below the proven lower bound; the discretization is "
          "under-resolved (refine the grid or use the spectral kinetic scheme)",
          p.gap, p.q));
  if (pts.size() < 3) return too_few("gap", pts.size());
  Verdict v;
  v.name = "gap";
  std::vector<double> gaps, pots;
  bool bounded = true;
  for (const auto& p : pts) {
    gaps.push_back(p.gap);
    pots.push_back(p.potential_energy);
    if (p.potential_energy > p.gap - tol.gap_floor) bounded = false;
  }
  v.series = gaps;
  const bool gap_trend = trend_decreasing(gaps, tol.inversion, true);
  const bool pot_trend = trend_decreasing(pots, tol.inversion);
  v.pass = gap_trend && pot_trend && bounded;
  v.detail = fmt::format("gaps [{}] {}; potential energies [{}] {}; potential <= gap {}",
                         fmt::join(gaps, ", "), gap_trend ? "strictly decreasing" : "NOT strictly decreasing",
                         fmt::join(pots, ", "), pot_trend ? "decreasing" : "NOT decreasing",
                         bounded ? "everywhere" : "VIOLATED");
  return v;
}

Verdict kinetic_window_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  if (pts.size() < 3) return too_few("kinetic_window", pts.size());
  Verdict v;
  v.name = "kinetic_window";
  bool inside = true;
  for (const auto& p : pts) {
    v.series.push_back(p.scaled_kinetic);
    if (p.scaled_kinetic < tol.window_lo || p.scaled_kinetic > tol.window_hi) inside = false;
  }
  v.pass = inside;
  v.detail = fmt::format("eps^2 * kinetic = [{}], window [{}, {}]", fmt::join(v.series, ", "),
                         tol.window_lo, tol.window_hi);
  return v;
}

Verdict profile_limit_series(const std::vector<CampaignPoint>& pts, const VerdictTolerances& tol) {
  if (pts.size() < 3) return too_few("profile_limit", pts.size());
  Verdict v;
  v.name = "profile_limit";
  for (const auto& p : pts) v.series.push_back(p.profile_l2_error);
  const bool trend = trend_decreasing(v.series, tol.inversion);
  const bool close = v.series.back() < tol.profile_error;
  v.pass = trend && close;
  v.detail = fmt::format("L2 errors [{}]; trend {}; final {:.4f} (limit {})", fmt::join(v.series, ", "),
                         trend ? "decreasing" : "NOT decreasing", v.series.back(), tol.profile_error);
  return v;
}

std::size_t nearest_well(const PotentialSpec& V, const Point& z) {
  const auto& wells = V.wells();
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < wells.size(); ++i) {
    const double d = std::hypot(z[0] - wells[i].center[0], z[1] - wells[i].center[1]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Verdict concentration_series(const std::vector<CampaignPoint>& pts, const PotentialSpec& V,
                             const FlatnessReport& flat, const VerdictTolerances& tol) {
  if (pts.size() < 3) return too_few("concentration", pts.size());
  Verdict v;
  v.name = "concentration";
  const CampaignPoint& last = pts.back();
  const std::size_t well = nearest_well(V, last.z);
  const bool in_Z = std::find(flat.Z.begin(), flat.Z.end(), well) != flat.Z.end();
  const Point c = V.wells()[well].center;
  const double dist = std::hypot(last.z[0] - c[0], last.z[1] - c[1]);
  const bool near = dist <= tol.well_distance_eps * last.eps_q;
  std::vector<double> tail;
  for (std::size_t k = pts.size() - 3; k < pts.size(); ++k) tail.push_back(pts[k].scaled_offset);
  for (const auto& p : pts) v.series.push_back(p.scaled_offset);
  const bool trend = trend_decreasing(tail, tol.inversion);
  v.pass = in_Z && near && trend;
  v.detail = fmt::format(
      "final max point ({:.5f}, {:.5f}) nearest well {} {} Z; distance {:.4g} vs {}*eps = {:.4g}; "
      "scaled offsets over last 3 points [{}] {}",
      last.z[0], last.z[1], well, in_Z ? "in" : "NOT in", dist, tol.well_distance_eps,
      tol.well_distance_eps * last.eps_q, fmt::join(tail, ", "), trend ? "decreasing" : "NOT decreasing");
  return v;
}

std::vector<CampaignPoint> synthetic_free_points(const std::vector<double>& schedule, double ratio) {
  std::vector<CampaignPoint> out;
  for (double q : schedule) {
    // a_q* cancels from every quantity used here, so any positive value works
    const FreeProblemParams p = FreeProblemParams::from_ratio(ratio, q, 1.0);
    CampaignPoint pt;
    pt.q = q;
    pt.a = p.a;
    pt.aq_star = p.aq_star;
    pt.tau_q = tau_q(p);
    pt.eps_q = eps_q(p);
    pt.tilde_d = tilde_d_closed(p);
    pt.d = pt.tilde_d;
    pt.scaled_energy = 2.0 / (2.0 - q) * pt.eps_q * pt.eps_q * pt.d;
    out.push_back(pt);
  }
  return out;
}

Field2D transform_field(const Field2D& u, const Symmetry& S) {
  const Grid2D& g = u.grid;
  const double h = g.spacing();
  Field2D out(g);
  bool exact = true;
  std::vector<std::size_t> map(g.size());
  for (std::size_t i = 0; i < g.n && exact; ++i)
    for (std::size_t j = 0; j < g.n && exact; ++j) {
      const Point x = S.apply({g.coord(i), g.coord(j)});
      const double si = (x[0] + g.L) / h;
      const double sj = (x[1] + g.L) / h;
      const double ri = std::round(si);
      const double rj = std::round(sj);
      if (std::abs(si - ri) > 1e-9 || std::abs(sj - rj) > 1e-9 || ri < 0 || rj < 0 ||
          ri > static_cast<double>(g.n - 1) || rj > static_cast<double>(g.n - 1)) {
        exact = false;
        break;
      }
      map[i * g.n + j] = static_cast<std::size_t>(ri) * g.n + static_cast<std::size_t>(rj);
    }
  if (exact) {
    for (std::size_t k = 0; k < g.size(); ++k) out.values[k] = u.values[map[k]];
    return out;
  }
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) {
      const Point x = S.apply({g.coord(i), g.coord(j)});
      out.at(i, j) = bilinear(u, x[0], x[1]);
    }
  return out;
}

SymmetryReport symmetry_breaking_detect(const std::vector<MinimizationResult>& results,
                                        const PotentialSpec& V, const Symmetry& S) {
  if (results.empty()) throw ParameterError("symmetry detection needs at least one result");
  require_symmetric(V, S);
  SymmetryReport rep;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const double d = l2_distance(results[k].field, transform_field(results[k].field, S));
    if (k == 0 || d > rep.distance) {
      rep.distance = d;
      rep.witness = k;
      rep.displacement = S.distance_to_fixed_set(results[k].max_point);
    }
  }
  rep.broken = rep.distance > kDedupeDistance;
  return rep;
}

bool CampaignReport::all_pass() const {
  for (const auto& v : verdicts)
    if (v.applicable && !v.pass) return false;
  return true;
}

std::vector<Verdict> evaluate_verdicts(const std::vector<CampaignPoint>& pts, double ratio,
                                       const PotentialSpec& V, const VerdictTolerances& tol) {
  std::vector<Verdict> out;
  out.push_back(energy_limit_series(pts, tol));
  out.push_back(kinetic_limit_series(pts, tol));
  out.push_back(multiplier_limit_series(pts, tol));
  out.push_back(gap_series(pts, tol));
  out.push_back(kinetic_window_series(pts, tol));
  out.push_back(profile_limit_series(pts, tol));
  out.push_back(concentration_series(pts, V, flatness_classify(V), tol));
  if (ratio <= 1.0) {
    // without a > a_q* there is no concentration regime to test
    for (auto& v : out) {
      v.applicable = false;
      v.detail = fmt::format("not applicable for a/a_q* = {} <= 1; {}", ratio, v.detail);
    }
  }
  return out;
}

namespace {

nlohmann::json settings_provenance(const CampaignSettings& s) {
  nlohmann::json wells = nlohmann::json::array();
  for (const auto& w : s.potential.wells())
    wells.push_back({{"center", {w.center[0], w.center[1]}}, {"exponent", w.exponent}});
  return {
      {"schedule", s.schedule},
      {"ratio", s.ratio},
      {"grid", {{"L", s.grid.L}, {"n", s.grid.n}}},
      {"radial_grid", {{"r_max", s.radial.r_max}, {"n", s.radial.n}}},
      {"reference_grid", {{"L", reference_grid().L}, {"n", reference_grid().n}}},
      {"flow",
       {{"dt", s.flow.dt},
        {"tol_residual", s.flow.tol_residual},
        {"max_iter", s.flow.max_iter},
        {"scheme", to_string(s.flow.scheme)},
        {"method", to_string(s.flow.method)}}},
      {"wells", wells},
      {"modulation", s.potential.modulation_text() ? nlohmann::json(*s.potential.modulation_text())
                                                   : nlohmann::json(nullptr)},
      {"tolerances",
       {{"final_relative", s.tolerances.final_relative},
        {"inversion", s.tolerances.inversion},
        {"profile_error", s.tolerances.profile_error},
        {"window", {s.tolerances.window_lo, s.tolerances.window_hi}},
        {"gap_floor", s.tolerances.gap_floor},
        {"well_distance_eps", s.tolerances.well_distance_eps}}},
  };
}

}  // namespace

CampaignReport run_campaign(const CampaignSettings& s, const std::string& config_hash,
                            const CampaignObserver& observer) {
  if (s.schedule.size() < 3)
    throw CampaignError(fmt::format("campaign needs at least 3 schedule points, got {}", s.schedule.size()));
  for (std::size_t k = 0; k < s.schedule.size(); ++k) {
    if (!(s.schedule[k] > 0.0 && s.schedule[k] < 2.0))
      throw ParameterError(fmt::format("schedule value {} outside (0, 2)", s.schedule[k]));
    if (k > 0 && !(s.schedule[k] > s.schedule[k - 1]))
      throw ParameterError("campaign schedule must be strictly ascending");
  }
  s.flow.validate();
  if (s.symmetry) require_symmetric(s.potential, *s.symmetry);

  const GroundStateRecord townes = find_ground_state(2.0, s.radial);
  const LimitProfile limit(townes);
  const Grid2D ref = reference_grid();
  const Field2D limit_field = limit.sample(ref);
  const unsigned threads = configured_threads();

  CampaignReport rep;
  std::optional<MinimizationResult> prev;
  double prev_eps = 0.0;
  std::vector<std::string> seeds_used;
  std::optional<Field2D> final_rescaled;

  for (double q : s.schedule) {
    const GroundStateRecord rec = find_ground_state(q, s.radial);
    const FreeProblemParams p = FreeProblemParams::from_ratio(s.ratio, q, rec.aq_star);
    const double eps = eps_q(p);
    std::string reason;
    if (!domain_ok(eps, s.grid, &reason)) {
      rep.skipped.push_back({q, reason});
      continue;
    }

    MinimizationResult res = [&] {
      if (prev) {
        NamedSeed seed{fmt::format("warm@q={}", q),
                       WarmStartSeed{std::make_shared<const Field2D>(prev->field), prev->max_point,
                                     prev_eps / eps}};
        return multi_seed_minimize({seed}, s.grid, s.potential, p.a, q, s.flow, 1).front();
      }
      std::vector<NamedSeed> seeds;
      for (std::size_t i = 0; i < s.potential.wells().size(); ++i)
        seeds.push_back({fmt::format("free@well{}", i), free_minimizer_seed(rec, p, s.potential.wells()[i].center)});
      return multi_seed_minimize(seeds, s.grid, s.potential, p.a, q, s.flow, threads).front();
    }();

    if (!res.converged) {
      rep.skipped.push_back({q, fmt::format("gradient flow did not converge in {} iterations (residual {:.3e})",
                                            res.iterations, res.residual)});
      continue;
    }

    CampaignPoint pt;
    pt.q = q;
    pt.a = p.a;
    pt.aq_star = rec.aq_star;
    pt.tau_q = tau_q(p);
    pt.eps_q = eps;
    pt.tilde_d = tilde_d_closed(p);
    pt.tilde_d_quadrature = tilde_energy_quadrature(tilde_minimizer_profile(rec, p), p);
    pt.d = res.energy;
    pt.mu = lagrange_multiplier(res, s.potential, p.a, q, s.flow.scheme);
    pt.residual = res.residual;
    pt.iterations = res.iterations;
    pt.converged = res.converged;
    pt.kinetic = res.breakdown.kinetic;
    pt.interaction = res.breakdown.interaction;
    pt.gap = pt.d - pt.tilde_d;
    pt.potential_energy = res.breakdown.potential;
    pt.scaled_energy = 2.0 / (2.0 - q) * eps * eps * pt.d;
    pt.scaled_kinetic = eps * eps * pt.kinetic;
    pt.scaled_mu = eps * eps * pt.mu;
    Field2D wbar = rescale_minimizer(res, eps, ref);
    pt.beta2 = kinetic_energy(wbar, KineticScheme::Spectral);
    pt.rescaled_mass = mass(wbar);
    pt.profile_l2_error = l2_distance(wbar, limit_field);
    pt.z = res.max_point;
    pt.max_value = res.max_value;
    pt.local_maxima = res.local_maxima.size();
    pt.nearest_well = nearest_well(s.potential, pt.z);
    const Point c = s.potential.wells()[pt.nearest_well].center;
    pt.scaled_offset = std::hypot(pt.z[0] - c[0], pt.z[1] - c[1]) / eps;
    pt.seed = res.seed_name;

    rep.points.push_back(pt);
    seeds_used.push_back(res.seed_name);
    if (observer) observer(pt);
    final_rescaled = std::move(wbar);
    prev = std::move(res);
    prev_eps = eps;
  }

  if (rep.points.size() < 3)
    throw CampaignError(fmt::format("only {} valid campaign points (need 3); skipped: {}", rep.points.size(),
                                    [&] {
                                      std::string out;
                                      for (const auto& sk : rep.skipped)
                                        out += fmt::format("[q={}: {}] ", sk.q, sk.reason);
                                      return out;
                                    }()));

  rep.verdicts = evaluate_verdicts(rep.points, s.ratio, s.potential, s.tolerances);
  if (s.symmetry) {
    rep.symmetry = symmetry_breaking_detect({*prev}, s.potential, *s.symmetry);
    Verdict v;
    v.name = "symmetry_breaking";
    v.pass = rep.symmetry->broken;
    v.detail = fmt::format("reflection distance {:.4f} (threshold {}), max point {:.4f} from the fixed set",
                           rep.symmetry->distance, kDedupeDistance, rep.symmetry->displacement);
    v.series = {rep.symmetry->distance};
    rep.verdicts.push_back(v);
  }

  const std::size_t mid = ref.n / 2;
  for (std::size_t i = 0; i < ref.n; ++i) {
    rep.overlay.x.push_back(ref.coord(i));
    rep.overlay.wbar.push_back(final_rescaled->at(i, mid));
    rep.overlay.limit.push_back(limit_field.at(i, mid));
  }
  rep.final_field = prev->field;

  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& sk : rep.skipped) skipped.push_back({{"q", sk.q}, {"reason", sk.reason}});
  rep.provenance = {
      {"config_hash", config_hash},
      {"settings", settings_provenance(s)},
      {"seeds", seeds_used},
      {"skipped", skipped},
      {"townes", {{"shoot_param", townes.profile.shoot_param}, {"mass", townes.mass}}},
      {"threads", threads},
  };
  return rep;
}

nlohmann::json to_json(const CampaignPoint& p) {
  return {
      {"q", p.q},
      {"a", p.a},
      {"aq_star", p.aq_star},
      {"tau_q", p.tau_q},
      {"eps_q", p.eps_q},
      {"tilde_d", p.tilde_d},
      {"tilde_d_quadrature", p.tilde_d_quadrature},
      {"d", p.d},
      {"mu", p.mu},
      {"residual", p.residual},
      {"iterations", p.iterations},
      {"converged", p.converged},
      {"kinetic", p.kinetic},
      {"interaction", p.interaction},
      {"gap", p.gap},
      {"potential_energy", p.potential_energy},
      {"scaled_energy", p.scaled_energy},
      {"scaled_kinetic", p.scaled_kinetic},
      {"scaled_mu", p.scaled_mu},
      {"beta2", p.beta2},
      {"rescaled_mass", p.rescaled_mass},
      {"profile_l2_error", p.profile_l2_error},
      {"z", {p.z[0], p.z[1]}},
      {"max_value", p.max_value},
      {"local_maxima", p.local_maxima},
      {"nearest_well", p.nearest_well},
      {"scaled_offset", p.scaled_offset},
      {"seed", p.seed},
  };
}

CampaignPoint campaign_point_from_json(const nlohmann::json& j) {
  CampaignPoint p;
  j.at("q").get_to(p.q);
  j.at("a").get_to(p.a);
  j.at("aq_star").get_to(p.aq_star);
  j.at("tau_q").get_to(p.tau_q);
  j.at("eps_q").get_to(p.eps_q);
  j.at("tilde_d").get_to(p.tilde_d);
  j.at("tilde_d_quadrature").get_to(p.tilde_d_quadrature);
  j.at("d").get_to(p.d);
  j.at("mu").get_to(p.mu);
  j.at("residual").get_to(p.residual);
  j.at("iterations").get_to(p.iterations);
  j.at("converged").get_to(p.converged);
  j.at("kinetic").get_to(p.kinetic);
  j.at("interaction").get_to(p.interaction);
  j.at("gap").get_to(p.gap);
  j.at("potential_energy").get_to(p.potential_energy);
  j.at("scaled_energy").get_to(p.scaled_energy);
  j.at("scaled_kinetic").get_to(p.scaled_kinetic);
  j.at("scaled_mu").get_to(p.scaled_mu);
  j.at("beta2").get_to(p.beta2);
  j.at("rescaled_mass").get_to(p.rescaled_mass);
  j.at("profile_l2_error").get_to(p.profile_l2_error);
  p.z = {j.at("z").at(0).get<double>(), j.at("z").at(1).get<double>()};
  j.at("max_value").get_to(p.max_value);
  j.at("local_maxima").get_to(p.local_maxima);
  j.at("nearest_well").get_to(p.nearest_well);
  j.at("scaled_offset").get_to(p.scaled_offset);
  j.at("seed").get_to(p.seed);
  return p;
}

}  // namespace gpq
