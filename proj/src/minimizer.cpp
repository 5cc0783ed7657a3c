#include "gpq/minimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include <fmt/format.h>

#include "gpq/errors.hpp"

namespace gpq {

FreeMinimizerSeed free_minimizer_seed(const GroundStateRecord& rec, const FreeProblemParams& p,
                                      Point center) {
  return FreeMinimizerSeed{center, std::make_shared<const RadialProfile>(tilde_minimizer_profile(rec, p))};
}

namespace {

void zero_boundary(Field2D& f) {
  const std::size_t n = f.grid.n;
  for (std::size_t k = 0; k < n; ++k) f.at(0, k) = f.at(n - 1, k) = f.at(k, 0) = f.at(k, n - 1) = 0.0;
}

// Values this small carry no information at double precision but turn into
// subnormals in the transforms, which slows FFTs by orders of magnitude.
constexpr double kFlushBelow = 1e-150;

// Negative values below -tolerance * max are set to zero; smaller ones are
// kept (see FlowConfig::clip_tolerance).
void clip_and_normalize(Field2D& f, double tolerance = 0.0) {
  double top = 0.0;
  for (double v : f.values) top = std::max(top, v);
  const double floor = -tolerance * top;
  for (double& v : f.values) {
    if (v < floor || std::abs(v) < kFlushBelow) v = 0.0;
  }
  zero_boundary(f);
  normalize(f);
}

}  // namespace

Field2D make_seed(const SeedRecipe& seed, const Grid2D& grid) {
  Field2D out = std::visit(
      [&](const auto& s) -> Field2D {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GaussianSeed>) {
          if (!(s.width > 0.0)) throw ParameterError("gaussian seed width must be positive");
          const double w2 = 2.0 * s.width * s.width;
          return Field2D::sample(grid, [&](double x, double y) {
            const double dx = x - s.center[0];
            const double dy = y - s.center[1];
            return std::exp(-(dx * dx + dy * dy) / w2);
          });
        } else if constexpr (std::is_same_v<T, FreeMinimizerSeed>) {
          if (!s.profile) throw ParameterError("free-minimizer seed has no profile");
          return embed_radial(*s.profile, grid, s.center[0], s.center[1]);
        } else {
          if (!s.previous) throw ParameterError("warm-start seed has no previous field");
          if (!(s.scale > 0.0)) throw ParameterError("warm-start scale must be positive");
          std::vector<double> xs(grid.n), ys(grid.n);
          for (std::size_t i = 0; i < grid.n; ++i) {
            xs[i] = s.center[0] + s.scale * (grid.coord(i) - s.center[0]);
            ys[i] = s.center[1] + s.scale * (grid.coord(i) - s.center[1]);
          }
          Field2D f(grid, sine_interpolate(*s.previous, xs, ys));
          for (double& v : f.values) v *= s.scale;
          return f;
        }
      },
      seed);
  clip_and_normalize(out);
  return out;
}

std::string to_string(FlowMethod m) {
  return m == FlowMethod::Explicit ? "explicit" : "preconditioned";
}

FlowMethod flow_method_from_string(const std::string& s) {
  if (s == "explicit") return FlowMethod::Explicit;
  if (s == "preconditioned") return FlowMethod::Preconditioned;
  throw ParameterError(fmt::format("unknown flow method '{}' (explicit | preconditioned)", s));
}

void FlowConfig::validate() const {
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw ParameterError("flow dt must be positive (or 0 for the default)");
  if (!(tol_residual > 0.0)) throw ParameterError("flow tol_residual must be positive");
  if (max_iter < 1) throw ParameterError("flow max_iter must be at least 1");
  if (!(clip_tolerance >= 0.0 && clip_tolerance < 1.0))
    throw ParameterError("flow clip_tolerance must lie in [0, 1)");
}

double FlowConfig::initial_dt(const Grid2D& grid) const {
  if (dt > 0.0) return dt;
  const double h = grid.spacing();
  return method == FlowMethod::Explicit ? 0.1 * h * h : 0.02;
}

namespace {

// u|u|^q, the derivative of |u|^{q+2}/(q+2)
double odd_power(double u, double q) { return std::copysign(std::pow(std::abs(u), q + 1.0), u); }

struct Evaluated {
  double kinetic, potential, interaction, total;
};

double interior_sum(const Grid2D& g, const auto& fn) {
  const std::size_t n = g.n;
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) row += fn(i * n + j);
    total += row;
  }
  const double h = g.spacing();
  return total * h * h;
}

// Fields handled here vanish on the boundary ring, so interior sums agree
// with the trapezoid rule used by energy().
Evaluated evaluate(const Field2D& u, const Field2D& Au, const Field2D& Vg, double a, double q) {
  const auto& uv = u.values;
  Evaluated e{};
  e.kinetic = interior_sum(u.grid, [&](std::size_t k) { return uv[k] * Au.values[k]; });
  e.potential = interior_sum(u.grid, [&](std::size_t k) { return Vg.values[k] * uv[k] * uv[k]; });
  e.interaction = interior_sum(u.grid, [&](std::size_t k) { return std::pow(std::abs(uv[k]), q + 2.0); });
  e.total = e.kinetic + e.potential - 2.0 * a / (q + 2.0) * e.interaction;
  return e;
}

// Where the constraint u >= 0 is active, a positive residual only pushes u
// further into the constraint and is not a stationarity defect.
double projected(double r, double u) { return u != 0.0 ? r : std::min(r, 0.0); }

double slack(const Evaluated& e, double a, double q) {
  return kEnergySlack * (std::abs(e.kinetic) + std::abs(e.potential) +
                         2.0 * a / (q + 2.0) * std::abs(e.interaction) + 1.0);
}

}  // namespace

double stationarity_residual(const Field2D& u, const Field2D& Vg, double a, double q,
                             const DirichletOperator& op, double* mu_out) {
  const Field2D Au = op.apply(u);
  const Evaluated e = evaluate(u, Au, Vg, a, q);
  const double mu = e.kinetic + e.potential - a * e.interaction;
  if (mu_out) *mu_out = mu;
  const auto& uv = u.values;
  return std::sqrt(interior_sum(u.grid, [&](std::size_t k) {
    const double r =
        projected(Au.values[k] + Vg.values[k] * uv[k] - a * odd_power(uv[k], q) - mu * uv[k], uv[k]);
    return r * r;
  }));
}

MinimizationResult normalized_gradient_flow(const Field2D& seed, const PotentialSpec& V, double a,
                                            double q, const FlowConfig& cfg) {
  cfg.validate();
  if (!(a >= 0.0) || !std::isfinite(a)) throw ParameterError(fmt::format("coupling a = {} must be non-negative", a));
  if (!(q > 0.0 && q < 2.0)) throw ParameterError(fmt::format("flow needs q in (0, 2), got {}", q));
  if (!seed.all_finite()) throw ParameterError("seed field is not finite");

  const Grid2D& grid = seed.grid;
  const std::size_t total = grid.size();
  const DirichletOperator op(grid, cfg.scheme);
  const Field2D Vg = V.sample(grid);

  Field2D u = seed;
  clip_and_normalize(u, cfg.clip_tolerance);
  Field2D Au = op.apply(u);
  Evaluated E = evaluate(u, Au, Vg, a, q);

  // Diagonal part of the preconditioner, (1 + dt V)^{-1/2}; rebuilt when dt changes.
  std::vector<double> dscale;
  double dscale_dt = -1.0;

  Field2D grad(grid), cand(grid), Acand(grid);
  double dt = cfg.initial_dt(grid);
  const double dt_max = kMaxDtGrowth * dt;
  int streak = 0;
  double residual = 0.0;
  double mu = 0.0;
  bool converged = false;
  std::size_t it = 0;

  for (;; ++it) {
    mu = E.kinetic + E.potential - a * E.interaction;
    for (std::size_t k = 0; k < total; ++k) {
      const double uk = u.values[k];
      grad.values[k] = Au.values[k] + Vg.values[k] * uk - a * odd_power(uk, q);
    }
    zero_boundary(grad);
    residual = std::sqrt(interior_sum(grid, [&](std::size_t k) {
      const double r = projected(grad.values[k] - mu * u.values[k], u.values[k]);
      return r * r;
    }));
    if (residual < cfg.tol_residual) {
      converged = true;
      break;
    }
    if (it >= cfg.max_iter) break;

    int halvings = 0;
    for (;;) {
      if (cfg.method == FlowMethod::Explicit) {
        for (std::size_t k = 0; k < total; ++k) cand.values[k] = u.values[k] - dt * grad.values[k];
      } else {
        if (dscale_dt != dt) {
          dscale.resize(total);
          for (std::size_t k = 0; k < total; ++k) dscale[k] = 1.0 / std::sqrt(1.0 + dt * Vg.values[k]);
          dscale_dt = dt;
        }
        for (std::size_t k = 0; k < total; ++k)
          cand.values[k] = dscale[k] * (grad.values[k] - mu * u.values[k]);
        op.resolvent(cand, dt);
        for (std::size_t k = 0; k < total; ++k)
          cand.values[k] = u.values[k] - dt * dscale[k] * cand.values[k];
      }
      clip_and_normalize(cand, cfg.clip_tolerance);
      op.apply(cand, Acand);
      const Evaluated Ec = evaluate(cand, Acand, Vg, a, q);
      if (std::isfinite(Ec.total) && Ec.total <= E.total + slack(E, a, q)) {
        std::swap(u.values, cand.values);
        std::swap(Au.values, Acand.values);
        E = Ec;
        break;
      }
      dt *= 0.5;
      if (++halvings > kMaxHalvings)
        throw ConvergenceError(fmt::format(
            "gradient flow diverged: energy still increasing after {} step halvings (iteration {}, dt {:.3g})",
            kMaxHalvings, it, dt));
    }
    if (halvings == 0) {
      if (++streak >= 10) {
        dt = std::min(1.1 * dt, dt_max);
        streak = 0;
      }
    } else {
      streak = 0;
    }
  }

  MinimizationResult res{u, 0.0, 0.0, 0.0, 0, false, {0.0, 0.0}, 0.0, 0.0, {}, {}, 0.0, {}, 0.0, 0.0};
  res.residual = residual;
  res.iterations = it;
  res.converged = converged;
  res.final_dt = dt;
  res.a = a;
  res.q = q;
  res.breakdown = energy(u, Vg, a, q, op);
  res.energy = res.breakdown.total;
  res.mu = E.kinetic + E.potential - a * E.interaction;
  const MaxPoint mp = locate_max(u);
  res.max_point = mp.point;
  res.max_value = mp.value;
  res.min_value = *std::min_element(u.values.begin(), u.values.end());
  res.local_maxima = mp.local_maxima;
  return res;
}

MaxPoint locate_max(const Field2D& f) {
  const Grid2D& g = f.grid;
  const std::size_t n = g.n;
  const auto it = std::max_element(f.values.begin(), f.values.end());
  const auto k = static_cast<std::size_t>(it - f.values.begin());
  const std::size_t i = k / n;
  const std::size_t j = k % n;
  if (i == 0 || j == 0 || i == n - 1 || j == n - 1)
    throw DomainError(fmt::format("field maximum lies on the boundary at ({}, {}); enlarge the box",
                                  g.coord(i), g.coord(j)));
  const double h = g.spacing();
  const double f0 = f.at(i, j);
  const double fxp = f.at(i + 1, j), fxm = f.at(i - 1, j);
  const double fyp = f.at(i, j + 1), fym = f.at(i, j - 1);
  const double gx = (fxp - fxm) / (2.0 * h);
  const double gy = (fyp - fym) / (2.0 * h);
  const double hxx = (fxp - 2.0 * f0 + fxm) / (h * h);
  const double hyy = (fyp - 2.0 * f0 + fym) / (h * h);
  const double hxy = (f.at(i + 1, j + 1) - f.at(i + 1, j - 1) - f.at(i - 1, j + 1) + f.at(i - 1, j - 1)) /
                     (4.0 * h * h);
  double dx = 0.0, dy = 0.0;
  const double det = hxx * hyy - hxy * hxy;
  if (hxx < 0.0 && det > 0.0) {
    dx = -(hyy * gx - hxy * gy) / det;
    dy = -(hxx * gy - hxy * gx) / det;
  }
  if (std::abs(dx) > h || std::abs(dy) > h) {
    // fall back to separable parabolas, clamped to the cell
    dx = hxx < 0.0 ? std::clamp(-gx / hxx, -0.5 * h, 0.5 * h) : 0.0;
    dy = hyy < 0.0 ? std::clamp(-gy / hyy, -0.5 * h, 0.5 * h) : 0.0;
  }
  MaxPoint out;
  out.point = {g.coord(i) + dx, g.coord(j) + dy};
  out.value = f0 + 0.5 * (gx * dx + gy * dy);

  const double half = 0.5 * f0;
  for (std::size_t a = 1; a + 1 < n; ++a) {
    for (std::size_t b = 1; b + 1 < n; ++b) {
      const double v = f.at(a, b);
      if (!(v > half)) continue;
      bool peak = true;
      for (int da = -1; da <= 1 && peak; ++da)
        for (int db = -1; db <= 1 && peak; ++db) {
          if (da == 0 && db == 0) continue;
          const double w = f.at(a + da, b + db);
          // ties are broken towards the lexicographically first node
          if (w > v || (w == v && (da < 0 || (da == 0 && db < 0)))) peak = false;
        }
      if (peak) out.local_maxima.push_back({g.coord(a), g.coord(b)});
    }
  }
  return out;
}

double lagrange_multiplier(const MinimizationResult& res, const PotentialSpec& V, double a, double q,
                           KineticScheme scheme) {
  const double mu = res.energy - q * a / (q + 2.0) * res.breakdown.interaction;
  const DirichletOperator op(res.field.grid, scheme);
  const Field2D Vg = V.sample(res.field.grid);
  const Field2D Au = op.apply(res.field);
  const Evaluated e = evaluate(res.field, Au, Vg, a, q);
  const double rayleigh = e.kinetic + e.potential - a * e.interaction;
  const double mismatch = std::abs(mu - rayleigh) / std::max(1.0, std::abs(rayleigh));
  if (mismatch > 1e-4)
    throw ConsistencyError(fmt::format(
        "Lagrange multiplier {:.10g} disagrees with the Rayleigh form {:.10g}", mu, rayleigh));
  return mu;
}

std::vector<MinimizationResult> multi_seed_minimize(const std::vector<NamedSeed>& seeds,
                                                    const Grid2D& grid, const PotentialSpec& V,
                                                    double a, double q, const FlowConfig& cfg,
                                                    unsigned threads) {
  if (seeds.empty()) throw ParameterError("multi-seed minimization needs at least one seed");
  std::vector<std::optional<MinimizationResult>> slots(seeds.size());
  std::vector<std::exception_ptr> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < seeds.size();) {
      try {
        MinimizationResult r = normalized_gradient_flow(make_seed(seeds[k].recipe, grid), V, a, q, cfg);
        r.seed_name = seeds[k].name;
        slots[k] = std::move(r);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(seeds.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<MinimizationResult> all;
  for (auto& s : slots) all.push_back(std::move(*s));
  std::stable_sort(all.begin(), all.end(),
                   [](const auto& x, const auto& y) { return x.energy < y.energy; });
  std::vector<MinimizationResult> kept;
  for (auto& r : all) {
    bool dup = false;
    for (const auto& k : kept)
      if (l2_distance(r.field, k.field) <= kDedupeDistance) dup = true;
    if (!dup) kept.push_back(std::move(r));
  }
  return kept;
}

unsigned configured_threads() {
  const char* env = std::getenv("GPQ_THREADS");
  if (env == nullptr || *env == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 1024)
    throw ParameterError(fmt::format("GPQ_THREADS='{}' is not a thread count in [1, 1024]", env));
  return static_cast<unsigned>(v);
}

bool domain_ok(double eps, const Grid2D& grid, std::string* reason) {
  const double h = grid.spacing();
  const double width = std::sqrt(std::numbers::e) * eps;
  if (width < 4.0 * h) {
    if (reason)
      *reason = fmt::format("profile width sqrt(e)*eps = {:.4g} is below 4h = {:.4g}; refine the grid",
                            width, 4.0 * h);
    return false;
  }
  if (6.0 * eps > grid.L) {
    if (reason)
      *reason = fmt::format("6*eps = {:.4g} exceeds the half-width L = {:.4g}; enlarge the box",
                            6.0 * eps, grid.L);
    return false;
  }
  return true;
}

void check_domain(double eps, const Grid2D& grid) {
  std::string reason;
  if (!domain_ok(eps, grid, &reason)) throw DomainError(reason);
}

nlohmann::json to_json(const MinimizationResult& res) {
  nlohmann::json maxima = nlohmann::json::array();
  for (const auto& p : res.local_maxima) maxima.push_back({p[0], p[1]});
  return {
      {"seed", res.seed_name},
      {"a", res.a},
      {"q", res.q},
      {"energy", res.energy},
      {"mu", res.mu},
      {"residual", res.residual},
      {"iterations", res.iterations},
      {"converged", res.converged},
      {"max_point", {res.max_point[0], res.max_point[1]}},
      {"max_value", res.max_value},
      {"min_value", res.min_value},
      {"local_maxima", maxima},
      {"kinetic", res.breakdown.kinetic},
      {"potential", res.breakdown.potential},
      {"interaction", res.breakdown.interaction},
      {"final_dt", res.final_dt},
      {"grid", {{"L", res.field.grid.L}, {"n", res.field.grid.n}}},
  };
}

}  // namespace gpq
