#include "gpq/field2d.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <numbers>

#include <fmt/format.h>
#include <json.hpp>

#include "gpq/errors.hpp"
#include "gpq/interpolation.hpp"
#include "gpq/sine_transform.hpp"

namespace gpq {

Grid2D Grid2D::make(double L, std::size_t n) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw ParameterError(fmt::format("grid half-width L = {} must be positive", L));
  if (n < 16) throw ParameterError(fmt::format("grid needs n >= 16 nodes per axis, got {}", n));
  return Grid2D{L, n};
}

Field2D::Field2D(Grid2D g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw ParameterError(fmt::format("field has {} values, grid needs {}", values.size(), grid.size()));
}

Field2D Field2D::sample(const Grid2D& g, const std::function<double(double, double)>& f) {
  Field2D out(g);
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = 0; j < g.n; ++j) out.at(i, j) = f(g.coord(i), g.coord(j));
  return out;
}

bool Field2D::all_finite() const {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string to_string(KineticScheme s) {
  return s == KineticScheme::Spectral ? "spectral" : "finite_difference";
}

KineticScheme kinetic_scheme_from_string(const std::string& s) {
  if (s == "spectral") return KineticScheme::Spectral;
  if (s == "finite_difference" || s == "fd") return KineticScheme::FiniteDifference;
  throw ParameterError(fmt::format("unknown kinetic scheme '{}' (spectral | finite_difference)", s));
}

Field2D laplacian(const Field2D& f) {
  const std::size_t n = f.grid.n;
  const double inv_h2 = 1.0 / (f.grid.spacing() * f.grid.spacing());
  Field2D out(f.grid);
  auto get = [&](std::ptrdiff_t i, std::ptrdiff_t j) {
    if (i < 0 || j < 0 || i >= static_cast<std::ptrdiff_t>(n) || j >= static_cast<std::ptrdiff_t>(n))
      return 0.0;
    return f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const auto ii = static_cast<std::ptrdiff_t>(i);
      const auto jj = static_cast<std::ptrdiff_t>(j);
      out.at(i, j) = (get(ii + 1, jj) + get(ii - 1, jj) + get(ii, jj + 1) + get(ii, jj - 1) -
                      4.0 * f.at(i, j)) * inv_h2;
    }
  }
  return out;
}

struct DirichletOperator::Impl {
  SineTransform transform;
  std::vector<double> lambda1;  // per-axis eigenvalues
  std::vector<double> symbol;   // lambda1[k] + lambda1[l]
  mutable std::vector<double> work;
  mutable std::vector<double> shifted;

  explicit Impl(std::size_t N) : transform(N), work(N * N), shifted(N * N) {}
};

DirichletOperator::DirichletOperator(const Grid2D& grid, KineticScheme scheme)
    : grid_(grid), scheme_(scheme), impl_(std::make_unique<Impl>(grid.interior())) {
  const std::size_t N = grid.interior();
  const double h = grid.spacing();
  impl_->lambda1.resize(N);
  for (std::size_t k = 0; k < N; ++k) {
    const double kk = static_cast<double>(k + 1);
    if (scheme == KineticScheme::Spectral) {
      const double w = kk * std::numbers::pi / (2.0 * grid.L);
      impl_->lambda1[k] = w * w;
    } else {
      const double s = std::sin(kk * std::numbers::pi / (2.0 * static_cast<double>(N + 1)));
      impl_->lambda1[k] = 4.0 * s * s / (h * h);
    }
  }
  impl_->symbol.resize(N * N);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t l = 0; l < N; ++l) impl_->symbol[k * N + l] = impl_->lambda1[k] + impl_->lambda1[l];
}

DirichletOperator::~DirichletOperator() = default;
DirichletOperator::DirichletOperator(DirichletOperator&&) noexcept = default;
DirichletOperator& DirichletOperator::operator=(DirichletOperator&&) noexcept = default;

double DirichletOperator::eigenvalue(std::size_t k, std::size_t l) const {
  if (k < 1 || l < 1 || k > grid_.interior() || l > grid_.interior())
    throw ParameterError("sine mode index out of range");
  return impl_->lambda1[k - 1] + impl_->lambda1[l - 1];
}

namespace {

void gather_interior(const Field2D& f, std::vector<double>& out) {
  const std::size_t n = f.grid.n;
  const std::size_t N = n - 2;
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) out[a * N + b] = f.at(a + 1, b + 1);
}

void scatter_interior(const std::vector<double>& in, Field2D& f) {
  const std::size_t n = f.grid.n;
  const std::size_t N = n - 2;
  for (std::size_t j = 0; j < n; ++j) {
    f.at(0, j) = 0.0;
    f.at(n - 1, j) = 0.0;
    f.at(j, 0) = 0.0;
    f.at(j, n - 1) = 0.0;
  }
  for (std::size_t a = 0; a < N; ++a)
    for (std::size_t b = 0; b < N; ++b) f.at(a + 1, b + 1) = in[a * N + b];
}

}  // namespace

void DirichletOperator::apply(const Field2D& f, Field2D& out) const {
  if (f.grid != grid_ || out.grid != grid_) throw ParameterError("operator grid mismatch");
  if (scheme_ == KineticScheme::FiniteDifference) {
    // The stencil is cheaper than two transforms and identical on the interior.
    const std::size_t n = grid_.n;
    const double inv_h2 = 1.0 / (grid_.spacing() * grid_.spacing());
    for (std::size_t j = 0; j < n; ++j) {
      out.at(0, j) = out.at(n - 1, j) = out.at(j, 0) = out.at(j, n - 1) = 0.0;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t j = 1; j + 1 < n; ++j) {
        auto in = [&](std::size_t a, std::size_t b) {
          return (a == 0 || b == 0 || a == n - 1 || b == n - 1) ? 0.0 : f.at(a, b);
        };
        out.at(i, j) = (4.0 * f.at(i, j) - in(i + 1, j) - in(i - 1, j) - in(i, j + 1) - in(i, j - 1)) *
                       inv_h2;
      }
    }
    return;
  }
  gather_interior(f, impl_->work);
  impl_->transform.multiply(impl_->work, impl_->symbol);
  scatter_interior(impl_->work, out);
}

Field2D DirichletOperator::apply(const Field2D& f) const {
  Field2D out(grid_);
  apply(f, out);
  return out;
}

void DirichletOperator::resolvent(Field2D& f, double s) const {
  if (f.grid != grid_) throw ParameterError("operator grid mismatch");
  if (!(s >= 0.0)) throw ParameterError("resolvent shift must be non-negative");
  for (std::size_t k = 0; k < impl_->symbol.size(); ++k) impl_->shifted[k] = 1.0 / (1.0 + s * impl_->symbol[k]);
  gather_interior(f, impl_->work);
  impl_->transform.multiply(impl_->work, impl_->shifted);
  scatter_interior(impl_->work, f);
}

Field2D spectral_laplacian(const Field2D& f) {
  DirichletOperator op(f.grid, KineticScheme::Spectral);
  Field2D out = op.apply(f);
  for (double& v : out.values) v = -v;
  return out;
}

namespace {

template <class F>
double trapezoid(const Grid2D& g, F&& value) {
  const std::size_t n = g.n;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double wj = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      row += wj * value(i * n + j);
    }
    total += wi * row;
  }
  const double h = g.spacing();
  return total * h * h;
}

}  // namespace

double integrate(const Field2D& f) {
  return trapezoid(f.grid, [&](std::size_t k) { return f.values[k]; });
}

double mass(const Field2D& f) {
  return trapezoid(f.grid, [&](std::size_t k) { return f.values[k] * f.values[k]; });
}

double p_norm_power(const Field2D& f, double p) {
  if (!(p > 0.0)) throw ParameterError("norm exponent must be positive");
  return trapezoid(f.grid, [&](std::size_t k) { return std::pow(std::abs(f.values[k]), p); });
}

double l2_distance(const Field2D& a, const Field2D& b) {
  if (a.grid != b.grid) throw ParameterError("fields live on different grids");
  return std::sqrt(trapezoid(a.grid, [&](std::size_t k) {
    const double d = a.values[k] - b.values[k];
    return d * d;
  }));
}

double kinetic_energy(const Field2D& f, KineticScheme scheme) {
  if (scheme == KineticScheme::FiniteDifference) {
    const std::size_t n = f.grid.n;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j <= n; ++j) {
        // edges (i, j-1)–(i, j) and (j-1, i)–(j, i), ghosts are zero
        const double y0 = j == 0 ? 0.0 : f.at(i, j - 1);
        const double y1 = j == n ? 0.0 : f.at(i, j);
        const double x0 = j == 0 ? 0.0 : f.at(j - 1, i);
        const double x1 = j == n ? 0.0 : f.at(j, i);
        row += (y1 - y0) * (y1 - y0) + (x1 - x0) * (x1 - x0);
      }
      total += row;
    }
    return total;
  }
  DirichletOperator op(f.grid, scheme);
  return kinetic_energy(f, op);
}

double kinetic_energy(const Field2D& f, const DirichletOperator& op) {
  if (op.scheme() == KineticScheme::FiniteDifference) return kinetic_energy(f, op.scheme());
  const Field2D Au = op.apply(f);
  const std::size_t n = f.grid.n;
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) row += f.at(i, j) * Au.at(i, j);
    total += row;
  }
  const double h = f.grid.spacing();
  return total * h * h;
}

namespace {

EnergyBreakdown finish_energy(const Field2D& f, const Field2D& V, double a, double q, double kinetic) {
  EnergyBreakdown e;
  e.kinetic = kinetic;
  e.potential = trapezoid(f.grid, [&](std::size_t k) { return V.values[k] * f.values[k] * f.values[k]; });
  e.interaction = p_norm_power(f, q + 2.0);
  e.total = e.kinetic + e.potential - 2.0 * a / (q + 2.0) * e.interaction;
  return e;
}

void check_energy_inputs(const Field2D& f, const Field2D& V, double a, double q) {
  if (f.grid != V.grid) throw ParameterError("field and potential live on different grids");
  if (!(a >= 0.0)) throw ParameterError(fmt::format("coupling a = {} must be non-negative", a));
  if (!(q > 0.0 && q <= 2.0)) throw ParameterError(fmt::format("q = {} outside (0, 2]", q));
  const double m = mass(f);
  if (std::abs(m - 1.0) > kNormalizedTolerance)
    throw ParameterError(fmt::format("energy is defined on unit-mass fields, mass = {:.12g}", m));
}

}  // namespace

EnergyBreakdown energy(const Field2D& f, const Field2D& V, double a, double q, KineticScheme scheme) {
  check_energy_inputs(f, V, a, q);
  return finish_energy(f, V, a, q, kinetic_energy(f, scheme));
}

EnergyBreakdown energy(const Field2D& f, const Field2D& V, double a, double q,
                       const DirichletOperator& op) {
  check_energy_inputs(f, V, a, q);
  return finish_energy(f, V, a, q, kinetic_energy(f, op));
}

void normalize(Field2D& f) {
  const double m = mass(f);
  if (!(m > 0.0) || !std::isfinite(m)) throw ParameterError("cannot normalize a zero or non-finite field");
  const double s = 1.0 / std::sqrt(m);
  for (double& v : f.values) v *= s;
}

Field2D embed_radial(const RadialProfile& profile, const Grid2D& grid, double cx, double cy) {
  const double hr = profile.grid.spacing();
  const MonotoneCubic interp = profile.has_slopes()
                                   ? MonotoneCubic(0.0, hr, profile.values, profile.slopes)
                                   : MonotoneCubic(0.0, hr, profile.values);
  return Field2D::sample(grid, [&](double x, double y) {
    return std::max(interp.value(std::hypot(x - cx, y - cy)), 0.0);
  });
}

std::vector<double> sine_interpolate(const Field2D& f, std::span<const double> xs,
                                     std::span<const double> ys) {
  const Grid2D& g = f.grid;
  const std::size_t N = g.interior();
  std::vector<double> coef(N * N);
  gather_interior(f, coef);
  SineTransform transform(N);
  transform.apply(coef);
  // DST-I carries a factor 2 per axis; the series coefficients are Y/(N+1)²
  const double norm = 4.0 * transform.normalization();
  for (double& c : coef) c *= norm;

  auto basis = [&](std::span<const double> pts) {
    std::vector<double> S(pts.size() * N, 0.0);
    for (std::size_t p = 0; p < pts.size(); ++p) {
      const double t = (pts[p] + g.L) / (2.0 * g.L);
      if (!(t >= 0.0 && t <= 1.0)) continue;
      for (std::size_t k = 0; k < N; ++k)
        S[p * N + k] = std::sin(static_cast<double>(k + 1) * std::numbers::pi * t);
    }
    return S;
  };
  const std::vector<double> Sx = basis(xs);
  const std::vector<double> Sy = basis(ys);
  const std::size_t mx = xs.size();
  const std::size_t my = ys.size();

  // T = C Syᵀ  (N × my), then R = Sx T  (mx × my).
  std::vector<double> T(N * my, 0.0);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t p = 0; p < my; ++p) {
      double s = 0.0;
      for (std::size_t l = 0; l < N; ++l) s += coef[k * N + l] * Sy[p * N + l];
      T[k * my + p] = s;
    }
  std::vector<double> R(mx * my, 0.0);
  for (std::size_t p = 0; p < mx; ++p)
    for (std::size_t k = 0; k < N; ++k) {
      const double w = Sx[p * N + k];
      if (w == 0.0) continue;
      const double* trow = &T[k * my];
      double* rrow = &R[p * my];
      for (std::size_t r = 0; r < my; ++r) rrow[r] += w * trow[r];
    }
  return R;
}

double bilinear(const Field2D& f, double x, double y) {
  const Grid2D& g = f.grid;
  const double h = g.spacing();
  const double s = (x + g.L) / h;
  const double t = (y + g.L) / h;
  const double top = static_cast<double>(g.n - 1);
  if (!(s >= 0.0 && s <= top && t >= 0.0 && t <= top)) return 0.0;
  const auto i = std::min(static_cast<std::size_t>(s), g.n - 2);
  const auto j = std::min(static_cast<std::size_t>(t), g.n - 2);
  const double fs = s - static_cast<double>(i);
  const double ft = t - static_cast<double>(j);
  return (1 - fs) * (1 - ft) * f.at(i, j) + fs * (1 - ft) * f.at(i + 1, j) +
         (1 - fs) * ft * f.at(i, j + 1) + fs * ft * f.at(i + 1, j + 1);
}

namespace {
std::string host_byte_order() { return std::endian::native == std::endian::little ? "little" : "big"; }
}  // namespace

void write_field(const Field2D& f, const std::string& stem) {
  std::ofstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error(fmt::format("cannot write {}.bin", stem));
  bin.write(reinterpret_cast<const char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  std::ofstream hdr(stem + ".json");
  if (!hdr) throw std::runtime_error(fmt::format("cannot write {}.json", stem));
  hdr << nlohmann::json{{"L", f.grid.L}, {"n", f.grid.n}, {"layout", "row-major float64"}, {"byte_order", host_byte_order()}}
             .dump(2)
      << '\n';
}

Field2D read_field(const std::string& stem) {
  std::ifstream hdr(stem + ".json");
  if (!hdr) throw std::runtime_error(fmt::format("cannot read {}.json", stem));
  const auto j = nlohmann::json::parse(hdr);
  const Grid2D g = Grid2D::make(j.at("L").get<double>(), j.at("n").get<std::size_t>());
  if (j.contains("byte_order") && j.at("byte_order") != host_byte_order())
    throw std::runtime_error(fmt::format("{}.bin was written {} endian", stem, j.at("byte_order").get<std::string>()));
  std::vector<double> v(g.size());
  std::ifstream bin(stem + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error(fmt::format("cannot read {}.bin", stem));
  bin.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(v.size() * sizeof(double)))
    throw std::runtime_error(fmt::format("{}.bin is shorter than its header says", stem));
  return Field2D(g, std::move(v));
}

}  // namespace gpq
