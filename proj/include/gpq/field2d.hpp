#pragma once

// Real fields on the square [-L, L]² sampled at n×n uniform nodes, with
// homogeneous Dirichlet data outside the box.

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gpq/radial_solver.hpp"

namespace gpq {

struct Grid2D {
  double L = 8.0;
  std::size_t n = 257;

  /// Validated constructor: n >= 16, L > 0.
  static Grid2D make(double L, std::size_t n);

  double spacing() const { return 2.0 * L / static_cast<double>(n - 1); }
  double coord(std::size_t i) const { return -L + static_cast<double>(i) * spacing(); }
  std::size_t size() const { return n * n; }
  /// Interior nodes per axis (the boundary ring is excluded).
  std::size_t interior() const { return n - 2; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Samples stored row-major: index i*n + j is the node (coord(i), coord(j)),
/// i.e. the first index runs along x.
struct Field2D {
  Grid2D grid;
  std::vector<double> values;

  explicit Field2D(Grid2D g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  Field2D(Grid2D g, std::vector<double> v);

  static Field2D sample(const Grid2D& g, const std::function<double(double, double)>& f);

  double& at(std::size_t i, std::size_t j) { return values[i * grid.n + j]; }
  double at(std::size_t i, std::size_t j) const { return values[i * grid.n + j]; }

  bool all_finite() const;
};

enum class KineticScheme {
  FiniteDifference,  ///< 5-point stencil, forward-difference gradient energy
  Spectral,          ///< sine-series Laplacian on the interior
};

std::string to_string(KineticScheme s);
KineticScheme kinetic_scheme_from_string(const std::string& s);

/// 5-point Laplacian with zero extension beyond the box (so the boundary ring
/// sees ghost zeros).
Field2D laplacian(const Field2D& f);

/// Negative Dirichlet Laplacian −Δ restricted to interior nodes and applied
/// in sine space; the boundary ring of the input is ignored and the output
/// vanishes there.  Eigenvalues are exact for either scheme's symbol.
class DirichletOperator {
 public:
  DirichletOperator(const Grid2D& grid, KineticScheme scheme);
  ~DirichletOperator();
  DirichletOperator(DirichletOperator&&) noexcept;
  DirichletOperator& operator=(DirichletOperator&&) noexcept;

  const Grid2D& grid() const { return grid_; }
  KineticScheme scheme() const { return scheme_; }

  /// out = −Δf on the interior, 0 on the boundary ring.
  void apply(const Field2D& f, Field2D& out) const;
  Field2D apply(const Field2D& f) const;

  /// f ← (1 + s(−Δ))⁻¹ f on the interior.
  void resolvent(Field2D& f, double s) const;

  /// Eigenvalue of −Δ for sine mode (k, l), 1-based.
  double eigenvalue(std::size_t k, std::size_t l) const;

 private:
  struct Impl;
  Grid2D grid_;
  KineticScheme scheme_;
  std::unique_ptr<Impl> impl_;
};

/// −Δ by the spectral symbol; convenience wrapper building a one-off operator.
Field2D spectral_laplacian(const Field2D& f);

/// Composite trapezoid rule over the box, summed in a fixed order.
double integrate(const Field2D& f);
double mass(const Field2D& f);
double p_norm_power(const Field2D& f, double p);
double l2_distance(const Field2D& a, const Field2D& b);

/// ∫|∇u|²: sum of squared forward differences over every grid edge including
/// the ones leaving the box (finite differences), or h²Σu(−Δu) (spectral).
double kinetic_energy(const Field2D& f, KineticScheme scheme);
double kinetic_energy(const Field2D& f, const DirichletOperator& op);

struct EnergyBreakdown {
  double kinetic = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

/// Mass tolerance below which a field counts as normalized.
inline constexpr double kNormalizedTolerance = 1e-9;

/// E(u) = ∫|∇u|² + ∫V u² − (2a/(q+2))∫|u|^{q+2} for a unit-mass u; V is the
/// potential sampled on the same grid.
EnergyBreakdown energy(const Field2D& f, const Field2D& V, double a, double q,
                       KineticScheme scheme = KineticScheme::Spectral);
EnergyBreakdown energy(const Field2D& f, const Field2D& V, double a, double q,
                       const DirichletOperator& op);

/// Scale to unit discrete mass; throws on a zero field.
void normalize(Field2D& f);

/// Place a radial profile on the grid centred at (cx, cy); zero beyond its
/// radial range.
Field2D embed_radial(const RadialProfile& profile, const Grid2D& grid, double cx = 0.0,
                     double cy = 0.0);

/// Evaluate the sine series of f's interior at every (xs[i], ys[j]).  Points
/// outside the box evaluate to 0.  Result is row-major xs.size()×ys.size().
std::vector<double> sine_interpolate(const Field2D& f, std::span<const double> xs,
                                     std::span<const double> ys);

/// Bilinear sample at a single point (0 outside the box).
double bilinear(const Field2D& f, double x, double y);

/// `stem`.bin holds the n*n doubles in host byte order, `stem`.json the header {L, n}.
void write_field(const Field2D& f, const std::string& stem);
Field2D read_field(const std::string& stem);

}  // namespace gpq
