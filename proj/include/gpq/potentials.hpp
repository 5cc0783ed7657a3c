#pragma once

// Trapping potentials V(x) = h(x) ∏ |x − x_i|^{p_i} and the data that decide
// where minimizers concentrate: the largest exponent p, the coefficients
// λ_i of the flattest wells, and the set Z of wells attaining min λ_i.

#include <array>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "gpq/expression.hpp"
#include "gpq/field2d.hpp"

namespace gpq {

using Point = std::array<double, 2>;

struct Well {
  Point center;
  double exponent;
};

class PotentialSpec {
 public:
  /// Validates distinct centers, positive exponents, and (by sampling) that
  /// the modulation stays in [1/C, C] for a finite C.
  PotentialSpec(std::vector<Well> wells, std::optional<std::string> modulation = std::nullopt);

  static PotentialSpec harmonic() { return PotentialSpec({Well{{0.0, 0.0}, 2.0}}); }

  const std::vector<Well>& wells() const { return wells_; }
  const std::optional<std::string>& modulation_text() const { return modulation_text_; }
  /// Sampled bound C with 1/C ≤ h ≤ C (1 without modulation).
  double modulation_bound() const { return bound_; }

  double modulation(double x, double y) const;
  double operator()(double x, double y) const { return eval(x, y); }
  double eval(double x, double y) const;

  /// V sampled on every node of the grid.
  Field2D sample(const Grid2D& grid) const;

  /// The same potential shifted by (dx, dy).
  PotentialSpec translated(double dx, double dy) const;

 private:
  std::vector<Well> wells_;
  std::optional<std::string> modulation_text_;
  std::optional<Expression> modulation_;
  double bound_ = 1.0;
};

inline double eval(const PotentialSpec& V, const Point& x) { return V.eval(x[0], x[1]); }

struct FlatnessReport {
  double p = 0.0;
  std::vector<double> lambdas;  ///< +inf for wells with p_i < p
  double lambda = 0.0;
  std::vector<std::size_t> Z;   ///< 0-based well indices attaining lambda
};

/// Relative tolerance used to decide ties between λ_i.
inline constexpr double kFlatnessTieTolerance = 1e-9;

FlatnessReport flatness_classify(const PotentialSpec& V);

/// An isometry fixing the potential: reflection across the line through
/// `center` with normal at angle `angle`, or the rotation by 2π/order about
/// `center`.
struct Symmetry {
  enum class Kind { Reflection, Rotation };
  Kind kind = Kind::Reflection;
  double angle = 0.0;
  int order = 2;
  Point center{0.0, 0.0};

  static Symmetry reflection(double normal_angle, Point c = {0.0, 0.0}) {
    return Symmetry{Kind::Reflection, normal_angle, 2, c};
  }
  static Symmetry rotation(int order, Point c = {0.0, 0.0}) {
    return Symmetry{Kind::Rotation, 0.0, order, c};
  }

  Point apply(const Point& x) const;
  /// Fixed set of the map: the mirror line or the rotation centre.
  double distance_to_fixed_set(const Point& x) const;
};

/// Largest relative mismatch |V(Sx) − V(x)| / (1 + V(x)) over a sample of
/// points in [-R, R]².
double symmetry_defect(const PotentialSpec& V, const Symmetry& S, double R = 4.0);

/// Throws ParameterError when symmetry_defect exceeds 1e-9.
void require_symmetric(const PotentialSpec& V, const Symmetry& S, double R = 4.0);

}  // namespace gpq
