#include "gpq/potentials.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "gpq/errors.hpp"

namespace gpq {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a[0] - b[0], a[1] - b[1]); }

// Boundedness is certified on a sample rather than symbolically; the box is
// much larger than any computational domain used with these potentials.
constexpr double kModulationSampleHalfWidth = 50.0;
constexpr int kModulationSamples = 201;

}  // namespace

PotentialSpec::PotentialSpec(std::vector<Well> wells, std::optional<std::string> modulation)
    : wells_(std::move(wells)), modulation_text_(std::move(modulation)) {
  if (wells_.empty()) throw ParameterError("potential needs at least one well");
  for (std::size_t i = 0; i < wells_.size(); ++i) {
    const Well& w = wells_[i];
    if (!std::isfinite(w.center[0]) || !std::isfinite(w.center[1]))
      throw ParameterError(fmt::format("well {} has a non-finite center", i));
    if (!(w.exponent > 0.0) || !std::isfinite(w.exponent))
      throw ParameterError(fmt::format("well {} exponent {} must be positive", i, w.exponent));
    for (std::size_t j = 0; j < i; ++j)
      if (distance(w.center, wells_[j].center) == 0.0)
        throw ParameterError(fmt::format("wells {} and {} share the center ({}, {})", j, i,
                                         w.center[0], w.center[1]));
  }
  if (!modulation_text_) return;

  modulation_ = Expression::parse(*modulation_text_);
  const auto check = [&](double x, double y) {
    const double v = (*modulation_)(x, y);
    if (!std::isfinite(v) || !(v > 0.0))
      throw ParameterError(fmt::format("modulation '{}' is not positive and finite at ({}, {}): {}",
                                       *modulation_text_, x, y, v));
    return v;
  };
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  const double R = kModulationSampleHalfWidth;
  for (int a = 0; a < kModulationSamples; ++a) {
    for (int b = 0; b < kModulationSamples; ++b) {
      const double v = check(-R + 2.0 * R * a / (kModulationSamples - 1), -R + 2.0 * R * b / (kModulationSamples - 1));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  // Growth on the rings |x|∞ = 2R, 4R beyond what the square shows means
  // the bound is not uniform.
  for (double ring : {2.0 * R, 4.0 * R}) {
    for (int a = 0; a < kModulationSamples; ++a) {
      const double t = -ring + 2.0 * ring * a / (kModulationSamples - 1);
      for (const Point x : {Point{t, ring}, Point{t, -ring}, Point{ring, t}, Point{-ring, t}}) {
        const double v = check(x[0], x[1]);
        if (v > 1.1 * hi || v < lo / 1.1)
          throw ParameterError(fmt::format("modulation '{}' is not bounded above and below: value {} at ({}, {}) "
                                           "outside [{}, {}] seen on |x| <= {}",
                                           *modulation_text_, v, x[0], x[1], lo, hi, R));
      }
    }
  }
  bound_ = std::max(hi, 1.0 / lo);
}

double PotentialSpec::modulation(double x, double y) const {
  return modulation_ ? (*modulation_)(x, y) : 1.0;
}

double PotentialSpec::eval(double x, double y) const {
  double v = modulation(x, y);
  for (const Well& w : wells_) {
    const double d = std::hypot(x - w.center[0], y - w.center[1]);
    if (d == 0.0) return 0.0;
    v *= std::pow(d, w.exponent);
  }
  return v;
}

Field2D PotentialSpec::sample(const Grid2D& grid) const {
  return Field2D::sample(grid, [this](double x, double y) { return eval(x, y); });
}

PotentialSpec PotentialSpec::translated(double dx, double dy) const {
  std::vector<Well> w = wells_;
  for (Well& well : w) {
    well.center[0] += dx;
    well.center[1] += dy;
  }
  if (!modulation_text_) return PotentialSpec(std::move(w));
  // Substitute the shifted coordinates textually so the copy stays
  // serializable as a plain expression.
  std::string shifted;
  for (std::size_t i = 0; i < modulation_text_->size(); ++i) {
    const char c = (*modulation_text_)[i];
    const bool prev_alpha = i > 0 && std::isalpha(static_cast<unsigned char>((*modulation_text_)[i - 1]));
    const bool next_alpha = i + 1 < modulation_text_->size() &&
                            std::isalpha(static_cast<unsigned char>((*modulation_text_)[i + 1]));
    if (!prev_alpha && !next_alpha && c == 'x') shifted += fmt::format("(x-({:.17g}))", dx);
    else if (!prev_alpha && !next_alpha && c == 'y') shifted += fmt::format("(y-({:.17g}))", dy);
    else if (!prev_alpha && !next_alpha && c == 'r')
      shifted += fmt::format("(((x-({:.17g}))^2+(y-({:.17g}))^2)^0.5)", dx, dy);
    else shifted += c;
  }
  return PotentialSpec(std::move(w), shifted);
}

FlatnessReport flatness_classify(const PotentialSpec& V) {
  const auto& wells = V.wells();
  FlatnessReport rep;
  for (const Well& w : wells) rep.p = std::max(rep.p, w.exponent);
  rep.lambdas.assign(wells.size(), std::numeric_limits<double>::infinity());
  rep.lambda = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < wells.size(); ++i) {
    if (wells[i].exponent < rep.p) continue;
    double lam = V.modulation(wells[i].center[0], wells[i].center[1]);
    for (std::size_t j = 0; j < wells.size(); ++j)
      if (j != i) lam *= std::pow(distance(wells[i].center, wells[j].center), wells[j].exponent);
    rep.lambdas[i] = lam;
    rep.lambda = std::min(rep.lambda, lam);
  }
  for (std::size_t i = 0; i < wells.size(); ++i)
    if (rep.lambdas[i] <= rep.lambda * (1.0 + kFlatnessTieTolerance)) rep.Z.push_back(i);
  return rep;
}

Point Symmetry::apply(const Point& x) const {
  const double px = x[0] - center[0];
  const double py = x[1] - center[1];
  if (kind == Kind::Reflection) {
    const double nx = std::cos(angle);
    const double ny = std::sin(angle);
    const double d = px * nx + py * ny;
    return {center[0] + px - 2.0 * d * nx, center[1] + py - 2.0 * d * ny};
  }
  if (order < 2) throw ParameterError("rotation symmetry needs order >= 2");
  const double t = 2.0 * std::numbers::pi / order;
  return {center[0] + std::cos(t) * px - std::sin(t) * py,
          center[1] + std::sin(t) * px + std::cos(t) * py};
}

double Symmetry::distance_to_fixed_set(const Point& x) const {
  const double px = x[0] - center[0];
  const double py = x[1] - center[1];
  if (kind == Kind::Reflection) return std::abs(px * std::cos(angle) + py * std::sin(angle));
  return std::hypot(px, py);
}

double symmetry_defect(const PotentialSpec& V, const Symmetry& S, double R) {
  constexpr int m = 41;
  double worst = 0.0;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      // offset the lattice so sample points avoid the symmetry's fixed set
      const Point x{-R + 2.0 * R * (a + 0.37) / m, -R + 2.0 * R * (b + 0.61) / m};
      const double v = eval(V, x);
      const double w = eval(V, S.apply(x));
      worst = std::max(worst, std::abs(w - v) / (1.0 + std::abs(v)));
    }
  }
  return worst;
}

void require_symmetric(const PotentialSpec& V, const Symmetry& S, double R) {
  const double d = symmetry_defect(V, S, R);
  if (d > 1e-9)
    throw ParameterError(fmt::format("potential is not invariant under the declared symmetry "
                                     "(relative defect {:.3g})", d));
}

}  // namespace gpq
