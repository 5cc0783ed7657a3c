#pragma once

#include <span>
#include <vector>

namespace gpq {

/// Monotone piecewise-cubic Hermite interpolant on a uniform 1D grid.
///
/// Node slopes are either supplied (e.g. the derivative carried by an ODE
/// integrator) or estimated with the Fritsch–Butland harmonic mean. In both
/// cases the Fritsch–Carlson limiter is applied so that the interpolant is
/// monotone wherever the data are, which keeps sampled positive profiles
/// positive. Outside [x0, x0 + (n-1)h] the interpolant returns `outside`.
class MonotoneCubic {
 public:
  MonotoneCubic(double x0, double h, std::span<const double> values,
                double outside = 0.0);
  MonotoneCubic(double x0, double h, std::span<const double> values,
                std::span<const double> slopes, double outside = 0.0);

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  double derivative(double x) const;

  double lower() const { return x0_; }
  double upper() const { return x0_ + h_ * static_cast<double>(values_.size() - 1); }

 private:
  void limit_slopes();

  double x0_;
  double h_;
  std::vector<double> values_;
  std::vector<double> slopes_;
  double outside_;
};

}  // namespace gpq
