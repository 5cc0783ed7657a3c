#include "gpq/interpolation.hpp"

#include <cmath>

#include "gpq/errors.hpp"

namespace gpq {

namespace {

void check_inputs(double h, std::size_t n) {
  if (!(h > 0.0)) throw ParameterError("interpolation spacing must be positive");
  if (n < 2) throw ParameterError("interpolation needs at least two nodes");
}

}  // namespace

MonotoneCubic::MonotoneCubic(double x0, double h, std::span<const double> values,
                             double outside)
    : x0_(x0), h_(h), values_(values.begin(), values.end()), outside_(outside) {
  check_inputs(h, values_.size());
  const std::size_t n = values_.size();
  slopes_.assign(n, 0.0);
  std::vector<double> secant(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) secant[i] = (values_[i + 1] - values_[i]) / h_;
  slopes_[0] = secant[0];
  slopes_[n - 1] = secant[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double a = secant[i - 1];
    const double b = secant[i];
    slopes_[i] = (a * b > 0.0) ? 2.0 * a * b / (a + b) : 0.0;
  }
  limit_slopes();
}

MonotoneCubic::MonotoneCubic(double x0, double h, std::span<const double> values,
                             std::span<const double> slopes, double outside)
    : x0_(x0),
      h_(h),
      values_(values.begin(), values.end()),
      slopes_(slopes.begin(), slopes.end()),
      outside_(outside) {
  check_inputs(h, values_.size());
  if (slopes_.size() != values_.size())
    throw ParameterError("slope count must match value count");
  limit_slopes();
}

void MonotoneCubic::limit_slopes() {
  const std::size_t n = values_.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double secant = (values_[i + 1] - values_[i]) / h_;
    if (secant == 0.0) {
      slopes_[i] = 0.0;
      slopes_[i + 1] = 0.0;
      continue;
    }
    double alpha = slopes_[i] / secant;
    double beta = slopes_[i + 1] / secant;
    if (alpha < 0.0) {
      slopes_[i] = 0.0;
      alpha = 0.0;
    }
    if (beta < 0.0) {
      slopes_[i + 1] = 0.0;
      beta = 0.0;
    }
    const double radius2 = alpha * alpha + beta * beta;
    if (radius2 > 9.0) {
      const double tau = 3.0 / std::sqrt(radius2);
      slopes_[i] = tau * alpha * secant;
      slopes_[i + 1] = tau * beta * secant;
    }
  }
}

double MonotoneCubic::value(double x) const {
  const double t_global = (x - x0_) / h_;
  const double last = static_cast<double>(values_.size() - 1);
  if (!(t_global >= 0.0) || t_global > last) return outside_;
  std::size_t i = static_cast<std::size_t>(t_global);
  if (i >= values_.size() - 1) i = values_.size() - 2;
  const double t = t_global - static_cast<double>(i);
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * values_[i] + h10 * h_ * slopes_[i] + h01 * values_[i + 1] +
         h11 * h_ * slopes_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  const double t_global = (x - x0_) / h_;
  const double last = static_cast<double>(values_.size() - 1);
  if (!(t_global >= 0.0) || t_global > last) return 0.0;
  std::size_t i = static_cast<std::size_t>(t_global);
  if (i >= values_.size() - 1) i = values_.size() - 2;
  const double t = t_global - static_cast<double>(i);
  const double t2 = t * t;
  const double d00 = (6.0 * t2 - 6.0 * t) / h_;
  const double d10 = 3.0 * t2 - 4.0 * t + 1.0;
  const double d01 = (-6.0 * t2 + 6.0 * t) / h_;
  const double d11 = 3.0 * t2 - 2.0 * t;
  return d00 * values_[i] + d10 * slopes_[i] + d01 * values_[i + 1] + d11 * slopes_[i + 1];
}

}  // namespace gpq
