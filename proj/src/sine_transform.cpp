#include "gpq/sine_transform.hpp"

#include <algorithm>
#include <mutex>
#include <utility>

#include <fftw3.h>

#include "gpq/errors.hpp"

namespace gpq {

namespace {

// Planner calls are not thread-safe in FFTW; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

SineTransform::SineTransform(std::size_t N) : n_(N) {
  if (N < 1) throw ParameterError("sine transform needs at least one point");
  const int n = static_cast<int>(N);
  std::lock_guard lock(planner_mutex());
  buffer_ = static_cast<double*>(fftw_malloc(sizeof(double) * N * N));
  if (buffer_ == nullptr) throw std::bad_alloc();
  // ESTIMATE keeps plans (and therefore round-off) identical from run to run.
  plan_ = fftw_plan_r2r_2d(n, n, buffer_, buffer_, FFTW_RODFT00, FFTW_RODFT00, FFTW_ESTIMATE);
  if (plan_ == nullptr) {
    fftw_free(buffer_);
    throw std::runtime_error("FFTW failed to create a sine-transform plan");
  }
}

SineTransform::~SineTransform() { release(); }

SineTransform::SineTransform(SineTransform&& other) noexcept
    : n_(other.n_), buffer_(other.buffer_), plan_(other.plan_) {
  other.buffer_ = nullptr;
  other.plan_ = nullptr;
}

SineTransform& SineTransform::operator=(SineTransform&& other) noexcept {
  if (this != &other) {
    release();
    n_ = other.n_;
    buffer_ = std::exchange(other.buffer_, nullptr);
    plan_ = std::exchange(other.plan_, nullptr);
  }
  return *this;
}

void SineTransform::release() noexcept {
  std::lock_guard lock(planner_mutex());
  if (plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  if (buffer_ != nullptr) fftw_free(buffer_);
  plan_ = nullptr;
  buffer_ = nullptr;
}

double SineTransform::normalization() const {
  const double m = 2.0 * static_cast<double>(n_ + 1);
  return 1.0 / (m * m);
}

void SineTransform::apply(std::span<double> data) const {
  if (data.size() != n_ * n_) throw ParameterError("sine transform size mismatch");
  std::copy(data.begin(), data.end(), buffer_);
  fftw_execute(static_cast<fftw_plan>(plan_));
  std::copy(buffer_, buffer_ + n_ * n_, data.begin());
}

void SineTransform::multiply(std::span<double> data, std::span<const double> symbol) const {
  if (data.size() != n_ * n_ || symbol.size() != n_ * n_)
    throw ParameterError("sine transform size mismatch");
  const auto plan = static_cast<fftw_plan>(plan_);
  const std::size_t total = n_ * n_;
  std::copy(data.begin(), data.end(), buffer_);
  fftw_execute(plan);
  const double norm = normalization();
  for (std::size_t k = 0; k < total; ++k) buffer_[k] *= symbol[k] * norm;
  fftw_execute(plan);
  std::copy(buffer_, buffer_ + total, data.begin());
}

}  // namespace gpq
