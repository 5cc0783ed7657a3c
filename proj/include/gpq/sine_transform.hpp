#pragma once

// Two-dimensional type-I discrete sine transform on an N×N array, the
// eigenbasis of every separable Dirichlet Laplacian on a uniform grid.

#include <cstddef>
#include <span>

namespace gpq {

/// Owns its work buffer, so one instance must not be used from two threads at
/// once; separate instances are independent.
class SineTransform {
 public:
  explicit SineTransform(std::size_t N);
  ~SineTransform();
  SineTransform(const SineTransform&) = delete;
  SineTransform& operator=(const SineTransform&) = delete;
  SineTransform(SineTransform&& other) noexcept;
  SineTransform& operator=(SineTransform&& other) noexcept;

  std::size_t size() const { return n_; }

  /// Unnormalized DST-I along both axes, in place on a row-major N×N array.
  /// Applying it twice multiplies by (2(N+1))².
  void apply(std::span<double> data) const;

  /// Multiply by `symbol` in sine space: data ← S⁻¹ diag(symbol) S data.
  /// `symbol` has N*N entries, row-major like the data.
  void multiply(std::span<double> data, std::span<const double> symbol) const;

  double normalization() const;

 private:
  void release() noexcept;

  std::size_t n_ = 0;
  double* buffer_ = nullptr;
  void* plan_ = nullptr;
};

}  // namespace gpq
