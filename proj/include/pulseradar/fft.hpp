#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "pulseradar/types.hpp"

namespace pulseradar {

// Thin RAII wrapper around an FFTW complex-to-complex plan. The plan is
// unnormalized in both directions. execute() may be called concurrently
// from several threads on distinct buffers.
class FftPlan {
public:
  enum class Direction { Forward, Inverse };

  FftPlan(std::size_t size, Direction direction);
  ~FftPlan();
  FftPlan(FftPlan&&) noexcept;
  FftPlan& operator=(FftPlan&&) noexcept;
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t size() const noexcept { return size_; }

  void execute(std::span<const ComplexF> in, std::span<ComplexF> out) const;
  std::vector<ComplexF> operator()(std::span<const ComplexF> in) const;

private:
  struct Impl;
  std::size_t size_ = 0;
  std::unique_ptr<Impl> impl_;
};

} // namespace pulseradar
