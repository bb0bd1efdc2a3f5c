#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pulseradar {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kPi = 3.14159265358979323846;

using ComplexF = std::complex<double>;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// One 16-bit I/Q sample as held in the RX memories and shift registers.
struct IqSample {
  std::int16_t i = 0;
  std::int16_t q = 0;

  friend bool operator==(const IqSample&, const IqSample&) = default;
};

// Fixed-length buffer of 16-bit I/Q samples. The length is set at
// construction and never changes afterwards.
class IqBuffer {
public:
  IqBuffer() = default;
  explicit IqBuffer(std::size_t length) : samples_(length) {}
  explicit IqBuffer(std::vector<IqSample> samples) : samples_(std::move(samples)) {}
  IqBuffer(std::initializer_list<IqSample> samples) : samples_(samples) {}

  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  IqSample& operator[](std::size_t n) { return samples_[n]; }
  const IqSample& operator[](std::size_t n) const { return samples_[n]; }

  std::span<IqSample> samples() noexcept { return samples_; }
  std::span<const IqSample> samples() const noexcept { return samples_; }

  auto begin() const noexcept { return samples_.begin(); }
  auto end() const noexcept { return samples_.end(); }

  friend bool operator==(const IqBuffer&, const IqBuffer&) = default;

private:
  std::vector<IqSample> samples_;
};

// Exact complex accumulator value produced by the correlator.
struct ComplexAcc {
  std::int64_t re = 0;
  std::int64_t im = 0;

  friend bool operator==(const ComplexAcc&, const ComplexAcc&) = default;
};

inline ComplexF to_complex(const ComplexAcc& v) {
  return {static_cast<double>(v.re), static_cast<double>(v.im)};
}

inline ComplexF to_complex(const IqSample& v) {
  return {static_cast<double>(v.i), static_cast<double>(v.q)};
}

} // namespace pulseradar
