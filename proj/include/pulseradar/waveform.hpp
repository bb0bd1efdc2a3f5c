#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pulseradar/types.hpp"

namespace pulseradar {

// Linear-FM pulse parameters. Defaults are the 5.755 GHz / 40 MHz / 3.73 us
// system sampled at 120 MHz.
struct ChirpParams {
  double carrier_hz = 5.755e9;
  double bandwidth_hz = 40e6;
  double duration_s = 3.73e-6;
  double sample_rate_hz = 120e6;
  double initial_phase_rad = 0.0;
  // Shift of the sweep centre away from 0 Hz at baseband. Zero gives the
  // symmetric -B/2..+B/2 sweep.
  double center_offset_hz = 0.0;

  // Throws Error when an invariant is violated.
  void validate() const;

  std::size_t sample_count() const;
  // Angular chirp rate alpha = 2*pi*B/tau, rad/s^2.
  double chirp_rate() const;
  double wavelength_m() const { return kSpeedOfLight / carrier_hz; }
  // Range spanned by one sample of delay, c / (2 fs).
  double range_per_sample_m() const { return kSpeedOfLight / (2.0 * sample_rate_hz); }
  // Instantaneous baseband frequency at time t from pulse start.
  double instantaneous_frequency_hz(double t) const;
};

std::vector<ComplexF> synthesize_chirp(const ChirpParams& params);

inline constexpr double kDefaultHeadroom = 0.9;

// Maps each component to round(v * headroom * 32767), half away from zero,
// saturating at the int16 limits. `saturated` receives the number of
// components that hit a limit.
IqBuffer quantize(std::span<const ComplexF> samples, double headroom, std::size_t& saturated);
IqBuffer quantize(std::span<const ComplexF> samples, double headroom = kDefaultHeadroom);

// Inverse scaling of quantize(), without any rounding.
std::vector<ComplexF> dequantize(const IqBuffer& buffer, double headroom = kDefaultHeadroom);

} // namespace pulseradar
