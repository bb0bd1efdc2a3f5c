#include "pulseradar/waveform.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace pulseradar {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

} // namespace

void ChirpParams::validate() const {
  if (!positive_finite(carrier_hz) || !positive_finite(bandwidth_hz) ||
      !positive_finite(duration_s) || !positive_finite(sample_rate_hz)) {
    throw Error("chirp: carrier, bandwidth, duration and sample rate must be positive");
  }
  if (!std::isfinite(initial_phase_rad) || !std::isfinite(center_offset_hz)) {
    throw Error("chirp: initial phase and centre offset must be finite");
  }
  if (bandwidth_hz > sample_rate_hz) {
    throw Error("chirp: bandwidth " + std::to_string(bandwidth_hz) +
                " Hz exceeds complex sample rate " + std::to_string(sample_rate_hz) + " Hz");
  }
  if (sample_count() < 2) {
    throw Error("chirp: duration * sample rate yields fewer than 2 samples");
  }
}

std::size_t ChirpParams::sample_count() const {
  const double n = std::round(duration_s * sample_rate_hz);
  return n > 0.0 ? static_cast<std::size_t>(n) : 0;
}

double ChirpParams::chirp_rate() const { return 2.0 * kPi * bandwidth_hz / duration_s; }

double ChirpParams::instantaneous_frequency_hz(double t) const {
  return center_offset_hz - bandwidth_hz / 2.0 + bandwidth_hz * t / duration_s;
}

std::vector<ComplexF> synthesize_chirp(const ChirpParams& params) {
  params.validate();
  const std::size_t n_samples = params.sample_count();
  const double start_hz = params.center_offset_hz - params.bandwidth_hz / 2.0;
  const double half_rate = params.chirp_rate() / 2.0;

  std::vector<ComplexF> out(n_samples);
  for (std::size_t n = 0; n < n_samples; ++n) {
    const double t = static_cast<double>(n) / params.sample_rate_hz;
    const double phase = 2.0 * kPi * start_hz * t + half_rate * t * t + params.initial_phase_rad;
    out[n] = {std::cos(phase), std::sin(phase)};
  }
  return out;
}

namespace {

std::int16_t quantize_component(double v, double scale, std::size_t& saturated) {
  // std::round is half-away-from-zero.
  const double r = std::round(v * scale);
  constexpr double lo = std::numeric_limits<std::int16_t>::min();
  constexpr double hi = std::numeric_limits<std::int16_t>::max();
  if (r > hi) {
    ++saturated;
    return static_cast<std::int16_t>(hi);
  }
  if (r < lo) {
    ++saturated;
    return static_cast<std::int16_t>(lo);
  }
  return static_cast<std::int16_t>(r);
}

} // namespace

IqBuffer quantize(std::span<const ComplexF> samples, double headroom, std::size_t& saturated) {
  if (!(headroom > 0.0 && headroom <= 1.0)) {
    throw Error("quantize: headroom must lie in (0, 1]");
  }
  const double scale = headroom * 32767.0;
  saturated = 0;
  IqBuffer out(samples.size());
  for (std::size_t n = 0; n < samples.size(); ++n) {
    out[n].i = quantize_component(samples[n].real(), scale, saturated);
    out[n].q = quantize_component(samples[n].imag(), scale, saturated);
  }
  return out;
}

IqBuffer quantize(std::span<const ComplexF> samples, double headroom) {
  std::size_t saturated = 0;
  return quantize(samples, headroom, saturated);
}

std::vector<ComplexF> dequantize(const IqBuffer& buffer, double headroom) {
  const double scale = 1.0 / (headroom * 32767.0);
  std::vector<ComplexF> out;
  out.reserve(buffer.size());
  for (const auto& s : buffer) {
    out.emplace_back(s.i * scale, s.q * scale);
  }
  return out;
}

} // namespace pulseradar
