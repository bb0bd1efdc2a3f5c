#include "pulseradar/slowtime.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <string>

namespace pulseradar {

double wrap_angle(double angle) {
  return angle - 2.0 * kPi * std::ceil((angle - kPi) / (2.0 * kPi));
}

UnwrapResult unwrap_with_stats(std::span<const double> phases) {
  UnwrapResult r;
  r.phases.resize(phases.size());
  if (phases.empty()) {
    return r;
  }
  r.phases[0] = phases[0];
  for (std::size_t n = 1; n < phases.size(); ++n) {
    const double raw = phases[n] - phases[n - 1];
    const double step = wrap_angle(raw);
    if (step != raw) {
      ++r.corrections;
    }
    if (std::abs(step) > kAmbiguousStepFraction * kPi) {
      ++r.ambiguous_steps;
    }
    r.phases[n] = r.phases[n - 1] + step;
  }
  return r;
}

std::vector<double> unwrap(std::span<const double> phases) { return unwrap_with_stats(phases).phases; }

double metres_per_radian(double carrier_hz) { return kSpeedOfLight / (4.0 * kPi * carrier_hz); }

DisplacementTrace displacement_from_phase(std::span<const double> phases, double carrier_hz) {
  if (phases.empty()) {
    throw Error("displacement: empty series");
  }
  const auto u = unwrap_with_stats(phases);
  const double scale = metres_per_radian(carrier_hz);
  DisplacementTrace trace;
  trace.unwrap_corrections = u.corrections;
  trace.ambiguous_steps = u.ambiguous_steps;
  trace.values_m.resize(u.phases.size());
  for (std::size_t n = 0; n < u.phases.size(); ++n) {
    trace.values_m[n] = -(u.phases[n] - u.phases[0]) * scale;
  }
  return trace;
}

DisplacementTrace displacement(const BinSeries& series, double carrier_hz) {
  std::vector<double> phases(series.samples.size());
  std::transform(series.samples.begin(), series.samples.end(), phases.begin(),
                 [](const ComplexF& s) { return std::arg(s); });
  return displacement_from_phase(phases, carrier_hz);
}

namespace {

std::span<const double> last_window(const DisplacementTrace& trace, std::size_t window) {
  if (window == 0 || window > trace.values_m.size()) {
    throw Error("slowtime: window " + std::to_string(window) + " exceeds trace length " +
                std::to_string(trace.values_m.size()));
  }
  return std::span<const double>(trace.values_m).last(window);
}

} // namespace

double mean_displacement(const DisplacementTrace& trace, std::size_t window) {
  const auto w = last_window(trace, window);
  return std::accumulate(w.begin(), w.end(), 0.0) / static_cast<double>(w.size());
}

double peak_to_peak(const DisplacementTrace& trace, std::size_t window) {
  if (window < 2) {
    throw Error("peak_to_peak: window must be at least 2");
  }
  const auto w = last_window(trace, window);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  return *hi - *lo;
}

std::vector<double> VibrationSpectrum::magnitudes() const {
  std::vector<double> out(bins.size());
  std::transform(bins.begin(), bins.end(), out.begin(), [](const SpectrumBin& b) { return b.magnitude; });
  return out;
}

std::size_t VibrationSpectrum::peak_index() const {
  if (bins.empty()) {
    throw Error("spectrum: no bins");
  }
  const auto it = std::max_element(bins.begin(), bins.end(),
                                   [](const SpectrumBin& a, const SpectrumBin& b) { return a.magnitude < b.magnitude; });
  return static_cast<std::size_t>(it - bins.begin());
}

double VibrationSpectrum::axis_value(std::size_t bin) const {
  return axis_mode == AxisMode::Frequency ? bins.at(bin).freq_hz : bins.at(bin).velocity_mps;
}

namespace {

VibrationSpectrum spectrum_of_pack(std::span<const ComplexF> pack, double prf_hz, const SpectrumOptions& options) {
  const std::size_t n = pack.size();
  if (n < 2) {
    throw Error("spectrum: pack needs at least 2 samples");
  }
  if (!(prf_hz > 0.0)) {
    throw Error("spectrum: PRF must be positive");
  }

  std::vector<ComplexF> x(pack.begin(), pack.end());
  if (options.input == SpectrumInput::Displacement) {
    // Unwrapped displacement of this pack as a real-valued signal.
    std::vector<double> phases(n);
    std::transform(pack.begin(), pack.end(), phases.begin(), [](const ComplexF& s) { return std::arg(s); });
    const auto trace = displacement_from_phase(phases, options.carrier_hz);
    std::transform(trace.values_m.begin(), trace.values_m.end(), x.begin(),
                   [](double v) { return ComplexF(v, 0.0); });
  }

  const ComplexF mean = std::accumulate(x.begin(), x.end(), ComplexF{}) / static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] -= mean;
    if (options.window == SpectrumWindow::Hann) {
      x[k] *= 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(k) / static_cast<double>(n));
    }
  }

  const auto X = FftPlan(n, FftPlan::Direction::Forward)(x);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  const double half_wavelength = kSpeedOfLight / options.carrier_hz / 2.0;

  VibrationSpectrum spec;
  spec.pack_size = n;
  spec.prf_hz = prf_hz;
  spec.axis_mode = options.axis;
  spec.two_sided.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    spec.two_sided[k] = std::abs(X[k]) * norm;
  }
  spec.bins.resize(n / 2 + 1);
  for (std::size_t k = 0; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * prf_hz / static_cast<double>(n);
    spec.bins[k] = {f, f * half_wavelength, spec.two_sided[k]};
  }
  return spec;
}

} // namespace

VibrationSpectrum vibration_spectrum(const BinSeries& series, std::size_t pack_size, const SpectrumOptions& options) {
  if (pack_size == 0 || series.samples.size() < pack_size) {
    throw Error("vibration_spectrum: incomplete pack (" + std::to_string(series.samples.size()) + " of " +
                std::to_string(pack_size) + " samples)");
  }
  return spectrum_of_pack(std::span<const ComplexF>(series.samples).last(pack_size), series.prf_hz, options);
}

Waterfall::Waterfall(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) {
    throw Error("waterfall: capacity must be positive");
  }
}

void Waterfall::push(const VibrationSpectrum& spectrum) {
  auto row = spectrum.magnitudes();
  if (!rows_.empty() && rows_.front().magnitudes.size() != row.size()) {
    throw Error("waterfall: spectrum length " + std::to_string(row.size()) + " does not match rows of length " +
                std::to_string(rows_.front().magnitudes.size()));
  }
  if (rows_.size() == capacity_) {
    rows_.pop_front();
  }
  rows_.push_back({spectrum.last_pulse_index, std::move(row)});
}

Waterfall waterfall_push(Waterfall waterfall, const VibrationSpectrum& spectrum) {
  waterfall.push(spectrum);
  return waterfall;
}

double PhaseTracker::push(double phase) {
  if (count_ == 0) {
    first_ = phase;
    last_unwrapped_ = phase;
  } else {
    const double raw = phase - last_wrapped_;
    const double step = wrap_angle(raw);
    if (step != raw) {
      ++corrections_;
    }
    if (std::abs(step) > kAmbiguousStepFraction * kPi) {
      ++ambiguous_;
    }
    last_unwrapped_ += step;
  }
  last_wrapped_ = phase;
  ++count_;
  return -(last_unwrapped_ - first_) * metres_per_radian(carrier_hz_);
}

void PhaseTracker::reset() {
  count_ = 0;
  corrections_ = 0;
  ambiguous_ = 0;
  first_ = last_wrapped_ = last_unwrapped_ = 0.0;
}

PackAccumulator::PackAccumulator(std::size_t pack_size, double prf_hz, SpectrumOptions options)
    : pack_size_(pack_size), prf_hz_(prf_hz), options_(options) {
  set_pack_size(pack_size);
}

std::optional<VibrationSpectrum> PackAccumulator::push(ComplexF sample, std::uint64_t pulse_index) {
  samples_.push_back(sample);
  if (samples_.size() < pack_size_) {
    return std::nullopt;
  }
  auto spec = spectrum_of_pack(samples_, prf_hz_, options_);
  spec.last_pulse_index = pulse_index;
  samples_.clear();
  return spec;
}

void PackAccumulator::reset() { samples_.clear(); }

void PackAccumulator::set_pack_size(std::size_t pack_size) {
  if (pack_size < 2 || !std::has_single_bit(pack_size)) {
    throw Error("pack size must be a power of two >= 2, got " + std::to_string(pack_size));
  }
  pack_size_ = pack_size;
  samples_.clear();
  samples_.reserve(pack_size_);
}

} // namespace pulseradar
