#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "pulseradar/fft.hpp"
#include "pulseradar/types.hpp"

namespace pulseradar {

// Slow-time samples of one range bin, one per PRI, without gaps.
struct BinSeries {
  std::size_t bin_index = 0;
  std::vector<ComplexF> samples;
  double prf_hz = 100.0;
};

struct UnwrapResult {
  std::vector<double> phases;
  std::size_t corrections = 0;     // steps that needed a +-2pi adjustment
  std::size_t ambiguous_steps = 0; // steps too close to +-pi to trust
};

// Steps with |wrapped step| above this fraction of pi are flagged as
// ambiguous: the motion between two pulses may have exceeded lambda/4.
inline constexpr double kAmbiguousStepFraction = 0.9;

// Adds multiples of 2pi so that every consecutive step lies in (-pi, pi].
std::vector<double> unwrap(std::span<const double> phases);
UnwrapResult unwrap_with_stats(std::span<const double> phases);

// Wraps an angle into (-pi, pi].
double wrap_angle(double angle);

struct DisplacementTrace {
  std::vector<double> values_m; // relative to the first pulse
  std::size_t unwrap_corrections = 0;
  std::size_t ambiguous_steps = 0;
};

// Range change per radian of interferometric phase, c / (4 pi f0).
double metres_per_radian(double carrier_hz);

// dR_n = c * dphi_n / (4 pi f0) with dphi_n = -(phi_n - phi_0) after
// unwrapping; a receding target gives positive displacement.
DisplacementTrace displacement(const BinSeries& series, double carrier_hz);
DisplacementTrace displacement_from_phase(std::span<const double> phases, double carrier_hz);

inline constexpr std::size_t kDefaultAverageWindow = 128;

// Mean of the last `window` values.
double mean_displacement(const DisplacementTrace& trace, std::size_t window = kDefaultAverageWindow);
// max - min over the last `window` values.
double peak_to_peak(const DisplacementTrace& trace, std::size_t window);

enum class AxisMode { Frequency, Velocity };
enum class SpectrumWindow { Rectangular, Hann };
enum class SpectrumInput { Complex, Displacement };

struct SpectrumOptions {
  AxisMode axis = AxisMode::Frequency;
  SpectrumWindow window = SpectrumWindow::Rectangular;
  SpectrumInput input = SpectrumInput::Complex;
  double carrier_hz = 5.755e9; // for the velocity axis and displacement input
};

struct SpectrumBin {
  double freq_hz = 0.0;
  double velocity_mps = 0.0;
  double magnitude = 0.0;
};

// Magnitudes use a unitary DFT scaling (1/sqrt(N)), so the two-sided
// spectrum carries the same energy as the (mean-removed, windowed) pack.
struct VibrationSpectrum {
  std::vector<SpectrumBin> bins; // one-sided, 0 .. PRF/2 inclusive
  std::vector<double> two_sided; // |X_k| for k = 0 .. N-1
  std::size_t pack_size = 0;
  double prf_hz = 0.0;
  AxisMode axis_mode = AxisMode::Frequency;
  std::uint64_t last_pulse_index = 0;

  double resolution_hz() const { return prf_hz / static_cast<double>(pack_size); }
  std::vector<double> magnitudes() const;
  std::size_t peak_index() const; // argmax over the one-sided bins
  double axis_value(std::size_t bin) const;
};

inline constexpr std::size_t kDefaultPackSize = 256;

// Spectrum of the most recent `pack_size` samples of the series.
VibrationSpectrum vibration_spectrum(const BinSeries& series, std::size_t pack_size = kDefaultPackSize,
                                     const SpectrumOptions& options = {});

// Bounded history of spectrum magnitude rows; the oldest row is evicted
// when capacity is reached.
class Waterfall {
public:
  struct Row {
    std::uint64_t pulse_index = 0;
    std::vector<double> magnitudes;
  };

  explicit Waterfall(std::size_t capacity = 100);

  void push(const VibrationSpectrum& spectrum);
  void clear() { rows_.clear(); }

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::deque<Row>& rows() const noexcept { return rows_; }

private:
  std::size_t capacity_;
  std::deque<Row> rows_;
};

Waterfall waterfall_push(Waterfall waterfall, const VibrationSpectrum& spectrum);

// Incremental unwrapping for streaming use: one phase in, one displacement
// out, same result as displacement_from_phase over the whole history.
class PhaseTracker {
public:
  explicit PhaseTracker(double carrier_hz) : carrier_hz_(carrier_hz) {}

  double push(double phase);
  void reset();

  std::size_t corrections() const noexcept { return corrections_; }
  std::size_t ambiguous_steps() const noexcept { return ambiguous_; }
  std::size_t count() const noexcept { return count_; }

private:
  double carrier_hz_;
  double first_ = 0.0;
  double last_wrapped_ = 0.0;
  double last_unwrapped_ = 0.0;
  std::size_t count_ = 0;
  std::size_t corrections_ = 0;
  std::size_t ambiguous_ = 0;
};

// Collects one bin's samples until a pack is complete, then emits its
// spectrum and starts a new pack.
class PackAccumulator {
public:
  PackAccumulator(std::size_t pack_size, double prf_hz, SpectrumOptions options = {});

  std::optional<VibrationSpectrum> push(ComplexF sample, std::uint64_t pulse_index);
  void reset();
  void set_pack_size(std::size_t pack_size);
  void set_axis(AxisMode axis) { options_.axis = axis; }

  std::size_t pack_size() const noexcept { return pack_size_; }
  std::size_t pending() const noexcept { return samples_.size(); }
  const SpectrumOptions& options() const noexcept { return options_; }

private:
  std::size_t pack_size_;
  double prf_hz_;
  SpectrumOptions options_;
  std::vector<ComplexF> samples_;
};

} // namespace pulseradar
