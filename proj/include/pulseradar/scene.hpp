#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "pulseradar/fft.hpp"
#include "pulseradar/types.hpp"
#include "pulseradar/waveform.hpp"

namespace pulseradar {

// Motion programs describe the variable range component dR as a function of
// pulse index. dR is held constant for the duration of one pulse.
namespace motion {

struct Static {};

struct Step {
  std::uint64_t pulse_index = 0;
  double offset_m = 0.0;
};

// Piecewise-constant offsets. Each step starts moving at its pulse index and
// reaches its offset linearly after `transition_pulses` pulses (0 = jump).
struct StepSchedule {
  std::vector<Step> steps;
  std::uint64_t transition_pulses = 10;
};

struct Sinusoid {
  double freq_hz = 0.0;
  double peak_amp_m = 0.0;
  double phase_rad = 0.0;
};

struct LinearRamp {
  double rate_m_per_pulse = 0.0;
};

} // namespace motion

using MotionProgram =
    std::variant<motion::Static, motion::StepSchedule, motion::Sinusoid, motion::LinearRamp>;

// dR at the start of the given pulse.
double range_offset(const MotionProgram& program, std::uint64_t pulse_index, double prf_hz);

// Throws on non-finite parameters or unordered step schedules. Returns
// human-readable warnings (e.g. sinusoid frequency at or above PRF/2).
std::vector<std::string> validate_motion(const MotionProgram& program, double prf_hz);

struct TargetSpec {
  double range0_m = 0.0;
  double amplitude = 0.5;
  MotionProgram motion = motion::Static{};
};

struct ChannelSpec {
  // Per-sample echo-to-noise power ratio in the raw receive window, measured
  // against the strongest target. Empty means a noise-free channel.
  std::optional<double> snr_db;
  std::uint64_t noise_seed = 1;
  // Optional noise on the reference channel, as SNR of the unit chirp.
  std::optional<double> rx1_noise_db;
};

// Named noise generator, fixed so that runs reproduce across platforms:
// splitmix64 seeds an mt19937_64 stream per (seed, pulse, channel) and
// normals come from the Box-Muller transform over 53-bit uniforms.
inline constexpr const char* kNoiseGenerator = "mt19937_64/splitmix64/box-muller";

struct RenderContext {
  ChirpParams chirp;
  double prf_hz = 100.0;
  std::size_t window_len = 3136;
  double headroom = kDefaultHeadroom;

  double window_duration_s() const { return window_len / chirp.sample_rate_hz; }
  // Largest R0 whose echo still fits in the receive window.
  double max_range_m() const;
};

// Round-trip delay 2 (R0 + dR) / c, seconds.
double delay_of(const TargetSpec& target, std::uint64_t pulse_index, double prf_hz);

// Noise power (per complex sample, full scale 1.0) realised for a channel.
// The reference is the strongest target's echo power, or full scale when
// the scene has no targets.
double noise_power(std::span<const TargetSpec> targets, const ChannelSpec& channel);

struct PulsePair {
  IqBuffer rx1;
  IqBuffer rx2;
  std::uint64_t pulse_index = 0;
  std::vector<double> truth_m; // dR of each target at this pulse
  std::size_t saturated = 0;   // components clipped while quantizing rx2
};

// Renders the reference and echo channels of one PRI. The chirp spectrum is
// computed once at construction; rendering is const and thread-safe.
class SceneRenderer {
public:
  explicit SceneRenderer(RenderContext context);

  const RenderContext& context() const noexcept { return context_; }
  std::span<const ComplexF> chirp() const noexcept { return chirp_; }

  // Echo window before noise and quantization.
  std::vector<ComplexF> rx2_float(std::span<const TargetSpec> targets, std::uint64_t pulse_index) const;

  IqBuffer render_rx2(std::span<const TargetSpec> targets, const ChannelSpec& channel,
                      std::uint64_t pulse_index, std::size_t* saturated = nullptr) const;
  IqBuffer render_rx1(const ChannelSpec& channel, std::uint64_t pulse_index) const;
  PulsePair render(std::span<const TargetSpec> targets, const ChannelSpec& channel,
                   std::uint64_t pulse_index) const;

private:
  void add_echo(std::vector<ComplexF>& window, const TargetSpec& target, std::size_t index,
                std::uint64_t pulse_index) const;

  RenderContext context_;
  std::vector<ComplexF> chirp_;
  std::size_t fft_size_ = 0;
  std::vector<ComplexF> chirp_spectrum_;
  FftPlan inverse_;
};

// Free-function forms over a default-constructed renderer for `context`.
IqBuffer render_rx2(const RenderContext& context, std::span<const TargetSpec> targets,
                    const ChannelSpec& channel, std::uint64_t pulse_index);
IqBuffer render_rx1(const RenderContext& context, const ChannelSpec& channel, std::uint64_t pulse_index);

// Deterministic complex white Gaussian noise with the given total power
// per sample (each component has variance power / 2).
std::vector<ComplexF> complex_noise(std::uint64_t seed, std::uint64_t pulse_index, std::uint64_t stream,
                                    std::size_t count, double power);

} // namespace pulseradar
