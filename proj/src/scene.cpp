#include "pulseradar/scene.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

namespace pulseradar {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Uniform in (0, 1], 53 bits.
double unit_open(std::mt19937_64& gen) {
  return (static_cast<double>(gen() >> 11) + 1.0) * 0x1.0p-53;
}

constexpr std::uint64_t kStreamRx1 = 1;
constexpr std::uint64_t kStreamRx2 = 2;

} // namespace

double range_offset(const MotionProgram& program, std::uint64_t pulse_index, double prf_hz) {
  return std::visit(
      Overloaded{
          [](const motion::Static&) { return 0.0; },
          [&](const motion::StepSchedule& s) {
            double previous = 0.0;
            double current = 0.0;
            const motion::Step* active = nullptr;
            for (const auto& step : s.steps) {
              if (step.pulse_index > pulse_index) {
                break;
              }
              previous = current;
              current = step.offset_m;
              active = &step;
            }
            if (active == nullptr || s.transition_pulses == 0) {
              return current;
            }
            const double elapsed = static_cast<double>(pulse_index - active->pulse_index);
            const double frac = std::min(1.0, elapsed / static_cast<double>(s.transition_pulses));
            return previous + (current - previous) * frac;
          },
          [&](const motion::Sinusoid& s) {
            const double t = static_cast<double>(pulse_index) / prf_hz;
            return s.peak_amp_m * std::sin(2.0 * kPi * s.freq_hz * t + s.phase_rad);
          },
          [&](const motion::LinearRamp& r) { return r.rate_m_per_pulse * static_cast<double>(pulse_index); },
      },
      program);
}

std::vector<std::string> validate_motion(const MotionProgram& program, double prf_hz) {
  std::vector<std::string> warnings;
  std::visit(Overloaded{
                 [](const motion::Static&) {},
                 [&](const motion::StepSchedule& s) {
                   for (std::size_t n = 0; n < s.steps.size(); ++n) {
                     if (!std::isfinite(s.steps[n].offset_m)) {
                       throw Error("motion: step offset must be finite");
                     }
                     if (n > 0 && s.steps[n].pulse_index <= s.steps[n - 1].pulse_index) {
                       throw Error("motion: step pulse indices must be strictly increasing");
                     }
                   }
                 },
                 [&](const motion::Sinusoid& s) {
                   if (!std::isfinite(s.freq_hz) || !std::isfinite(s.peak_amp_m) ||
                       !std::isfinite(s.phase_rad) || s.freq_hz < 0.0) {
                     throw Error("motion: sinusoid parameters must be finite, frequency non-negative");
                   }
                   if (s.freq_hz >= prf_hz / 2.0) {
                     warnings.push_back("sinusoid at " + std::to_string(s.freq_hz) +
                                        " Hz is at or above PRF/2 and will alias");
                   }
                 },
                 [&](const motion::LinearRamp& r) {
                   if (!std::isfinite(r.rate_m_per_pulse)) {
                     throw Error("motion: ramp rate must be finite");
                   }
                 },
             },
             program);
  return warnings;
}

double RenderContext::max_range_m() const {
  const double free_samples = static_cast<double>(window_len) - static_cast<double>(chirp.sample_count());
  return free_samples / chirp.sample_rate_hz * kSpeedOfLight / 2.0;
}

double delay_of(const TargetSpec& target, std::uint64_t pulse_index, double prf_hz) {
  return 2.0 * (target.range0_m + range_offset(target.motion, pulse_index, prf_hz)) / kSpeedOfLight;
}

double noise_power(std::span<const TargetSpec> targets, const ChannelSpec& channel) {
  if (!channel.snr_db) {
    return 0.0;
  }
  double reference = targets.empty() ? 1.0 : 0.0;
  for (const auto& t : targets) {
    reference = std::max(reference, t.amplitude * t.amplitude);
  }
  return reference / std::pow(10.0, *channel.snr_db / 10.0);
}

std::vector<ComplexF> complex_noise(std::uint64_t seed, std::uint64_t pulse_index, std::uint64_t stream,
                                    std::size_t count, double power) {
  std::uint64_t state = seed;
  state = splitmix64(state) ^ pulse_index;
  state = splitmix64(state) ^ stream;
  std::mt19937_64 gen(splitmix64(state));

  const double sigma = std::sqrt(power / 2.0);
  std::vector<ComplexF> out(count);
  for (auto& v : out) {
    const double radius = std::sqrt(-2.0 * std::log(unit_open(gen)));
    const double angle = 2.0 * kPi * unit_open(gen);
    v = {sigma * radius * std::cos(angle), sigma * radius * std::sin(angle)};
  }
  return out;
}

SceneRenderer::SceneRenderer(RenderContext context)
    : context_(std::move(context)),
      chirp_(synthesize_chirp(context_.chirp)),
      fft_size_(std::bit_ceil(2 * std::max(context_.window_len, chirp_.size()))),
      inverse_(fft_size_, FftPlan::Direction::Inverse) {
  if (context_.window_len < chirp_.size()) {
    throw Error("scene: receive window shorter than the chirp");
  }
  if (!(context_.prf_hz > 0.0)) {
    throw Error("scene: PRF must be positive");
  }
  std::vector<ComplexF> padded(fft_size_);
  std::copy(chirp_.begin(), chirp_.end(), padded.begin());
  chirp_spectrum_ = FftPlan(fft_size_, FftPlan::Direction::Forward)(padded);
}

void SceneRenderer::add_echo(std::vector<ComplexF>& window, const TargetSpec& target, std::size_t index,
                             std::uint64_t pulse_index) const {
  if (!(target.amplitude > 0.0) || !(target.range0_m >= 0.0)) {
    throw Error("scene: target " + std::to_string(index) + " needs amplitude > 0 and range >= 0");
  }
  const double t_del = delay_of(target, pulse_index, context_.prf_hz);
  const double delay = t_del * context_.chirp.sample_rate_hz;
  if (!(delay >= 0.0) || delay + static_cast<double>(chirp_.size()) > static_cast<double>(context_.window_len)) {
    throw Error("scene: target " + std::to_string(index) + " echo at " + std::to_string(t_del * 1e6) +
                " us does not fit in the receive window");
  }

  const double carrier_phase = -2.0 * kPi * context_.chirp.carrier_hz * t_del;
  const ComplexF gain = std::polar(target.amplitude, carrier_phase);
  const double rounded = std::round(delay);

  // Ranges built as d * c / (2 fs) come back a few ulps off the integer.
  if (std::abs(delay - rounded) < 1e-9) {
    const auto shift = static_cast<std::size_t>(rounded);
    for (std::size_t n = 0; n < chirp_.size(); ++n) {
      window[shift + n] += gain * chirp_[n];
    }
    return;
  }

  // Band-limited fractional delay: linear phase across the padded spectrum.
  const auto n_fft = static_cast<std::ptrdiff_t>(fft_size_);
  std::vector<ComplexF> shifted(fft_size_);
  for (std::ptrdiff_t k = 0; k < n_fft; ++k) {
    const std::ptrdiff_t freq = k < n_fft / 2 ? k : k - n_fft;
    const double angle = -2.0 * kPi * static_cast<double>(freq) * delay / static_cast<double>(n_fft);
    shifted[static_cast<std::size_t>(k)] = chirp_spectrum_[static_cast<std::size_t>(k)] * std::polar(1.0, angle);
  }
  const auto delayed = inverse_(shifted);
  const ComplexF scale = gain / static_cast<double>(fft_size_);
  for (std::size_t n = 0; n < context_.window_len; ++n) {
    window[n] += scale * delayed[n];
  }
}

std::vector<ComplexF> SceneRenderer::rx2_float(std::span<const TargetSpec> targets, std::uint64_t pulse_index) const {
  std::vector<ComplexF> window(context_.window_len);
  for (std::size_t i = 0; i < targets.size(); ++i) {
    add_echo(window, targets[i], i, pulse_index);
  }
  return window;
}

IqBuffer SceneRenderer::render_rx2(std::span<const TargetSpec> targets, const ChannelSpec& channel,
                                   std::uint64_t pulse_index, std::size_t* saturated) const {
  auto window = rx2_float(targets, pulse_index);
  const double power = noise_power(targets, channel);
  if (power > 0.0) {
    const auto noise = complex_noise(channel.noise_seed, pulse_index, kStreamRx2, window.size(), power);
    for (std::size_t n = 0; n < window.size(); ++n) {
      window[n] += noise[n];
    }
  }
  std::size_t clipped = 0;
  auto out = quantize(window, context_.headroom, clipped);
  if (saturated != nullptr) {
    *saturated = clipped;
  }
  return out;
}

IqBuffer SceneRenderer::render_rx1(const ChannelSpec& channel, std::uint64_t pulse_index) const {
  if (!channel.rx1_noise_db) {
    return quantize(chirp_, context_.headroom);
  }
  const double power = std::pow(10.0, -*channel.rx1_noise_db / 10.0);
  const auto noise = complex_noise(channel.noise_seed, pulse_index, kStreamRx1, chirp_.size(), power);
  std::vector<ComplexF> noisy(chirp_.size());
  for (std::size_t n = 0; n < chirp_.size(); ++n) {
    noisy[n] = chirp_[n] + noise[n];
  }
  return quantize(noisy, context_.headroom);
}

PulsePair SceneRenderer::render(std::span<const TargetSpec> targets, const ChannelSpec& channel,
                                std::uint64_t pulse_index) const {
  PulsePair pair;
  pair.pulse_index = pulse_index;
  pair.rx1 = render_rx1(channel, pulse_index);
  pair.rx2 = render_rx2(targets, channel, pulse_index, &pair.saturated);
  pair.truth_m.reserve(targets.size());
  for (const auto& t : targets) {
    pair.truth_m.push_back(range_offset(t.motion, pulse_index, context_.prf_hz));
  }
  return pair;
}

IqBuffer render_rx2(const RenderContext& context, std::span<const TargetSpec> targets,
                    const ChannelSpec& channel, std::uint64_t pulse_index) {
  return SceneRenderer(context).render_rx2(targets, channel, pulse_index);
}

IqBuffer render_rx1(const RenderContext& context, const ChannelSpec& channel, std::uint64_t pulse_index) {
  return SceneRenderer(context).render_rx1(channel, pulse_index);
}

} // namespace pulseradar
