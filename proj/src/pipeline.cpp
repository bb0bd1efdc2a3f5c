#include "pulseradar/pipeline.hpp"

#include <bit>
#include <cmath>

namespace pulseradar {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr std::size_t kMaxPackSize = std::size_t{1} << 16;

SystemConfig validated(SystemConfig config) {
  config.validate();
  return config;
}

} // namespace

Analyzer::Analyzer(const SystemConfig& config)
    : compressor_(config.engine),
      bin_(config.selected_bin),
      tracker_(config.chirp.carrier_hz),
      pack_(config.pack_size, config.prf_hz, config.spectrum),
      waterfall_(config.waterfall_capacity) {}

PulseResult Analyzer::process(const PulsePair& pair) {
  PulseResult r;
  r.profile = compressor_.process(pair.rx1, pair.rx2, pair.pulse_index);
  if (!bin_) {
    bin_ = peak_bin(r.profile.magnitude);
  }
  r.bin_index = *bin_;
  r.bin_sample = r.profile.lags[r.bin_index];
  r.displacement_m = tracker_.push(r.profile.phase[r.bin_index]);
  r.spectrum = pack_.push(to_complex(r.bin_sample), pair.pulse_index);
  if (r.spectrum) {
    waterfall_.push(*r.spectrum);
  }
  return r;
}

void Analyzer::select_bin(std::size_t index) {
  if (index >= compressor_.config().lag_count()) {
    throw Error("bin " + std::to_string(index) + " outside profile of " +
                std::to_string(compressor_.config().lag_count()) + " lags");
  }
  bin_ = index;
  restart_tracking();
}

void Analyzer::set_pack_size(std::size_t size) {
  pack_.set_pack_size(size);
  waterfall_.clear();
}

void Analyzer::set_axis(AxisMode mode) { pack_.set_axis(mode); }

void Analyzer::restart_tracking() {
  tracker_.reset();
  pack_.reset();
}

Pipeline::Pipeline(SystemConfig config)
    : config_(validated(std::move(config))),
      renderer_(config_.render_context()),
      analyzer_(config_),
      stride_(config_.profile_stride) {}

ControlReply Pipeline::submit(const ControlIn& command) {
  ControlReply reply;
  reply.effective_pulse = next_pulse_.load();
  const std::size_t lags = config_.engine.lag_count();
  try {
    std::visit(Overloaded{
                   [&](const control::SelectBin& c) {
                     if (c.index >= lags) {
                       throw Error("bin " + std::to_string(c.index) + " outside profile of " +
                                   std::to_string(lags) + " lags");
                     }
                   },
                   [&](const control::SetPackSize& c) {
                     if (c.size < 2 || c.size > kMaxPackSize || !std::has_single_bit(c.size)) {
                       throw Error("pack size must be a power of two in [2, 65536]");
                     }
                   },
                   [&](const control::SetMotion& c) {
                     if (c.target >= config_.scene.targets.size()) {
                       throw Error("no target with id " + std::to_string(c.target));
                     }
                     for (const auto& w : validate_motion(c.motion, config_.prf_hz)) {
                       reply.message += (reply.message.empty() ? "" : "; ") + w;
                     }
                   },
                   [&](const control::SetSnr& c) {
                     if (c.snr_db && !std::isfinite(*c.snr_db)) {
                       throw Error("snr_db must be finite");
                     }
                   },
                   [](const control::Start&) {},
                   [](const control::Stop&) {},
                   [](const control::SetAxisMode&) {},
                   [&](const control::SetProfileStride& c) {
                     if (c.stride == 0 || c.stride > lags) {
                       throw Error("profile stride must lie in [1, " + std::to_string(lags) + "]");
                     }
                   },
               },
               command);
  } catch (const Error& e) {
    reply.ok = false;
    reply.message = e.what();
    return reply;
  }
  std::lock_guard lock(pending_mutex_);
  pending_.push_back(command);
  return reply;
}

void Pipeline::apply(const ControlIn& command) {
  std::visit(Overloaded{
                 [&](const control::SelectBin& c) { analyzer_.select_bin(c.index); },
                 [&](const control::SetPackSize& c) { analyzer_.set_pack_size(c.size); },
                 [&](const control::SetMotion& c) { config_.scene.targets.at(c.target).motion = c.motion; },
                 [&](const control::SetSnr& c) { config_.scene.channel.snr_db = c.snr_db; },
                 [&](const control::Start&) {
                   if (!running_.exchange(true)) {
                     analyzer_.restart_tracking();
                   }
                 },
                 [&](const control::Stop&) { running_.store(false); },
                 [&](const control::SetAxisMode& c) { analyzer_.set_axis(c.mode); },
                 [&](const control::SetProfileStride& c) { stride_ = c.stride; },
             },
             command);
}

std::optional<StepOutput> Pipeline::step(std::uint64_t t_capture_ns) {
  std::vector<ControlIn> commands;
  {
    std::lock_guard lock(pending_mutex_);
    commands.swap(pending_);
  }
  for (const auto& c : commands) {
    apply(c);
  }
  if (!running_.load()) {
    return std::nullopt;
  }

  StepOutput out;
  const std::uint64_t pulse = next_pulse_.load();
  out.pair = renderer_.render(config_.scene.targets, config_.scene.channel, pulse);
  out.result = analyzer_.process(out.pair);
  next_pulse_.store(pulse + 1);

  FrameOut& f = out.frame;
  f.pulse_index = pulse;
  f.bin_index = static_cast<std::uint32_t>(out.result.bin_index);
  f.profile_stride = static_cast<std::uint32_t>(stride_);
  f.bin_sample = out.result.bin_sample;
  f.displacement_m = out.result.displacement_m;
  f.t_capture_ns = t_capture_ns;
  f.profile = decimate_max(out.result.profile.magnitude, stride_);
  if (out.result.spectrum) {
    f.spectrum = to_payload(*out.result.spectrum);
  }
  return out;
}

} // namespace pulseradar
