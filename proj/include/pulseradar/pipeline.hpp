#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "pulseradar/config.hpp"
#include "pulseradar/protocol.hpp"
#include "pulseradar/scene.hpp"
#include "pulseradar/slowtime.hpp"
#include "pulseradar/xcorr.hpp"

namespace pulseradar {

struct PulseResult {
  RangeProfile profile;
  std::size_t bin_index = 0;
  ComplexAcc bin_sample;
  double displacement_m = 0.0;
  std::optional<VibrationSpectrum> spectrum;
};

// Range compression plus slow-time analysis of one monitored bin. Owns the
// DC feedback, the unwrapping state, the pack accumulator and the
// waterfall, so one Analyzer serves exactly one ordered pulse stream.
class Analyzer {
public:
  explicit Analyzer(const SystemConfig& config);

  PulseResult process(const PulsePair& pair);

  void select_bin(std::size_t index);
  void set_pack_size(std::size_t size);
  void set_axis(AxisMode mode);
  // Drops the partial pack and restarts displacement at zero.
  void restart_tracking();

  std::optional<std::size_t> selected_bin() const noexcept { return bin_; }
  const PackAccumulator& pack() const noexcept { return pack_; }
  const Waterfall& waterfall() const noexcept { return waterfall_; }
  const PhaseTracker& tracker() const noexcept { return tracker_; }

private:
  RangeCompressor compressor_;
  std::optional<std::size_t> bin_;
  PhaseTracker tracker_;
  PackAccumulator pack_;
  Waterfall waterfall_;
};

struct ControlReply {
  bool ok = true;
  std::string message;
  std::uint64_t effective_pulse = 0;
};

struct StepOutput {
  PulsePair pair;
  PulseResult result;
  FrameOut frame;
};

// Scene -> correlator -> slow-time chain with control handling. Commands
// are validated on submit() and applied at the start of the next step(),
// i.e. on a PRI boundary. submit() may be called from any thread; step()
// from one thread only.
class Pipeline {
public:
  explicit Pipeline(SystemConfig config);

  ControlReply submit(const ControlIn& command);

  // Processes one PRI. Returns empty while stopped (no pulse is consumed).
  std::optional<StepOutput> step(std::uint64_t t_capture_ns = 0);

  bool running() const noexcept { return running_.load(); }
  std::uint64_t next_pulse() const noexcept { return next_pulse_.load(); }
  std::size_t profile_stride() const noexcept { return stride_; }
  const SystemConfig& config() const noexcept { return config_; }
  const Analyzer& analyzer() const noexcept { return analyzer_; }
  const Scene& scene() const noexcept { return config_.scene; }

private:
  void apply(const ControlIn& command);

  SystemConfig config_;
  SceneRenderer renderer_;
  Analyzer analyzer_;
  std::size_t stride_;
  std::atomic<std::uint64_t> next_pulse_{0};
  std::atomic<bool> running_{true};
  std::mutex pending_mutex_;
  std::vector<ControlIn> pending_;
};

} // namespace pulseradar
