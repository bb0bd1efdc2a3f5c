#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pulseradar/scene.hpp"
#include "pulseradar/slowtime.hpp"
#include "pulseradar/types.hpp"

namespace pulseradar {

// Wire protocol between the runtime and the operator console.
//
// Server to client, one binary WebSocket message per PRI (little-endian):
//
//   off size field
//     0    4 magic "PRFO"
//     4    2 schema version (kWireVersion)
//     6    2 flags: bit0 profile present, bit1 spectrum present
//     8    8 pulse_index            u64
//    16    4 bin_index              u32
//    20    4 profile_stride         u32
//    24    8 bin sample Re          i64
//    32    8 bin sample Im          i64
//    40    8 displacement_m         f64
//    48    8 t_capture_ns           u64  (PRI start, ns since server start)
//    56    8 t_emit_ns              u64  (serialisation time, same clock)
//    64    4 profile_len P          u32
//    68    4 spectrum_len S         u32
//    72   8P decimated magnitude    u64[P]
//   if bit1:
//          8 resolution_hz          f64
//          8 velocity_per_hz        f64  (lambda / 2)
//          8 spectrum_last_pulse    u64
//          1 axis mode              u8   (0 frequency, 1 velocity)
//          7 zero padding
//         8S one-sided magnitudes   f64[S]
//
// Control traffic is JSON in WebSocket text messages (the WebSocket frame
// carries the length). Every command gets exactly one reply:
//   {"type":"ack","cmd":...,"seq":n,"effective_pulse":p} or
//   {"type":"error","cmd":...,"seq":n,"message":...}.
inline constexpr char kFrameMagic[4] = {'P', 'R', 'F', 'O'};
inline constexpr std::uint16_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 72;

inline constexpr std::uint16_t kFlagProfile = 1u << 0;
inline constexpr std::uint16_t kFlagSpectrum = 1u << 1;

struct SpectrumPayload {
  double resolution_hz = 0.0;
  double velocity_per_hz = 0.0;
  std::uint64_t last_pulse_index = 0;
  AxisMode axis = AxisMode::Frequency;
  std::vector<double> magnitudes;

  friend bool operator==(const SpectrumPayload&, const SpectrumPayload&) = default;
};

struct FrameOut {
  std::uint64_t pulse_index = 0;
  std::uint32_t bin_index = 0;
  std::uint32_t profile_stride = 1;
  ComplexAcc bin_sample;
  double displacement_m = 0.0;
  std::uint64_t t_capture_ns = 0;
  std::uint64_t t_emit_ns = 0;
  // Empty when dropped under back-pressure.
  std::vector<std::uint64_t> profile;
  std::optional<SpectrumPayload> spectrum;

  friend bool operator==(const FrameOut&, const FrameOut&) = default;
};

std::vector<std::uint8_t> encode_frame(const FrameOut& frame);
FrameOut decode_frame(std::span<const std::uint8_t> bytes);

// Peak-preserving decimation: max over each run of `stride` lags.
std::vector<std::uint64_t> decimate_max(std::span<const std::uint64_t> magnitude, std::size_t stride);

SpectrumPayload to_payload(const VibrationSpectrum& spectrum);

namespace control {

struct SelectBin {
  std::size_t index = 0;
};
struct SetPackSize {
  std::size_t size = 0;
};
struct SetMotion {
  std::size_t target = 0;
  MotionProgram motion;
};
struct SetSnr {
  std::optional<double> snr_db; // empty = noise off
};
struct Start {};
struct Stop {};
struct SetAxisMode {
  AxisMode mode = AxisMode::Frequency;
};
// Stride 1 streams full profiles.
struct SetProfileStride {
  std::size_t stride = 1;
};

} // namespace control

using ControlIn = std::variant<control::SelectBin, control::SetPackSize, control::SetMotion, control::SetSnr,
                               control::Start, control::Stop, control::SetAxisMode, control::SetProfileStride>;

class ProtocolError : public Error {
public:
  using Error::Error;
};

struct ParsedControl {
  ControlIn command;
  std::optional<std::int64_t> seq;
};

// Parses {"cmd": "...", ...}. Throws ProtocolError on malformed input.
ParsedControl parse_control(std::string_view text);
nlohmann::json control_to_json(const ControlIn& command);
std::string command_name(const ControlIn& command);

std::string ack_reply(const std::string& cmd, std::optional<std::int64_t> seq, std::uint64_t effective_pulse);
std::string error_reply(const std::string& cmd, std::optional<std::int64_t> seq, const std::string& message);

} // namespace pulseradar
