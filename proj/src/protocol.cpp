#include "pulseradar/protocol.hpp"

#include <algorithm>

#include "pulseradar/bytes.hpp"
#include "pulseradar/config.hpp"

namespace pulseradar {

using nlohmann::json;

std::vector<std::uint8_t> encode_frame(const FrameOut& frame) {
  ByteWriter w;
  w.bytes(std::string_view(kFrameMagic, 4));
  w.u16(kWireVersion);
  std::uint16_t flags = 0;
  if (!frame.profile.empty()) {
    flags |= kFlagProfile;
  }
  if (frame.spectrum) {
    flags |= kFlagSpectrum;
  }
  w.u16(flags);
  w.u64(frame.pulse_index);
  w.u32(frame.bin_index);
  w.u32(frame.profile_stride);
  w.i64(frame.bin_sample.re);
  w.i64(frame.bin_sample.im);
  w.f64(frame.displacement_m);
  w.u64(frame.t_capture_ns);
  w.u64(frame.t_emit_ns);
  w.u32(static_cast<std::uint32_t>(frame.profile.size()));
  w.u32(frame.spectrum ? static_cast<std::uint32_t>(frame.spectrum->magnitudes.size()) : 0);
  for (auto v : frame.profile) {
    w.u64(v);
  }
  if (frame.spectrum) {
    const auto& s = *frame.spectrum;
    w.f64(s.resolution_hz);
    w.f64(s.velocity_per_hz);
    w.u64(s.last_pulse_index);
    w.u8(s.axis == AxisMode::Frequency ? 0 : 1);
    w.zeros(7);
    for (double m : s.magnitudes) {
      w.f64(m);
    }
  }
  return w.take();
}

FrameOut decode_frame(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4) != std::string_view(kFrameMagic, 4)) {
    throw ProtocolError("frame: bad magic");
  }
  if (const auto version = r.u16(); version != kWireVersion) {
    throw ProtocolError("frame: unsupported schema version " + std::to_string(version));
  }
  const std::uint16_t flags = r.u16();
  FrameOut f;
  f.pulse_index = r.u64();
  f.bin_index = r.u32();
  f.profile_stride = r.u32();
  f.bin_sample.re = r.i64();
  f.bin_sample.im = r.i64();
  f.displacement_m = r.f64();
  f.t_capture_ns = r.u64();
  f.t_emit_ns = r.u64();
  const std::uint32_t profile_len = r.u32();
  const std::uint32_t spectrum_len = r.u32();
  if (((flags & kFlagProfile) != 0) != (profile_len != 0)) {
    throw ProtocolError("frame: profile flag disagrees with profile length");
  }
  const std::uint64_t body = 8 * std::uint64_t{profile_len} +
                             ((flags & kFlagSpectrum) != 0 ? 32 + 8 * std::uint64_t{spectrum_len} : 0);
  if (body > r.remaining()) {
    throw ProtocolError("frame: truncated payload");
  }
  f.profile.resize(profile_len);
  for (auto& v : f.profile) {
    v = r.u64();
  }
  if ((flags & kFlagSpectrum) != 0) {
    SpectrumPayload s;
    s.resolution_hz = r.f64();
    s.velocity_per_hz = r.f64();
    s.last_pulse_index = r.u64();
    s.axis = r.u8() == 0 ? AxisMode::Frequency : AxisMode::Velocity;
    r.skip(7);
    s.magnitudes.resize(spectrum_len);
    for (auto& m : s.magnitudes) {
      m = r.f64();
    }
    f.spectrum = std::move(s);
  } else if (spectrum_len != 0) {
    throw ProtocolError("frame: spectrum length without spectrum flag");
  }
  if (r.remaining() != 0) {
    throw ProtocolError("frame: trailing bytes");
  }
  return f;
}

std::vector<std::uint64_t> decimate_max(std::span<const std::uint64_t> magnitude, std::size_t stride) {
  if (stride == 0) {
    throw Error("decimate: stride must be positive");
  }
  std::vector<std::uint64_t> out;
  out.reserve((magnitude.size() + stride - 1) / stride);
  for (std::size_t n = 0; n < magnitude.size(); n += stride) {
    const auto last = std::min(magnitude.size(), n + stride);
    out.push_back(*std::max_element(magnitude.begin() + static_cast<std::ptrdiff_t>(n),
                                    magnitude.begin() + static_cast<std::ptrdiff_t>(last)));
  }
  return out;
}

SpectrumPayload to_payload(const VibrationSpectrum& spectrum) {
  SpectrumPayload p;
  p.resolution_hz = spectrum.resolution_hz();
  p.velocity_per_hz = spectrum.bins.size() > 1 ? spectrum.bins[1].velocity_mps / spectrum.bins[1].freq_hz : 0.0;
  p.last_pulse_index = spectrum.last_pulse_index;
  p.axis = spectrum.axis_mode;
  p.magnitudes = spectrum.magnitudes();
  return p;
}

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t require_index(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer() || it->get<std::int64_t>() < 0) {
    throw ProtocolError(std::string("field '") + key + "' must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

} // namespace

std::string command_name(const ControlIn& command) {
  return std::visit(Overloaded{
                        [](const control::SelectBin&) { return "select_bin"; },
                        [](const control::SetPackSize&) { return "set_pack_size"; },
                        [](const control::SetMotion&) { return "set_motion"; },
                        [](const control::SetSnr&) { return "set_snr"; },
                        [](const control::Start&) { return "start"; },
                        [](const control::Stop&) { return "stop"; },
                        [](const control::SetAxisMode&) { return "set_axis_mode"; },
                        [](const control::SetProfileStride&) { return "set_profile_stride"; },
                    },
                    command);
}

ParsedControl parse_control(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) {
    throw ProtocolError("control message must be a JSON object");
  }
  auto cmd_it = j.find("cmd");
  if (cmd_it == j.end() || !cmd_it->is_string()) {
    throw ProtocolError("control message needs a string 'cmd'");
  }
  ParsedControl out;
  if (auto seq = j.find("seq"); seq != j.end()) {
    if (!seq->is_number_integer()) {
      throw ProtocolError("'seq' must be an integer");
    }
    out.seq = seq->get<std::int64_t>();
  }

  const auto cmd = cmd_it->get<std::string>();
  try {
    if (cmd == "select_bin") {
      out.command = control::SelectBin{require_index(j, "index")};
    } else if (cmd == "set_pack_size") {
      out.command = control::SetPackSize{require_index(j, "size")};
    } else if (cmd == "set_motion") {
      control::SetMotion m;
      m.target = require_index(j, "target");
      if (!j.contains("motion")) {
        throw ProtocolError("set_motion needs 'motion'");
      }
      from_json(j.at("motion"), m.motion);
      out.command = std::move(m);
    } else if (cmd == "set_snr") {
      auto it = j.find("snr_db");
      if (it == j.end() || !(it->is_null() || it->is_number())) {
        throw ProtocolError("set_snr needs numeric or null 'snr_db'");
      }
      out.command = control::SetSnr{it->is_null() ? std::nullopt : std::optional<double>(it->get<double>())};
    } else if (cmd == "start") {
      out.command = control::Start{};
    } else if (cmd == "stop") {
      out.command = control::Stop{};
    } else if (cmd == "set_axis_mode") {
      auto it = j.find("mode");
      if (it == j.end() || !it->is_string()) {
        throw ProtocolError("set_axis_mode needs string 'mode'");
      }
      out.command = control::SetAxisMode{parse_axis_mode(it->get<std::string>())};
    } else if (cmd == "set_profile_stride") {
      out.command = control::SetProfileStride{require_index(j, "stride")};
    } else {
      throw ProtocolError("unknown command '" + cmd + "'");
    }
  } catch (const ProtocolError&) {
    throw;
  } catch (const std::exception& e) {
    throw ProtocolError(cmd + ": " + e.what());
  }
  return out;
}

json control_to_json(const ControlIn& command) {
  json j = std::visit(Overloaded{
                          [](const control::SelectBin& c) { return json{{"index", c.index}}; },
                          [](const control::SetPackSize& c) { return json{{"size", c.size}}; },
                          [](const control::SetMotion& c) {
                            json motion;
                            to_json(motion, c.motion);
                            return json{{"target", c.target}, {"motion", motion}};
                          },
                          [](const control::SetSnr& c) {
                            return json{{"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)}};
                          },
                          [](const control::Start&) { return json::object(); },
                          [](const control::Stop&) { return json::object(); },
                          [](const control::SetAxisMode& c) { return json{{"mode", axis_mode_name(c.mode)}}; },
                          [](const control::SetProfileStride& c) { return json{{"stride", c.stride}}; },
                      },
                      command);
  j["cmd"] = command_name(command);
  return j;
}

std::string ack_reply(const std::string& cmd, std::optional<std::int64_t> seq, std::uint64_t effective_pulse) {
  json j{{"type", "ack"}, {"cmd", cmd}, {"effective_pulse", effective_pulse}};
  j["seq"] = seq ? json(*seq) : json(nullptr);
  return j.dump();
}

std::string error_reply(const std::string& cmd, std::optional<std::int64_t> seq, const std::string& message) {
  json j{{"type", "error"}, {"cmd", cmd}, {"message", message}};
  j["seq"] = seq ? json(*seq) : json(nullptr);
  return j.dump();
}

} // namespace pulseradar
