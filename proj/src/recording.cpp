#include "pulseradar/recording.hpp"

#include <cstring>
#include <vector>

#include "pulseradar/bytes.hpp"

namespace pulseradar {

namespace {

constexpr std::size_t kFixedHeaderSize = 28;

void write_samples(ByteWriter& w, const IqBuffer& buffer) {
  for (const auto& s : buffer) {
    w.i16(s.i);
    w.i16(s.q);
  }
}

IqBuffer read_samples(ByteReader& r, std::size_t count) {
  IqBuffer buffer(count);
  for (std::size_t n = 0; n < count; ++n) {
    buffer[n].i = r.i16();
    buffer[n].q = r.i16();
  }
  return buffer;
}

} // namespace

RecordingHeader make_recording_header(const SystemConfig& config) {
  RecordingHeader h;
  h.rx1_len = static_cast<std::uint32_t>(config.engine.taps);
  h.rx2_len = static_cast<std::uint32_t>(config.engine.window_len);
  h.n_targets = static_cast<std::uint32_t>(config.scene.targets.size());
  h.config_json = nlohmann::json(config).dump();
  h.scene_json = nlohmann::json(config.scene).dump();
  return h;
}

RecordingWriter::RecordingWriter(const std::filesystem::path& path, const RecordingHeader& header)
    : out_(path, std::ios::binary | std::ios::trunc), header_(header) {
  if (!out_) {
    throw Error("recording: cannot create " + path.string());
  }
  ByteWriter w;
  w.bytes(std::string_view(kRecordingMagic, 4));
  w.u16(header.version);
  w.u16(0);
  w.u32(header.rx1_len);
  w.u32(header.rx2_len);
  w.u32(header.n_targets);
  w.u32(static_cast<std::uint32_t>(header.config_json.size()));
  w.u32(static_cast<std::uint32_t>(header.scene_json.size()));
  w.bytes(header.config_json);
  w.bytes(header.scene_json);
  out_.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.size()));
}

void RecordingWriter::write(const PulsePair& pair) {
  if (pair.rx1.size() != header_.rx1_len || pair.rx2.size() != header_.rx2_len ||
      pair.truth_m.size() != header_.n_targets) {
    throw Error("recording: pulse " + std::to_string(pair.pulse_index) + " does not match header dimensions");
  }
  ByteWriter w;
  w.u64(pair.pulse_index);
  w.u32(static_cast<std::uint32_t>(pair.saturated));
  for (double t : pair.truth_m) {
    w.f64(t);
  }
  write_samples(w, pair.rx1);
  write_samples(w, pair.rx2);
  out_.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.size()));
  if (!out_) {
    throw Error("recording: write failed");
  }
  ++records_;
}

void RecordingWriter::flush() { out_.flush(); }

RecordingReader::RecordingReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
  if (!in_) {
    throw Error("recording: cannot open " + path.string());
  }
  std::vector<std::uint8_t> fixed(kFixedHeaderSize);
  if (!in_.read(reinterpret_cast<char*>(fixed.data()), static_cast<std::streamsize>(fixed.size()))) {
    throw Error("recording: " + path.string() + " is too short for a header");
  }
  ByteReader r(fixed);
  if (r.bytes(4) != std::string_view(kRecordingMagic, 4)) {
    throw Error("recording: " + path.string() + " lacks the PRRX magic");
  }
  header_.version = r.u16();
  if (header_.version != kRecordingVersion) {
    throw Error("recording: unsupported version " + std::to_string(header_.version));
  }
  r.skip(2);
  header_.rx1_len = r.u32();
  header_.rx2_len = r.u32();
  header_.n_targets = r.u32();
  const std::uint32_t config_len = r.u32();
  const std::uint32_t scene_len = r.u32();
  header_.config_json.resize(config_len);
  header_.scene_json.resize(scene_len);
  if (!in_.read(header_.config_json.data(), config_len) || !in_.read(header_.scene_json.data(), scene_len)) {
    throw Error("recording: truncated header");
  }
  record_size_ = 8 + 4 + 8 * std::size_t{header_.n_targets} + 4 * std::size_t{header_.rx1_len} +
                 4 * std::size_t{header_.rx2_len};
}

SystemConfig RecordingReader::config() const {
  try {
    auto config = config_from_json(nlohmann::json::parse(header_.config_json));
    config.scene = nlohmann::json::parse(header_.scene_json).get<Scene>();
    return config;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("recording: bad header JSON: ") + e.what());
  }
}

std::optional<PulsePair> RecordingReader::next() {
  std::vector<std::uint8_t> raw(record_size_);
  in_.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (got == 0) {
    return std::nullopt;
  }
  if (got != raw.size()) {
    throw Error("recording: truncated record (" + std::to_string(got) + " of " + std::to_string(raw.size()) +
                " bytes)");
  }
  ByteReader r(raw);
  PulsePair pair;
  pair.pulse_index = r.u64();
  pair.saturated = r.u32();
  pair.truth_m.resize(header_.n_targets);
  for (auto& t : pair.truth_m) {
    t = r.f64();
  }
  pair.rx1 = read_samples(r, header_.rx1_len);
  pair.rx2 = read_samples(r, header_.rx2_len);
  return pair;
}

} // namespace pulseradar
