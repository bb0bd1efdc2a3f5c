#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "pulseradar/config.hpp"
#include "pulseradar/scene.hpp"

namespace pulseradar {

// Raw PRI capture file. Layout (all little-endian):
//
//   header   "PRRX" | u16 version | u16 reserved
//            u32 rx1_len | u32 rx2_len | u32 n_targets
//            u32 config_len | u32 scene_len
//            config JSON (config_len bytes) | scene JSON (scene_len bytes)
//   record   u64 pulse_index | u32 saturated | f64 truth_m[n_targets]
//            (i16 i, i16 q)[rx1_len] | (i16 i, i16 q)[rx2_len]
//
// Records follow the header back to back until end of file.
inline constexpr char kRecordingMagic[4] = {'P', 'R', 'R', 'X'};
inline constexpr std::uint16_t kRecordingVersion = 1;

struct RecordingHeader {
  std::uint16_t version = kRecordingVersion;
  std::uint32_t rx1_len = 0;
  std::uint32_t rx2_len = 0;
  std::uint32_t n_targets = 0;
  std::string config_json;
  std::string scene_json;
};

RecordingHeader make_recording_header(const SystemConfig& config);

class RecordingWriter {
public:
  RecordingWriter(const std::filesystem::path& path, const RecordingHeader& header);

  void write(const PulsePair& pair);
  void flush();
  std::uint64_t records() const noexcept { return records_; }

private:
  std::ofstream out_;
  RecordingHeader header_;
  std::uint64_t records_ = 0;
};

class RecordingReader {
public:
  explicit RecordingReader(const std::filesystem::path& path);

  const RecordingHeader& header() const noexcept { return header_; }
  // Config stored in the header, scene included.
  SystemConfig config() const;
  // Next record, or empty at a clean end of file. A partial record throws.
  std::optional<PulsePair> next();

private:
  std::ifstream in_;
  RecordingHeader header_;
  std::size_t record_size_ = 0;
};

} // namespace pulseradar
