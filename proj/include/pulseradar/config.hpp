#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pulseradar/scene.hpp"
#include "pulseradar/slowtime.hpp"
#include "pulseradar/waveform.hpp"
#include "pulseradar/xcorr.hpp"

namespace pulseradar {

struct Scene {
  std::vector<TargetSpec> targets;
  ChannelSpec channel;
};

// Host processing time reserved per PRI on top of the receive window when
// checking that a PRF is sustainable.
inline constexpr double kComputeBudgetS = 2e-3;

struct SystemConfig {
  ChirpParams chirp;
  EngineConfig engine;
  double prf_hz = 100.0;
  std::size_t pack_size = kDefaultPackSize;
  std::size_t avg_window = kDefaultAverageWindow;
  double headroom = kDefaultHeadroom;

  // Source file of the scene, if it was loaded from one.
  std::string scene_path;
  Scene scene;

  std::string serve_address = "127.0.0.1:8765";
  bool realtime = true;
  std::size_t profile_stride = 4;
  std::size_t max_clients = 4;

  // Monitored bin; empty selects the strongest bin of the first profile.
  std::optional<std::size_t> selected_bin;
  SpectrumOptions spectrum;
  std::size_t waterfall_capacity = 100;

  // Throws Error on any violated invariant; returns warnings otherwise.
  std::vector<std::string> validate() const;
  RenderContext render_context() const;
  double pri_s() const { return 1.0 / prf_hz; }
};

void to_json(nlohmann::json& j, const ChirpParams& p);
void from_json(const nlohmann::json& j, ChirpParams& p);
void to_json(nlohmann::json& j, const EngineConfig& e);
void from_json(const nlohmann::json& j, EngineConfig& e);
void to_json(nlohmann::json& j, const MotionProgram& m);
void from_json(const nlohmann::json& j, MotionProgram& m);
void to_json(nlohmann::json& j, const TargetSpec& t);
void from_json(const nlohmann::json& j, TargetSpec& t);
void to_json(nlohmann::json& j, const ChannelSpec& c);
void from_json(const nlohmann::json& j, ChannelSpec& c);
void to_json(nlohmann::json& j, const Scene& s);
void from_json(const nlohmann::json& j, Scene& s);
void to_json(nlohmann::json& j, const SystemConfig& c);
// A string "scene" member is resolved relative to `base_dir`.
SystemConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});

std::string axis_mode_name(AxisMode mode);
AxisMode parse_axis_mode(const std::string& name);

SystemConfig load_config(const std::filesystem::path& path);
Scene load_scene(const std::filesystem::path& path);

inline constexpr const char* kEnvSeed = "PULSERADAR_SEED";
inline constexpr const char* kEnvAddress = "PULSERADAR_ADDR";

// Applies PULSERADAR_SEED (noise seed) and PULSERADAR_ADDR (serve address).
void apply_env_overrides(SystemConfig& config);

struct HostPort {
  std::string host;
  std::uint16_t port = 0;
};

HostPort parse_address(const std::string& address);

} // namespace pulseradar
