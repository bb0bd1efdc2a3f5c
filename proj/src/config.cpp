#include "pulseradar/config.hpp"

#include <bit>
#include <cstdlib>
#include <fstream>

namespace pulseradar {

using nlohmann::json;

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error("cannot open " + path.string());
  }
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

template <class T>
void read_if(const json& j, const char* key, T& value) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    it->get_to(value);
  }
}

std::optional<double> optional_double(const json& j, const char* key) {
  if (auto it = j.find(key); it != j.end() && !it->is_null()) {
    return it->get<double>();
  }
  return std::nullopt;
}

std::string truncation_name(Truncation t) { return t == Truncation::DropLsb ? "drop_lsb" : "saturate_msb"; }

Truncation parse_truncation(const std::string& name) {
  if (name == "drop_lsb") {
    return Truncation::DropLsb;
  }
  if (name == "saturate_msb") {
    return Truncation::SaturateMsb;
  }
  throw Error("unknown truncation mode '" + name + "'");
}

} // namespace

std::string axis_mode_name(AxisMode mode) { return mode == AxisMode::Frequency ? "frequency" : "velocity"; }

AxisMode parse_axis_mode(const std::string& name) {
  if (name == "frequency") {
    return AxisMode::Frequency;
  }
  if (name == "velocity") {
    return AxisMode::Velocity;
  }
  throw Error("unknown axis mode '" + name + "'");
}

void to_json(json& j, const ChirpParams& p) {
  j = json{{"carrier_hz", p.carrier_hz},         {"bandwidth_hz", p.bandwidth_hz},
           {"duration_s", p.duration_s},         {"sample_rate_hz", p.sample_rate_hz},
           {"initial_phase_rad", p.initial_phase_rad}, {"center_offset_hz", p.center_offset_hz}};
}

void from_json(const json& j, ChirpParams& p) {
  read_if(j, "carrier_hz", p.carrier_hz);
  read_if(j, "bandwidth_hz", p.bandwidth_hz);
  read_if(j, "duration_s", p.duration_s);
  read_if(j, "sample_rate_hz", p.sample_rate_hz);
  read_if(j, "initial_phase_rad", p.initial_phase_rad);
  read_if(j, "center_offset_hz", p.center_offset_hz);
}

void to_json(json& j, const EngineConfig& e) {
  j = json{{"taps", e.taps},
           {"window_len", e.window_len},
           {"sample_bits", e.sample_bits},
           {"accum_bits_expected", e.accum_bits_expected},
           {"magsq_bits_expected", e.magsq_bits_expected},
           {"truncate_to_bits", e.truncate_to_bits},
           {"truncation", truncation_name(e.truncation)},
           {"threads", e.threads}};
}

void from_json(const json& j, EngineConfig& e) {
  read_if(j, "taps", e.taps);
  read_if(j, "window_len", e.window_len);
  read_if(j, "sample_bits", e.sample_bits);
  read_if(j, "accum_bits_expected", e.accum_bits_expected);
  read_if(j, "magsq_bits_expected", e.magsq_bits_expected);
  read_if(j, "truncate_to_bits", e.truncate_to_bits);
  read_if(j, "threads", e.threads);
  if (auto it = j.find("truncation"); it != j.end()) {
    e.truncation = parse_truncation(it->get<std::string>());
  }
}

void to_json(json& j, const MotionProgram& m) {
  std::visit(Overloaded{
                 [&](const motion::Static&) { j = json{{"type", "static"}}; },
                 [&](const motion::StepSchedule& s) {
                   json steps = json::array();
                   for (const auto& step : s.steps) {
                     steps.push_back({{"pulse", step.pulse_index}, {"offset_m", step.offset_m}});
                   }
                   j = json{{"type", "steps"}, {"steps", steps}, {"transition_pulses", s.transition_pulses}};
                 },
                 [&](const motion::Sinusoid& s) {
                   j = json{{"type", "sinusoid"},
                            {"freq_hz", s.freq_hz},
                            {"peak_amp_m", s.peak_amp_m},
                            {"phase_rad", s.phase_rad}};
                 },
                 [&](const motion::LinearRamp& r) {
                   j = json{{"type", "ramp"}, {"rate_m_per_pulse", r.rate_m_per_pulse}};
                 },
             },
             m);
}

void from_json(const json& j, MotionProgram& m) {
  const auto type = j.at("type").get<std::string>();
  if (type == "static") {
    m = motion::Static{};
  } else if (type == "steps") {
    motion::StepSchedule s;
    for (const auto& step : j.at("steps")) {
      s.steps.push_back({step.at("pulse").get<std::uint64_t>(), step.at("offset_m").get<double>()});
    }
    read_if(j, "transition_pulses", s.transition_pulses);
    m = std::move(s);
  } else if (type == "sinusoid") {
    motion::Sinusoid s;
    s.freq_hz = j.at("freq_hz").get<double>();
    s.peak_amp_m = j.at("peak_amp_m").get<double>();
    read_if(j, "phase_rad", s.phase_rad);
    m = s;
  } else if (type == "ramp") {
    m = motion::LinearRamp{j.at("rate_m_per_pulse").get<double>()};
  } else {
    throw Error("unknown motion type '" + type + "'");
  }
}

void to_json(json& j, const TargetSpec& t) {
  // MotionProgram is a std::variant alias, so ADL cannot find its converters.
  json motion;
  to_json(motion, t.motion);
  j = json{{"range0_m", t.range0_m}, {"amplitude", t.amplitude}, {"motion", motion}};
}

void from_json(const json& j, TargetSpec& t) {
  t.range0_m = j.at("range0_m").get<double>();
  read_if(j, "amplitude", t.amplitude);
  if (auto it = j.find("motion"); it != j.end()) {
    from_json(*it, t.motion);
  }
}

void to_json(json& j, const ChannelSpec& c) {
  j = json{{"snr_db", c.snr_db ? json(*c.snr_db) : json(nullptr)},
           {"noise_seed", c.noise_seed},
           {"rx1_noise_db", c.rx1_noise_db ? json(*c.rx1_noise_db) : json(nullptr)},
           {"generator", kNoiseGenerator}};
}

void from_json(const json& j, ChannelSpec& c) {
  c.snr_db = optional_double(j, "snr_db");
  c.rx1_noise_db = optional_double(j, "rx1_noise_db");
  read_if(j, "noise_seed", c.noise_seed);
  if (auto it = j.find("generator"); it != j.end() && it->get<std::string>() != kNoiseGenerator) {
    throw Error("unsupported noise generator '" + it->get<std::string>() + "'");
  }
}

void to_json(json& j, const Scene& s) { j = json{{"targets", s.targets}, {"channel", s.channel}}; }

void from_json(const json& j, Scene& s) {
  s.targets.clear();
  if (auto it = j.find("targets"); it != j.end()) {
    it->get_to(s.targets);
  }
  s.channel = {};
  if (auto it = j.find("channel"); it != j.end()) {
    it->get_to(s.channel);
  }
}

void to_json(json& j, const SystemConfig& c) {
  j = json{{"chirp", c.chirp},
           {"engine", c.engine},
           {"prf_hz", c.prf_hz},
           {"pack_size", c.pack_size},
           {"avg_window", c.avg_window},
           {"headroom", c.headroom},
           {"scene", c.scene},
           {"serve",
            {{"address", c.serve_address},
             {"realtime", c.realtime},
             {"profile_stride", c.profile_stride},
             {"max_clients", c.max_clients}}},
           {"selected_bin", c.selected_bin ? json(*c.selected_bin) : json(nullptr)},
           {"spectrum",
            {{"axis", axis_mode_name(c.spectrum.axis)},
             {"window", c.spectrum.window == SpectrumWindow::Hann ? "hann" : "rectangular"},
             {"input", c.spectrum.input == SpectrumInput::Complex ? "complex" : "displacement"}}},
           {"waterfall_capacity", c.waterfall_capacity}};
}

SystemConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  SystemConfig c;
  try {
    read_if(j, "chirp", c.chirp);
    read_if(j, "engine", c.engine);
    read_if(j, "prf_hz", c.prf_hz);
    read_if(j, "pack_size", c.pack_size);
    read_if(j, "avg_window", c.avg_window);
    read_if(j, "headroom", c.headroom);
    read_if(j, "waterfall_capacity", c.waterfall_capacity);
    if (auto it = j.find("scene"); it != j.end()) {
      if (it->is_string()) {
        auto path = std::filesystem::path(it->get<std::string>());
        if (path.is_relative() && !base_dir.empty()) {
          path = base_dir / path;
        }
        c.scene_path = path.string();
        c.scene = load_scene(path);
      } else {
        it->get_to(c.scene);
      }
    }
    if (auto it = j.find("serve"); it != j.end()) {
      read_if(*it, "address", c.serve_address);
      read_if(*it, "realtime", c.realtime);
      read_if(*it, "profile_stride", c.profile_stride);
      read_if(*it, "max_clients", c.max_clients);
    }
    if (auto it = j.find("selected_bin"); it != j.end() && !it->is_null()) {
      c.selected_bin = it->get<std::size_t>();
    }
    if (auto it = j.find("spectrum"); it != j.end()) {
      if (auto a = it->find("axis"); a != it->end()) {
        c.spectrum.axis = parse_axis_mode(a->get<std::string>());
      }
      if (auto w = it->find("window"); w != it->end()) {
        const auto name = w->get<std::string>();
        if (name != "hann" && name != "rectangular") {
          throw Error("unknown spectrum window '" + name + "'");
        }
        c.spectrum.window = name == "hann" ? SpectrumWindow::Hann : SpectrumWindow::Rectangular;
      }
      if (auto in = it->find("input"); in != it->end()) {
        const auto name = in->get<std::string>();
        if (name != "complex" && name != "displacement") {
          throw Error("unknown spectrum input '" + name + "'");
        }
        c.spectrum.input = name == "complex" ? SpectrumInput::Complex : SpectrumInput::Displacement;
      }
    }
  } catch (const json::exception& e) {
    throw Error(std::string("config: ") + e.what());
  }
  c.spectrum.carrier_hz = c.chirp.carrier_hz;
  return c;
}

std::vector<std::string> SystemConfig::validate() const {
  chirp.validate();
  engine.validate();
  if (chirp.sample_count() != engine.taps) {
    throw Error("config: chirp length " + std::to_string(chirp.sample_count()) + " must equal correlator taps " +
                std::to_string(engine.taps));
  }
  if (!(prf_hz > 0.0)) {
    throw Error("config: prf_hz must be positive");
  }
  const double window_s = static_cast<double>(engine.window_len) / chirp.sample_rate_hz;
  if (1.0 / prf_hz <= window_s + kComputeBudgetS) {
    throw Error("config: PRI " + std::to_string(1e3 / prf_hz) + " ms leaves no room for the receive window plus " +
                std::to_string(kComputeBudgetS * 1e3) + " ms compute budget");
  }
  if (pack_size < 2 || !std::has_single_bit(pack_size)) {
    throw Error("config: pack_size must be a power of two");
  }
  if (avg_window == 0) {
    throw Error("config: avg_window must be positive");
  }
  if (!(headroom > 0.0 && headroom <= 1.0)) {
    throw Error("config: headroom must lie in (0, 1]");
  }
  if (profile_stride == 0) {
    throw Error("config: profile_stride must be positive");
  }
  if (waterfall_capacity == 0) {
    throw Error("config: waterfall_capacity must be positive");
  }
  if (selected_bin && *selected_bin >= engine.lag_count()) {
    throw Error("config: selected_bin outside the range profile");
  }
  std::vector<std::string> warnings;
  const RenderContext ctx = render_context();
  for (std::size_t i = 0; i < scene.targets.size(); ++i) {
    const auto& t = scene.targets[i];
    if (!(t.amplitude > 0.0) || !(t.range0_m >= 0.0) || t.range0_m > ctx.max_range_m()) {
      throw Error("config: target " + std::to_string(i) + " needs amplitude > 0 and range in [0, " +
                  std::to_string(ctx.max_range_m()) + "] m");
    }
    for (auto& w : validate_motion(t.motion, prf_hz)) {
      warnings.push_back("target " + std::to_string(i) + ": " + w);
    }
  }
  return warnings;
}

RenderContext SystemConfig::render_context() const {
  RenderContext ctx;
  ctx.chirp = chirp;
  ctx.prf_hz = prf_hz;
  ctx.window_len = engine.window_len;
  ctx.headroom = headroom;
  return ctx;
}

SystemConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

Scene load_scene(const std::filesystem::path& path) {
  try {
    return read_json_file(path).get<Scene>();
  } catch (const json::exception& e) {
    throw Error(path.string() + ": " + e.what());
  }
}

void apply_env_overrides(SystemConfig& config) {
  if (const char* seed = std::getenv(kEnvSeed); seed != nullptr && *seed != '\0') {
    try {
      config.scene.channel.noise_seed = std::stoull(seed);
    } catch (const std::exception&) {
      throw Error(std::string(kEnvSeed) + " is not an unsigned integer: " + seed);
    }
  }
  if (const char* addr = std::getenv(kEnvAddress); addr != nullptr && *addr != '\0') {
    config.serve_address = addr;
  }
}

HostPort parse_address(const std::string& address) {
  const auto colon = address.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
    throw Error("address must be host:port, got '" + address + "'");
  }
  HostPort hp;
  hp.host = address.substr(0, colon);
  try {
    const unsigned long port = std::stoul(address.substr(colon + 1));
    if (port > 65535) {
      throw Error("");
    }
    hp.port = static_cast<std::uint16_t>(port);
  } catch (const std::exception&) {
    throw Error("invalid port in address '" + address + "'");
  }
  return hp;
}

} // namespace pulseradar
