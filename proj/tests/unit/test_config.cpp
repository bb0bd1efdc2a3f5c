#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "pulseradar/config.hpp"

using namespace pulseradar;
using nlohmann::json;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("pulseradar_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

} // namespace

TEST_CASE("defaults validate cleanly") {
  SystemConfig c;
  CHECK(c.validate().empty());
  CHECK(c.pri_s() == doctest::Approx(0.01));
  CHECK(c.engine.lag_count() == 2688);
  CHECK(c.render_context().window_len == 3136);
}

TEST_CASE("config round-trips through JSON") {
  SystemConfig c;
  c.prf_hz = 80.0;
  c.pack_size = 128;
  c.engine.truncation = Truncation::SaturateMsb;
  c.engine.threads = 3;
  c.selected_bin = 24;
  c.spectrum.axis = AxisMode::Velocity;
  c.spectrum.window = SpectrumWindow::Hann;
  c.spectrum.input = SpectrumInput::Displacement;
  c.serve_address = "0.0.0.0:9000";
  c.realtime = false;
  TargetSpec a;
  a.range0_m = 30.0;
  a.motion = motion::StepSchedule{{{100, 0.05}, {260, 0.0}}, 12};
  TargetSpec b;
  b.range0_m = 120.5;
  b.amplitude = 0.1;
  b.motion = motion::Sinusoid{12.0, 0.005, 0.25};
  TargetSpec d;
  d.range0_m = 7.0;
  d.motion = motion::LinearRamp{1e-5};
  c.scene.targets = {a, b, d};
  c.scene.channel.snr_db = 13.0;
  c.scene.channel.noise_seed = 1234;
  c.scene.channel.rx1_noise_db = 60.0;

  const json j = c;
  const auto back = config_from_json(json::parse(j.dump()));
  CHECK(json(back) == j);
  CHECK(back.engine.truncation == Truncation::SaturateMsb);
  CHECK(back.selected_bin == std::optional<std::size_t>(24));
  CHECK(std::get<motion::StepSchedule>(back.scene.targets[0].motion).transition_pulses == 12);
  CHECK(std::get<motion::Sinusoid>(back.scene.targets[1].motion).phase_rad == 0.25);
  CHECK(back.scene.channel.rx1_noise_db == 60.0);
  CHECK(back.spectrum.carrier_hz == c.chirp.carrier_hz);
}

TEST_CASE("partial config keeps defaults") {
  const auto c = config_from_json(json::parse(R"({"prf_hz": 50, "scene": {"targets": [{"range0_m": 30}]}})"));
  CHECK(c.prf_hz == 50.0);
  CHECK(c.pack_size == 256);
  REQUIRE(c.scene.targets.size() == 1);
  CHECK(c.scene.targets[0].amplitude == 0.5);
  CHECK(std::holds_alternative<motion::Static>(c.scene.targets[0].motion));
  CHECK(!c.scene.channel.snr_db);
}

TEST_CASE("scene file is resolved relative to the config") {
  const auto dir = temp_dir("config_scene");
  std::ofstream(dir / "scene.json") << R"({"targets":[{"range0_m":30,"motion":{"type":"sinusoid","freq_hz":12,"peak_amp_m":0.005}}],
                                          "channel":{"snr_db":13,"noise_seed":5}})";
  std::ofstream(dir / "config.json") << R"({"scene":"scene.json","pack_size":64})";
  const auto c = load_config(dir / "config.json");
  CHECK(c.pack_size == 64);
  CHECK(c.scene_path == (dir / "scene.json").string());
  CHECK(c.scene.channel.noise_seed == 5);
  CHECK(std::get<motion::Sinusoid>(c.scene.targets[0].motion).freq_hz == 12.0);
}

TEST_CASE("bad input is reported") {
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"engine": {"truncation": "round"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"spectrum": {"axis": "sideways"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"spectrum": {"window": "kaiser"}})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"prf_hz": "fast"})")), Error);
  CHECK_THROWS_AS(config_from_json(json::parse(R"({"scene": {"targets": [{"range0_m": 1, "motion": {"type": "wobble"}}]}})")),
                  Error);
  CHECK_THROWS_AS(
      config_from_json(json::parse(R"({"scene": {"channel": {"generator": "xorshift"}}})")), Error);
  CHECK_THROWS_AS(load_config("/nonexistent/pulseradar.json"), Error);
  const auto dir = temp_dir("config_bad");
  std::ofstream(dir / "broken.json") << "{ not json";
  CHECK_THROWS_AS(load_config(dir / "broken.json"), Error);
}

TEST_CASE("validation rules") {
  SystemConfig c;
  c.pack_size = 100;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.chirp.duration_s = 4e-6; // 480 samples, taps stay 448
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.prf_hz = 40000.0; // PRI 25 us, window alone is 26.13 us
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.prf_hz = 1000.0 / 29.0; // ok
  CHECK_NOTHROW(c.validate());
  c = {};
  c.selected_bin = 2688;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.scene.targets.resize(1);
  c.scene.targets[0].range0_m = 5000.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c.scene.targets[0].range0_m = 30.0;
  c.scene.targets[0].motion = motion::Sinusoid{70.0, 0.001, 0.0};
  const auto warnings = c.validate();
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("target 0") != std::string::npos);
}

TEST_CASE("environment overrides") {
  SystemConfig c;
  ::setenv(kEnvSeed, "77", 1);
  ::setenv(kEnvAddress, "0.0.0.0:1234", 1);
  apply_env_overrides(c);
  CHECK(c.scene.channel.noise_seed == 77);
  CHECK(c.serve_address == "0.0.0.0:1234");
  ::setenv(kEnvSeed, "seven", 1);
  CHECK_THROWS_AS(apply_env_overrides(c), Error);
  ::unsetenv(kEnvSeed);
  ::unsetenv(kEnvAddress);
  SystemConfig d;
  apply_env_overrides(d);
  CHECK(d.scene.channel.noise_seed == 1);
}

TEST_CASE("parse_address") {
  const auto hp = parse_address("127.0.0.1:8765");
  CHECK(hp.host == "127.0.0.1");
  CHECK(hp.port == 8765);
  CHECK(parse_address("localhost:0").port == 0);
  CHECK_THROWS_AS(parse_address("localhost"), Error);
  CHECK_THROWS_AS(parse_address(":80"), Error);
  CHECK_THROWS_AS(parse_address("host:"), Error);
  CHECK_THROWS_AS(parse_address("host:70000"), Error);
  CHECK_THROWS_AS(parse_address("host:http"), Error);
}

TEST_CASE("axis mode names") {
  CHECK(axis_mode_name(AxisMode::Velocity) == "velocity");
  CHECK(parse_axis_mode("frequency") == AxisMode::Frequency);
  CHECK_THROWS_AS(parse_axis_mode("Frequency"), Error);
}
