#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

#include "pulseradar/recording.hpp"

using namespace pulseradar;

namespace {

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("pulseradar_" + name);
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

SystemConfig scene_config() {
  SystemConfig c;
  TargetSpec t;
  t.range0_m = 30.0;
  t.motion = motion::Sinusoid{12.0, 0.005, 0.0};
  c.scene.targets = {t};
  c.scene.channel.snr_db = 13.0;
  c.scene.channel.noise_seed = 3;
  return c;
}

} // namespace

TEST_CASE("write then read reproduces pulses and config") {
  const auto config = scene_config();
  const SceneRenderer r(config.render_context());
  const auto path = temp_file("roundtrip.prrx");
  std::vector<PulsePair> pairs;
  {
    RecordingWriter w(path, make_recording_header(config));
    for (std::uint64_t n = 0; n < 5; ++n) {
      pairs.push_back(r.render(config.scene.targets, config.scene.channel, n));
      w.write(pairs.back());
    }
    CHECK(w.records() == 5);
  }
  RecordingReader reader(path);
  CHECK(reader.header().rx1_len == 448);
  CHECK(reader.header().rx2_len == 3136);
  CHECK(reader.header().n_targets == 1);
  const auto back = reader.config();
  CHECK(nlohmann::json(back) == nlohmann::json(config));
  for (const auto& expect : pairs) {
    const auto got = reader.next();
    REQUIRE(got);
    CHECK(got->pulse_index == expect.pulse_index);
    CHECK(got->rx1 == expect.rx1);
    CHECK(got->rx2 == expect.rx2);
    CHECK(got->truth_m == expect.truth_m);
    CHECK(got->saturated == expect.saturated);
  }
  CHECK(!reader.next());

  const auto bytes = slurp(path);
  const auto& h = reader.header();
  const std::size_t header = 28 + h.config_json.size() + h.scene_json.size();
  CHECK(bytes.size() == header + 5 * (8 + 4 + 8 + 4 * 448 + 4 * 3136));
  CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "PRRX");
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
}

TEST_CASE("little-endian record layout") {
  SystemConfig c;
  c.engine.taps = 2;
  c.engine.window_len = 3;
  auto h = make_recording_header(c);
  h.config_json = "{}";
  h.scene_json = "{}";
  const auto path = temp_file("layout.prrx");
  {
    RecordingWriter w(path, h);
    PulsePair p;
    p.pulse_index = 0x0102030405060708ULL;
    p.saturated = 9;
    p.rx1 = IqBuffer{{1, -1}, {256, 0}};
    p.rx2 = IqBuffer{{0, 0}, {0, 0}, {-32768, 32767}};
    w.write(p);
  }
  const auto b = slurp(path);
  const std::size_t o = 28 + 4;
  REQUIRE(b.size() == o + 8 + 4 + 4 * 2 + 4 * 3);
  CHECK(static_cast<unsigned char>(b[o]) == 0x08);
  CHECK(static_cast<unsigned char>(b[o + 7]) == 0x01);
  CHECK(static_cast<unsigned char>(b[o + 8]) == 9);
  const std::size_t s = o + 12;
  CHECK(static_cast<unsigned char>(b[s]) == 1);
  CHECK(static_cast<unsigned char>(b[s + 2]) == 0xFF);
  CHECK(static_cast<unsigned char>(b[s + 3]) == 0xFF);
  CHECK(static_cast<unsigned char>(b[s + 5]) == 0x01);
  const std::size_t last = s + 8 + 8;
  CHECK(static_cast<unsigned char>(b[last]) == 0x00);
  CHECK(static_cast<unsigned char>(b[last + 1]) == 0x80);
  CHECK(static_cast<unsigned char>(b[last + 2]) == 0xFF);
  CHECK(static_cast<unsigned char>(b[last + 3]) == 0x7F);
}

TEST_CASE("reader rejects bad files") {
  const auto missing = temp_file("missing.prrx");
  std::filesystem::remove(missing);
  CHECK_THROWS_AS(RecordingReader{missing}, Error);

  const auto bad = temp_file("bad_magic.prrx");
  std::ofstream(bad, std::ios::binary) << std::string(40, 'x');
  CHECK_THROWS_AS(RecordingReader{bad}, Error);

  const auto tiny = temp_file("tiny.prrx");
  std::ofstream(tiny, std::ios::binary) << "PRRX";
  CHECK_THROWS_AS(RecordingReader{tiny}, Error);

  // Valid header, truncated record.
  const auto config = scene_config();
  const auto path = temp_file("truncated.prrx");
  {
    RecordingWriter w(path, make_recording_header(config));
    w.write(SceneRenderer(config.render_context()).render(config.scene.targets, config.scene.channel, 0));
  }
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 10);
  RecordingReader r(path);
  CHECK_THROWS_AS(r.next(), Error);
}

TEST_CASE("writer rejects mismatched pulses") {
  const auto config = scene_config();
  RecordingWriter w(temp_file("mismatch.prrx"), make_recording_header(config));
  PulsePair p;
  p.rx1 = IqBuffer(448);
  p.rx2 = IqBuffer(3136);
  CHECK_THROWS_AS(w.write(p), Error); // no truth for the one target
  p.truth_m = {0.0};
  CHECK_NOTHROW(w.write(p));
  p.rx2 = IqBuffer(10);
  CHECK_THROWS_AS(w.write(p), Error);
}
