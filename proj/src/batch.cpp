#include "pulseradar/batch.hpp"

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "pulseradar/bytes.hpp"
#include "pulseradar/recording.hpp"

namespace pulseradar {

namespace {

constexpr std::uint32_t kProfilesVersion = 1;

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) {
    throw Error("cannot create " + path.string());
  }
  return out;
}

// Writes every per-pulse product except the raw recording.
class OutputSet {
public:
  OutputSet(const std::filesystem::path& dir, std::size_t lag_count)
      : profiles_(open_out(dir / kProfilesFile, std::ios::binary)),
        trace_(open_out(dir / kTraceFile)),
        spectra_(open_out(dir / kSpectraFile)),
        summary_path_(dir / kSummaryFile) {
    ByteWriter w;
    w.bytes("PRPF");
    w.u32(kProfilesVersion);
    w.u32(static_cast<std::uint32_t>(lag_count));
    write(profiles_, w);
    trace_ << "pulse_index,bin_index,bin_re,bin_im,phase_rad,displacement_m,truth_m\n";
    spectra_ << "pack,last_pulse_index,bin,freq_hz,velocity_mps,magnitude\n";
  }

  void add(const PulsePair& pair, const PulseResult& r) {
    ByteWriter w;
    w.u64(r.profile.pulse_index);
    for (const auto& lag : r.profile.lags) {
      w.i64(lag.re);
      w.i64(lag.im);
    }
    write(profiles_, w);

    trace_ << pair.pulse_index << ',' << r.bin_index << ',' << r.bin_sample.re << ',' << r.bin_sample.im << ','
           << fmt_double(r.profile.phase[r.bin_index]) << ',' << fmt_double(r.displacement_m) << ','
           << (pair.truth_m.empty() ? std::string() : fmt_double(pair.truth_m.front())) << '\n';

    summary_.pulses += 1;
    summary_.saturated += pair.saturated;
    summary_.selected_bin = r.bin_index;
    if (r.spectrum) {
      const auto& s = *r.spectrum;
      for (std::size_t k = 0; k < s.bins.size(); ++k) {
        spectra_ << summary_.spectra << ',' << s.last_pulse_index << ',' << k << ',' << fmt_double(s.bins[k].freq_hz)
                 << ',' << fmt_double(s.bins[k].velocity_mps) << ',' << fmt_double(s.bins[k].magnitude) << '\n';
      }
      summary_.spectrum_peak_bins.push_back(s.peak_index());
      summary_.spectra += 1;
    }
  }

  BatchSummary finish(std::vector<std::string> warnings) {
    summary_.warnings = std::move(warnings);
    nlohmann::json j{{"pulses", summary_.pulses},
                     {"spectra", summary_.spectra},
                     {"spectrum_peak_bins", summary_.spectrum_peak_bins},
                     {"saturated_components", summary_.saturated},
                     {"warnings", summary_.warnings}};
    j["selected_bin"] = summary_.selected_bin ? nlohmann::json(*summary_.selected_bin) : nlohmann::json(nullptr);
    open_out(summary_path_) << j.dump(2) << '\n';
    profiles_.flush();
    trace_.flush();
    spectra_.flush();
    if (!profiles_ || !trace_ || !spectra_) {
      throw Error("write failed in output directory");
    }
    return summary_;
  }

private:
  static void write(std::ofstream& out, const ByteWriter& w) {
    out.write(reinterpret_cast<const char*>(w.data().data()), static_cast<std::streamsize>(w.size()));
  }

  std::ofstream profiles_;
  std::ofstream trace_;
  std::ofstream spectra_;
  std::filesystem::path summary_path_;
  BatchSummary summary_;
};

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error("cannot create directory " + dir.string() + ": " + ec.message());
  }
}

} // namespace

BatchSummary run_batch(const SystemConfig& config, std::uint64_t n_pulses, const std::filesystem::path& out_dir) {
  auto warnings = config.validate();
  ensure_dir(out_dir);
  Pipeline pipeline(config);
  RecordingWriter recording(out_dir / kRecordingFile, make_recording_header(config));
  OutputSet outputs(out_dir, config.engine.lag_count());
  for (std::uint64_t n = 0; n < n_pulses; ++n) {
    auto step = pipeline.step();
    recording.write(step->pair);
    outputs.add(step->pair, step->result);
  }
  recording.flush();
  return outputs.finish(std::move(warnings));
}

BatchSummary run_replay(const std::filesystem::path& recording, const std::filesystem::path& out_dir) {
  RecordingReader reader(recording);
  const SystemConfig config = reader.config();
  auto warnings = config.validate();
  ensure_dir(out_dir);
  Analyzer analyzer(config);
  OutputSet outputs(out_dir, config.engine.lag_count());
  while (auto pair = reader.next()) {
    outputs.add(*pair, analyzer.process(*pair));
  }
  return outputs.finish(std::move(warnings));
}

BenchReport bench_xcorr(const SystemConfig& config, std::size_t iterations) {
  if (iterations == 0) {
    throw Error("bench: iterations must be positive");
  }
  config.engine.validate();
  std::mt19937_64 gen(0x5eed);
  std::uniform_int_distribution<int> full_scale(-32768, 32767);
  auto random_buffer = [&](std::size_t n) {
    IqBuffer b(n);
    for (auto& s : b.samples()) {
      s = {static_cast<std::int16_t>(full_scale(gen)), static_cast<std::int16_t>(full_scale(gen))};
    }
    return b;
  };
  const IqBuffer rx1 = random_buffer(config.engine.taps);
  const IqBuffer rx2 = random_buffer(config.engine.window_len);

  std::vector<double> samples;
  samples.reserve(iterations);
  std::int64_t sink = 0;
  for (std::size_t i = 0; i < iterations; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto lags = cross_correlate(rx1, rx2, {}, {}, config.engine);
    const auto t1 = std::chrono::steady_clock::now();
    sink ^= lags[i % lags.size()].re;
    samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  static volatile std::int64_t keep;
  keep = sink;
  (void)keep;

  BenchReport r;
  r.iterations = iterations;
  double total = 0.0;
  for (double s : samples) {
    total += s;
  }
  r.mean_s = total / static_cast<double>(iterations);
  std::sort(samples.begin(), samples.end());
  r.min_s = samples.front();
  r.max_s = samples.back();
  if (iterations >= 2) {
    auto pct = [&](double p) {
      const auto idx = static_cast<std::size_t>(p * static_cast<double>(iterations - 1) + 0.5);
      return samples[std::min(idx, iterations - 1)];
    };
    r.p50_s = pct(0.50);
    r.p90_s = pct(0.90);
    r.p99_s = pct(0.99);
  }
  r.budget_s = config.pri_s();
  r.within_budget = r.mean_s < r.budget_s;
  return r;
}

std::string format_bench_report(const BenchReport& r, const EngineConfig& engine) {
  std::ostringstream os;
  char line[160];
  auto us = [](double s) { return s * 1e6; };
  std::snprintf(line, sizeof line, "correlation %zu taps x %zu lags, %zu iteration(s)\n", engine.taps,
                engine.lag_count(), r.iterations);
  os << line;
  std::snprintf(line, sizeof line, "  mean      %12.2f us\n", us(r.mean_s));
  os << line;
  if (r.p50_s) {
    std::snprintf(line, sizeof line, "  min       %12.2f us\n  p50       %12.2f us\n  p90       %12.2f us\n",
                  us(r.min_s), us(*r.p50_s), us(*r.p90_s));
    os << line;
    std::snprintf(line, sizeof line, "  p99       %12.2f us\n  max       %12.2f us\n", us(*r.p99_s), us(r.max_s));
    os << line;
  }
  std::snprintf(line, sizeof line, "  reference %12.2f us  (FPGA correlator, 30 MHz system clock)\n",
                us(kFpgaCorrelationTimeS));
  os << line;
  std::snprintf(line, sizeof line, "  ratio     %12.2f x FPGA\n", r.mean_s / kFpgaCorrelationTimeS);
  os << line;
  std::snprintf(line, sizeof line, "  budget    %12.2f us  (one PRI) -> %s\n", us(r.budget_s),
                r.within_budget ? "PASS" : "FAIL");
  os << line;
  return os.str();
}

} // namespace pulseradar
