#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pulseradar/config.hpp"
#include "pulseradar/pipeline.hpp"

namespace pulseradar {

// Offline outputs, all inside one directory:
//   recording.prrx  raw PRI capture (see recording.hpp)
//   profiles.bin    "PRPF" | u32 version | u32 lag_count, then per pulse
//                   u64 pulse_index | (i64 re, i64 im)[lag_count]
//   trace.csv       pulse_index,bin_index,bin_re,bin_im,phase_rad,displacement_m,truth_m
//   spectra.csv     pack,last_pulse_index,bin,freq_hz,velocity_mps,magnitude
//   summary.json    counts, selected bin, spectral peaks, warnings
inline constexpr const char* kRecordingFile = "recording.prrx";
inline constexpr const char* kProfilesFile = "profiles.bin";
inline constexpr const char* kTraceFile = "trace.csv";
inline constexpr const char* kSpectraFile = "spectra.csv";
inline constexpr const char* kSummaryFile = "summary.json";

struct BatchSummary {
  std::uint64_t pulses = 0;
  std::optional<std::size_t> selected_bin;
  std::size_t spectra = 0;
  std::vector<std::size_t> spectrum_peak_bins;
  std::uint64_t saturated = 0;
  std::vector<std::string> warnings;
};

BatchSummary run_batch(const SystemConfig& config, std::uint64_t n_pulses, const std::filesystem::path& out_dir);

// Re-runs the analysis chain over a recording and writes the same outputs
// (recording excluded) into `out_dir`.
BatchSummary run_replay(const std::filesystem::path& recording, const std::filesystem::path& out_dir);

struct BenchReport {
  std::size_t iterations = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  // Only with two or more samples.
  std::optional<double> p50_s;
  std::optional<double> p90_s;
  std::optional<double> p99_s;
  double budget_s = 0.0; // one PRI
  bool within_budget = false;
};

// Timing of one full correlation (taps x lags) on random full-scale data.
inline constexpr double kFpgaCorrelationTimeS = 121.63e-6;

BenchReport bench_xcorr(const SystemConfig& config, std::size_t iterations);
std::string format_bench_report(const BenchReport& report, const EngineConfig& engine);

} // namespace pulseradar
