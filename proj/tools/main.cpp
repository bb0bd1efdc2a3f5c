#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "pulseradar/batch.hpp"
#include "pulseradar/config.hpp"
#include "pulseradar/server.hpp"

using namespace pulseradar;

namespace {

SystemConfig load(const std::string& path) {
  SystemConfig config = path.empty() ? SystemConfig{} : load_config(path);
  apply_env_overrides(config);
  return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: " << w << '\n';
  }
}

void print_summary(const BatchSummary& s, const std::filesystem::path& dir) {
  std::cout << s.pulses << " pulses, " << s.spectra << " spectra";
  if (s.selected_bin) {
    std::cout << ", bin " << *s.selected_bin;
  }
  if (!s.spectrum_peak_bins.empty()) {
    std::cout << ", last spectral peak at bin " << s.spectrum_peak_bins.back();
  }
  if (s.saturated) {
    std::cout << ", " << s.saturated << " saturated components";
  }
  std::cout << "\noutputs in " << dir.string() << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pulse-compression radar simulator, correlator and vibration analyser"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t pulses = 0;
  std::string out_dir;
  auto* simulate = app.add_subcommand("simulate", "Render a scene, process it and write all outputs");
  simulate->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--pulses", pulses, "Number of PRIs")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::string address;
  auto* serve = app.add_subcommand("serve", "Stream frames to WebSocket clients until interrupted");
  serve->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  serve->add_option("--addr", address, "host:port to bind (overrides config and environment)");

  std::string recording;
  auto* replay = app.add_subcommand("replay", "Re-run the analysis over a recording");
  replay->add_option("recording", recording, "Recording file")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", out_dir, "Output directory (default: <recording>.replay)");

  std::size_t iterations = 100;
  auto* bench = app.add_subcommand("bench", "Time the correlator against the PRI budget");
  bench->add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
  bench->add_option("--iterations", iterations, "Correlations to time")->check(CLI::PositiveNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) {
      auto config = load(config_path);
      const auto s = run_batch(config, pulses, out_dir);
      print_warnings(s.warnings);
      print_summary(s, out_dir);
    } else if (*serve) {
      auto config = load(config_path);
      if (!address.empty()) {
        config.serve_address = address;
      }
      print_warnings(config.validate());
      Server server(config);
      const auto port = server.start();
      std::cout << "serving on " << parse_address(config.serve_address).host << ':' << port << std::endl;
      server.run_until_signal();
      const auto st = server.stats();
      std::cout << st.frames << " frames, " << st.profiles_dropped << " profiles dropped\n";
    } else if (*replay) {
      const std::filesystem::path out = out_dir.empty() ? std::filesystem::path(recording + ".replay") : std::filesystem::path(out_dir);
      const auto s = run_replay(recording, out);
      print_warnings(s.warnings);
      print_summary(s, out);
    } else if (*bench) {
      const auto config = load(config_path);
      const auto r = bench_xcorr(config, iterations);
      std::cout << format_bench_report(r, config.engine);
      return r.within_budget ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
