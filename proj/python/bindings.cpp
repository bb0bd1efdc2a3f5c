#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pulseradar/batch.hpp"
#include "pulseradar/pipeline.hpp"
#include "pulseradar/protocol.hpp"

namespace py = pybind11;
using namespace pulseradar;

namespace {

using IqArray = py::array_t<std::int16_t, py::array::c_style | py::array::forcecast>;
using LagArray = py::array_t<std::int64_t, py::array::c_style | py::array::forcecast>;

// Configs cross the boundary as JSON text; the Python side wraps them in dicts.
SystemConfig parse_config(const std::string& text) {
  return config_from_json(nlohmann::json::parse(text));
}

IqBuffer to_buffer(const IqArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) {
    throw py::value_error("IQ arrays must have shape (n, 2)");
  }
  IqBuffer b(static_cast<std::size_t>(a.shape(0)));
  const auto* p = a.data();
  for (auto& s : b.samples()) {
    s = {p[0], p[1]};
    p += 2;
  }
  return b;
}

IqArray from_buffer(const IqBuffer& b) {
  IqArray a({static_cast<py::ssize_t>(b.size()), py::ssize_t{2}});
  auto* p = a.mutable_data();
  for (const auto& s : b.samples()) {
    *p++ = s.i;
    *p++ = s.q;
  }
  return a;
}

LagArray from_lags(const std::vector<ComplexAcc>& lags) {
  LagArray a({static_cast<py::ssize_t>(lags.size()), py::ssize_t{2}});
  auto* p = a.mutable_data();
  for (const auto& v : lags) {
    *p++ = v.re;
    *p++ = v.im;
  }
  return a;
}

std::vector<ComplexAcc> to_lags(const LagArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 2) {
    throw py::value_error("lag arrays must have shape (n, 2)");
  }
  std::vector<ComplexAcc> lags(static_cast<std::size_t>(a.shape(0)));
  const auto* p = a.data();
  for (auto& v : lags) {
    v = {p[0], p[1]};
    p += 2;
  }
  return lags;
}

template <class T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> a(std::vector<py::ssize_t>{static_cast<py::ssize_t>(v.size())});
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

py::dict summary_dict(const BatchSummary& s) {
  py::dict d;
  d["pulses"] = s.pulses;
  d["selected_bin"] = s.selected_bin;
  d["spectra"] = s.spectra;
  d["spectrum_peak_bins"] = s.spectrum_peak_bins;
  d["saturated"] = s.saturated;
  d["warnings"] = s.warnings;
  return d;
}

} // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pulse-compression radar core: scene rendering, fixed-point correlation, slow-time analysis";

  py::register_exception<Error>(m, "Error", PyExc_ValueError);

  m.def("default_config", [] { return nlohmann::json(SystemConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) {
    const auto c = parse_config(text);
    return py::make_tuple(nlohmann::json(c).dump(), c.validate());
  });
  m.def("load_config", [](const std::string& path) { return nlohmann::json(load_config(path)).dump(); });

  m.def(
      "render",
      [](const std::string& config_text, std::uint64_t pulse_index) {
        const auto c = parse_config(config_text);
        c.validate();
        const auto pair =
            SceneRenderer(c.render_context()).render(c.scene.targets, c.scene.channel, pulse_index);
        return py::make_tuple(from_buffer(pair.rx1), from_buffer(pair.rx2), pair.truth_m, pair.saturated);
      },
      py::arg("config"), py::arg("pulse_index") = 0);

  m.def(
      "cross_correlate",
      [](const IqArray& rx1, const IqArray& rx2, std::pair<int, int> dc1, std::pair<int, int> dc2,
         unsigned threads) {
        const auto a = to_buffer(rx1);
        const auto b = to_buffer(rx2);
        EngineConfig e;
        e.taps = a.size();
        e.window_len = b.size();
        e.threads = threads;
        std::vector<ComplexAcc> lags;
        {
          py::gil_scoped_release release;
          lags = cross_correlate(a, b, {dc1.first, dc1.second}, {dc2.first, dc2.second}, e);
        }
        return from_lags(lags);
      },
      py::arg("rx1"), py::arg("rx2"), py::arg("dc1") = std::pair{0, 0}, py::arg("dc2") = std::pair{0, 0},
      py::arg("threads") = 1);

  m.def("dc_estimate", [](const IqArray& a) {
    const auto dc = dc_estimate(to_buffer(a));
    return std::pair{dc.mean_i, dc.mean_q};
  });

  m.def(
      "magnitude",
      [](const LagArray& lags, const std::string& truncation) {
        EngineConfig e;
        if (truncation == "saturate_msb") {
          e.truncation = Truncation::SaturateMsb;
        } else if (truncation != "drop_lsb") {
          throw py::value_error("truncation must be 'drop_lsb' or 'saturate_msb'");
        }
        const auto values = to_lags(lags);
        const auto mag = magnitude(values, e);
        return to_array(mag);
      },
      py::arg("lags"), py::arg("truncation") = "drop_lsb");

  m.def("phase", [](const LagArray& lags) {
    const auto values = to_lags(lags);
    const auto p = phase(values);
    return to_array(p);
  });

  m.def("peak_bin", [](const py::array_t<std::uint64_t, py::array::c_style | py::array::forcecast>& mag) {
    return peak_bin({mag.data(), static_cast<std::size_t>(mag.size())});
  });

  m.def("unwrap", [](const std::vector<double>& phases) { return unwrap(phases); });

  m.def(
      "displacement",
      [](const std::vector<double>& phases, double carrier_hz) {
        return displacement_from_phase(phases, carrier_hz).values_m;
      },
      py::arg("phases"), py::arg("carrier_hz") = 5.755e9);

  m.def(
      "vibration_spectrum",
      [](const std::vector<std::complex<double>>& samples, double prf_hz, std::size_t pack_size,
         const std::string& window) {
        BinSeries s;
        s.samples = samples;
        s.prf_hz = prf_hz;
        SpectrumOptions o;
        if (window == "hann") {
          o.window = SpectrumWindow::Hann;
        } else if (window != "rectangular") {
          throw py::value_error("window must be 'rectangular' or 'hann'");
        }
        const auto spec = vibration_spectrum(s, pack_size, o);
        std::vector<double> freqs;
        for (const auto& b : spec.bins) {
          freqs.push_back(b.freq_hz);
        }
        return py::make_tuple(freqs, spec.magnitudes(), spec.peak_index());
      },
      py::arg("samples"), py::arg("prf_hz") = 100.0, py::arg("pack_size") = 256, py::arg("window") = "rectangular");

  m.def(
      "run_batch",
      [](const std::string& config_text, std::uint64_t pulses, const std::string& out_dir) {
        const auto c = parse_config(config_text);
        py::gil_scoped_release release;
        auto s = run_batch(c, pulses, out_dir);
        py::gil_scoped_acquire acquire;
        return summary_dict(s);
      },
      py::arg("config"), py::arg("pulses"), py::arg("out_dir"));

  m.def("run_replay", [](const std::string& recording, const std::string& out_dir) {
    return summary_dict(run_replay(recording, out_dir));
  });

  m.def(
      "bench_xcorr",
      [](std::size_t iterations) {
        const SystemConfig c;
        const auto r = bench_xcorr(c, iterations);
        py::dict d;
        d["iterations"] = r.iterations;
        d["mean_s"] = r.mean_s;
        d["budget_s"] = r.budget_s;
        d["within_budget"] = r.within_budget;
        d["report"] = format_bench_report(r, c.engine);
        return d;
      },
      py::arg("iterations") = 10);

  m.def("decode_frame", [](const py::bytes& data) {
    const std::string_view view = data;
    const auto f = decode_frame({reinterpret_cast<const std::uint8_t*>(view.data()), view.size()});
    py::dict d;
    d["pulse_index"] = f.pulse_index;
    d["bin_index"] = f.bin_index;
    d["profile_stride"] = f.profile_stride;
    d["bin_sample"] = py::make_tuple(f.bin_sample.re, f.bin_sample.im);
    d["displacement_m"] = f.displacement_m;
    d["t_capture_ns"] = f.t_capture_ns;
    d["t_emit_ns"] = f.t_emit_ns;
    d["profile"] = f.profile;
    if (f.spectrum) {
      d["spectrum"] = f.spectrum->magnitudes;
      d["resolution_hz"] = f.spectrum->resolution_hz;
    }
    return d;
  });

  m.attr("WIRE_VERSION") = kWireVersion;
  m.attr("FPGA_CORRELATION_TIME_S") = kFpgaCorrelationTimeS;
}
