#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "pulseradar/slowtime.hpp"

using namespace pulseradar;

namespace {

constexpr double kF0 = 5.755e9;
// c / (2 f0), evaluated at 50 digits and rounded.
constexpr double kHalfWavelength = 0.0260462604691573;

// Slow-time samples of an ideal point target moving by dr[n].
BinSeries series_from_motion(const std::vector<double>& dr, double prf = 100.0) {
  BinSeries s;
  s.prf_hz = prf;
  for (double d : dr) {
    s.samples.push_back(std::polar(1000.0, 0.4 - 4.0 * kPi * kF0 * d / kSpeedOfLight));
  }
  return s;
}

std::vector<double> sine_motion(double f, double a, std::size_t n, double prf = 100.0, double phase = 0.0) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = a * std::sin(2.0 * kPi * f * static_cast<double>(k) / prf + phase);
  }
  return out;
}

double band_power(const VibrationSpectrum& s, double f, int half_width) {
  const auto centre = static_cast<long>(std::lround(f / s.resolution_hz()));
  double acc = 0.0;
  for (long k = centre - half_width; k <= centre + half_width; ++k) {
    if (k >= 0 && k < static_cast<long>(s.bins.size())) {
      acc += s.bins[static_cast<std::size_t>(k)].magnitude * s.bins[static_cast<std::size_t>(k)].magnitude;
    }
  }
  return acc;
}

} // namespace

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == kPi);
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi / 2.0) == doctest::Approx(-kPi / 2.0));
  CHECK(wrap_angle(-7.0) == doctest::Approx(-7.0 + 2.0 * kPi));
}

TEST_CASE("unwrap examples") {
  const std::vector<double> smooth{0.0, 0.1, 0.2};
  CHECK(unwrap(smooth) == smooth);

  const std::vector<double> jump{3.0, -3.0};
  const auto u = unwrap(jump);
  CHECK(u[0] == 3.0);
  CHECK(u[1] == doctest::Approx(3.2831853071795862).epsilon(1e-15));

  const std::vector<double> near_pi{0.0, kPi * 0.999, -kPi * 0.999};
  const auto v = unwrap(near_pi);
  const auto ref = oracle::reference_unwrap(near_pi);
  for (std::size_t n = 0; n < v.size(); ++n) {
    CHECK(v[n] == doctest::Approx(ref[n]).epsilon(1e-14));
  }
  CHECK(v[2] == doctest::Approx(2.0 * kPi - kPi * 0.999));
  CHECK(unwrap(std::vector<double>{}).empty());
}

TEST_CASE("unwrap statistics") {
  const std::vector<double> p{3.0, -3.0, 3.0, 1.0};
  const auto r = unwrap_with_stats(p);
  CHECK(r.corrections == 2);
  CHECK(r.ambiguous_steps == 0);
  const std::vector<double> q{0.0, 0.95 * kPi};
  CHECK(unwrap_with_stats(q).ambiguous_steps == 1);
}

TEST_CASE("wrap then unwrap reproduces paths with steps below pi") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> step(-0.99 * kPi, 0.99 * kPi);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> path(500);
    path[0] = step(gen) * 5.0;
    for (std::size_t n = 1; n < path.size(); ++n) {
      path[n] = path[n - 1] + step(gen);
    }
    std::vector<double> wrapped(path.size());
    std::transform(path.begin(), path.end(), wrapped.begin(), wrap_angle);
    const auto u = unwrap(wrapped);
    const double k = path[0] - u[0]; // global multiple of 2pi
    CHECK(std::abs(std::remainder(k, 2.0 * kPi)) < 1e-9);
    double worst = 0.0;
    for (std::size_t n = 0; n < path.size(); ++n) {
      worst = std::max(worst, std::abs(u[n] + k - path[n]));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("displacement examples") {
  const std::vector<double> flat(20, 1.3);
  for (double v : displacement_from_phase(flat, kF0).values_m) {
    CHECK(v == 0.0);
  }

  // Phase decreasing by 2pi in ten steps is one half wavelength.
  std::vector<double> ramp(11);
  for (std::size_t n = 0; n < ramp.size(); ++n) {
    ramp[n] = wrap_angle(0.5 - 2.0 * kPi * static_cast<double>(n) / 10.0);
  }
  const auto t = displacement_from_phase(ramp, kF0);
  CHECK(t.values_m[0] == 0.0);
  CHECK(t.values_m.back() == doctest::Approx(kHalfWavelength).epsilon(1e-13));

  const std::vector<double> small{0.2, 0.2 - 1.2062};
  // 1.2062 rad -> 5.00017075 mm
  CHECK(displacement_from_phase(small, kF0).values_m[1] == doctest::Approx(0.00500017075).epsilon(1e-9));
  CHECK(metres_per_radian(kF0) * 2.0 * kPi == doctest::Approx(kHalfWavelength).epsilon(1e-14));

  CHECK_THROWS_AS(displacement_from_phase(std::vector<double>{}, kF0), Error);
}

TEST_CASE("displacement from complex series, receding target is positive") {
  const std::vector<double> dr{0.0, 0.001, 0.002, 0.004};
  const auto t = displacement(series_from_motion(dr), kF0);
  for (std::size_t n = 0; n < dr.size(); ++n) {
    CHECK(t.values_m[n] == doctest::Approx(dr[n]).epsilon(1e-10).scale(1e-3));
  }
}

TEST_CASE("displacement is linear in the phase path") {
  std::vector<double> path(100);
  for (std::size_t n = 0; n < path.size(); ++n) {
    path[n] = 0.02 * static_cast<double>(n) * std::sin(0.1 * static_cast<double>(n));
  }
  std::vector<double> scaled(path.size());
  std::transform(path.begin(), path.end(), scaled.begin(), [](double p) { return 1.7 * p; });
  const auto a = displacement_from_phase(path, kF0);
  const auto b = displacement_from_phase(scaled, kF0);
  for (std::size_t n = 0; n < path.size(); ++n) {
    CHECK(b.values_m[n] == doctest::Approx(1.7 * a.values_m[n]).epsilon(1e-12).scale(1e-6));
  }
}

TEST_CASE("mean_displacement") {
  DisplacementTrace t;
  t.values_m.assign(200, 0.005);
  CHECK(mean_displacement(t) == doctest::Approx(0.005));
  t.values_m.clear();
  for (int n = 0; n < 300; ++n) {
    t.values_m.push_back(n % 2 == 0 ? 0.001 : -0.001);
  }
  CHECK(std::abs(mean_displacement(t, 128)) < 1e-18);
  CHECK_THROWS_AS(mean_displacement(t, 301), Error);
  CHECK_THROWS_AS(mean_displacement(t, 0), Error);
  // Only the last window counts.
  t.values_m.assign(10, 1.0);
  t.values_m.insert(t.values_m.end(), 4, 3.0);
  CHECK(mean_displacement(t, 4) == 3.0);
}

TEST_CASE("peak_to_peak") {
  DisplacementTrace flat;
  flat.values_m.assign(50, 0.002);
  CHECK(peak_to_peak(flat, 50) == 0.0);
  CHECK_THROWS_AS(peak_to_peak(flat, 1), Error);
  CHECK_THROWS_AS(peak_to_peak(flat, 51), Error);

  // Well-sampled sinusoid: extremes within one slow-time step of the peaks.
  DisplacementTrace dense;
  dense.values_m = sine_motion(1.0, 0.003, 1000, 1000.0);
  CHECK(peak_to_peak(dense, 1000) == doctest::Approx(0.006).epsilon(1e-4));

  // 12 Hz, 5 mm peak at 100 Hz through the phase chain.
  const auto dr = sine_motion(12.0, 0.005, 256);
  const auto t = displacement(series_from_motion(dr), kF0);
  const double sampled = *std::max_element(dr.begin(), dr.end()) - *std::min_element(dr.begin(), dr.end());
  CHECK(peak_to_peak(t, 256) == doctest::Approx(sampled).epsilon(1e-9));
  CHECK(std::abs(peak_to_peak(t, 256) - 0.010) < 1e-4);
}

TEST_CASE("12 Hz tone lands in bin 31") {
  const auto spec = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.0002, 256)), 256);
  CHECK(spec.resolution_hz() == 0.390625);
  CHECK(spec.bins.size() == 129);
  CHECK(spec.bins.back().freq_hz == 50.0);
  CHECK(spec.peak_index() == 31);
  CHECK(spec.bins[31].freq_hz == doctest::Approx(12.109375));
}

TEST_CASE("static target leaves only rounding residue") {
  const auto still = vibration_spectrum(series_from_motion(std::vector<double>(256, 0.0)), 256);
  const auto tone = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.0002, 256)), 256);
  const double peak = tone.bins[tone.peak_index()].magnitude;
  for (const auto& b : still.bins) {
    CHECK(20.0 * std::log10(b.magnitude / peak + 1e-300) < -40.0);
  }
}

TEST_CASE("large modulation index shows harmonics") {
  // 5 mm peak: m = 4 pi f0 a / c = 1.206 rad
  const auto spec = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.005, 256)), 256,
                                       SpectrumOptions{AxisMode::Frequency, SpectrumWindow::Hann});
  const double m = 4.0 * kPi * kF0 * 0.005 / kSpeedOfLight;
  CHECK(m == doctest::Approx(1.20615881).epsilon(1e-8));
  const auto bessel = oracle::pm_harmonics(m);
  const double p1 = band_power(spec, 12.0, 4);
  for (int k : {2, 3}) {
    const double measured_db = 10.0 * std::log10(band_power(spec, 12.0 * k, 4) / p1);
    const double expect_db = 20.0 * std::log10(bessel.harmonic[k - 1] / bessel.harmonic[0]);
    CHECK(std::abs(measured_db - expect_db) < 1.0);
  }
}

TEST_CASE("Parseval holds on the two-sided spectrum") {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> g;
  BinSeries s;
  for (int n = 0; n < 512; ++n) {
    s.samples.emplace_back(g(gen), g(gen));
  }
  for (auto window : {SpectrumWindow::Rectangular, SpectrumWindow::Hann}) {
    SpectrumOptions o;
    o.window = window;
    const auto spec = vibration_spectrum(s, 256, o);
    // Rebuild the transformed pack independently.
    std::vector<ComplexF> pack(s.samples.end() - 256, s.samples.end());
    ComplexF mean{};
    for (const auto& v : pack) {
      mean += v;
    }
    mean /= 256.0;
    double energy = 0.0;
    for (std::size_t k = 0; k < 256; ++k) {
      const double w = window == SpectrumWindow::Hann ? 0.5 - 0.5 * std::cos(2.0 * kPi * k / 256.0) : 1.0;
      energy += std::norm((pack[k] - mean) * w);
    }
    double spectral = 0.0;
    for (double v : spec.two_sided) {
      spectral += v * v;
    }
    CHECK(std::abs(spectral / energy - 1.0) < 1e-9);
  }
}

TEST_CASE("spectrum matches the direct DFT") {
  const auto series = series_from_motion(sine_motion(7.3, 0.004, 64));
  const auto spec = vibration_spectrum(series, 64);
  std::vector<ComplexF> x = series.samples;
  ComplexF mean{};
  for (const auto& v : x) {
    mean += v;
  }
  mean /= 64.0;
  for (auto& v : x) {
    v -= mean;
  }
  const auto X = oracle::dft(x);
  double peak = 0.0;
  for (const auto& v : X) {
    peak = std::max(peak, std::abs(v) / 8.0);
  }
  for (std::size_t k = 0; k < 64; ++k) {
    CHECK(std::abs(spec.two_sided[k] - std::abs(X[k]) / 8.0) < 1e-9 * peak);
  }
}

TEST_CASE("spectral peak within one bin for 5..45 Hz") {
  for (double f = 5.0; f <= 45.0; f += 5.0) {
    const auto spec = vibration_spectrum(series_from_motion(sine_motion(f, 0.0003, 256)), 256);
    CHECK(std::abs(spec.bins[spec.peak_index()].freq_hz - f) <= spec.resolution_hz());
  }
}

TEST_CASE("vibration above PRF/2 folds") {
  // 70 Hz at 100 Hz PRF appears at |70 - 100| = 30 Hz.
  const auto spec = vibration_spectrum(series_from_motion(sine_motion(70.0, 0.0003, 256)), 256);
  CHECK(std::abs(spec.bins[spec.peak_index()].freq_hz - 30.0) <= spec.resolution_hz());
}

TEST_CASE("velocity axis and displacement input") {
  SpectrumOptions o;
  o.axis = AxisMode::Velocity;
  const auto spec = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.0002, 256)), 256, o);
  CHECK(spec.axis_mode == AxisMode::Velocity);
  CHECK(spec.axis_value(31) == doctest::Approx(12.109375 * kHalfWavelength).epsilon(1e-12));
  CHECK(spec.bins[31].velocity_mps == spec.axis_value(31));

  o = {};
  o.input = SpectrumInput::Displacement;
  const auto d = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.005, 256)), 256, o);
  CHECK(d.peak_index() == 31);
  // Real input: magnitude of the tone equals a*N/2/sqrt(N) near the peak bin.
  CHECK(d.bins[31].magnitude > 0.5 * 0.005 * 16.0 / 2.0);
}

TEST_CASE("incomplete pack") {
  const auto s = series_from_motion(std::vector<double>(100, 0.0));
  CHECK_THROWS_AS(vibration_spectrum(s, 256), Error);
  CHECK_NOTHROW(vibration_spectrum(s, 64));
}

TEST_CASE("waterfall") {
  const auto spec = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.001, 256)), 256);
  Waterfall wf(100);
  CHECK(waterfall_push(wf, spec).size() == 1);
  for (std::uint64_t n = 0; n < 101; ++n) {
    auto s = spec;
    s.last_pulse_index = n;
    wf.push(s);
  }
  CHECK(wf.size() == 100);
  CHECK(wf.rows().front().pulse_index == 1);
  CHECK(wf.rows().back().pulse_index == 100);
  CHECK(wf.rows().back().magnitudes == spec.magnitudes());

  const auto shorter = vibration_spectrum(series_from_motion(sine_motion(12.0, 0.001, 128)), 128);
  CHECK_THROWS_AS(wf.push(shorter), Error);
  wf.clear();
  CHECK_NOTHROW(wf.push(shorter));
  CHECK_THROWS_AS(Waterfall(0), Error);
}

TEST_CASE("phase tracker matches batch displacement") {
  const auto dr = sine_motion(9.0, 0.02, 300); // several wraps per period
  const auto series = series_from_motion(dr);
  const auto batch = displacement(series, kF0);
  PhaseTracker tracker(kF0);
  for (std::size_t n = 0; n < series.samples.size(); ++n) {
    CHECK(tracker.push(std::arg(series.samples[n])) == batch.values_m[n]);
  }
  CHECK(tracker.corrections() == batch.unwrap_corrections);
  CHECK(tracker.corrections() > 0);
  tracker.reset();
  CHECK(tracker.count() == 0);
  CHECK(tracker.push(1.0) == 0.0);
}

TEST_CASE("pack accumulator") {
  PackAccumulator acc(4, 100.0);
  const auto series = series_from_motion(sine_motion(12.0, 0.001, 12));
  int emitted = 0;
  for (std::size_t n = 0; n < 12; ++n) {
    const auto s = acc.push(series.samples[n], n);
    if (s) {
      ++emitted;
      CHECK(s->last_pulse_index == n);
      CHECK(s->pack_size == 4);
      CHECK(n % 4 == 3);
    }
  }
  CHECK(emitted == 3);
  (void)acc.push(series.samples[0], 12);
  CHECK(acc.pending() == 1);
  acc.reset();
  CHECK(acc.pending() == 0);
  CHECK_THROWS_AS(acc.set_pack_size(6), Error);
  CHECK_THROWS_AS(acc.set_pack_size(1), Error);
  CHECK_THROWS_AS(PackAccumulator(0, 100.0), Error);
  acc.set_pack_size(8);
  CHECK(acc.pack_size() == 8);
}
