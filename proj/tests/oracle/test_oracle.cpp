#include <doctest.h>

#include <cmath>
#include <random>

#include "oracle.hpp"
#include "pulseradar/waveform.hpp"

using namespace pulseradar;

namespace {

std::vector<ComplexF> random_complex(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<ComplexF> out(n);
  for (auto& v : out) {
    v = {u(gen), u(gen)};
  }
  return out;
}

} // namespace

TEST_CASE("direct sum and convolution forms agree") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto a = random_complex(448, seed);
    const auto b = random_complex(3136, seed + 100);
    const auto direct = oracle::float_xcorr(a, b);
    const auto conv = oracle::float_xcorr_conv(a, b);
    REQUIRE(direct.size() == 2688);
    REQUIRE(conv.size() == direct.size());
    double max_err = 0.0, max_mag = 0.0;
    for (std::size_t m = 0; m < direct.size(); ++m) {
      max_err = std::max(max_err, std::abs(direct[m] - conv[m]));
      max_mag = std::max(max_mag, std::abs(direct[m]));
    }
    CHECK(max_err / max_mag < 1e-12);
  }
}

TEST_CASE("zero echo gives zero profile") {
  const auto a = random_complex(448, 7);
  const std::vector<ComplexF> b(3136);
  for (const auto& v : oracle::float_xcorr(a, b)) {
    CHECK(v == ComplexF{});
  }
}

TEST_CASE("integer inputs are summed exactly") {
  IqBuffer rx1{{3, -4}, {1, 2}};
  IqBuffer rx2{{0, 0}, {3, -4}, {1, 2}, {0, 0}};
  const auto out = oracle::float_xcorr(rx1, rx2);
  REQUIRE(out.size() == 2);
  CHECK(out[0] == ComplexF(-5.0, -10.0)); // conj(3-4j)(0) + conj(1+2j)(3-4j)
  CHECK(out[1] == ComplexF(30.0, 0.0)); // energy
}

TEST_CASE("psf envelope peak, support and first null") {
  const ChirpParams p;
  CHECK(std::abs(oracle::analytic_psf(0.0, p)) == doctest::Approx(p.duration_s).epsilon(1e-15));
  CHECK(std::abs(oracle::analytic_psf(p.duration_s, p)) == 0.0);
  CHECK(std::abs(oracle::analytic_psf(-2.0 * p.duration_s, p)) == 0.0);
  const double null = 1.0 / p.bandwidth_hz; // 25 ns
  CHECK(std::abs(oracle::analytic_psf(null, p)) < 0.01 * p.duration_s);
  CHECK(oracle::analytic_psf(-null * 0.3, p) == std::conj(oracle::analytic_psf(null * 0.3, p)));
}

TEST_CASE("psf matches the numeric autocorrelation of the sampled chirp") {
  const ChirpParams p;
  const auto chirp = synthesize_chirp(p);
  const double ts = 1.0 / p.sample_rate_hz;
  for (int e : {0, 1, 2, 3, 5, 10, 50, 200}) {
    ComplexF acc{};
    for (std::size_t k = 0; k + e < chirp.size(); ++k) {
      acc += std::conj(chirp[k]) * chirp[k + e];
    }
    const ComplexF expect = oracle::analytic_psf(e * ts, p) / ts;
    // Riemann sum of a smooth integrand versus its closed form.
    CHECK(std::abs(acc - expect) < 0.02 * static_cast<double>(chirp.size()));
  }
}

TEST_CASE("dft of impulse and tone") {
  std::vector<ComplexF> impulse(16);
  impulse[0] = 1.0;
  for (const auto& v : oracle::dft(impulse)) {
    CHECK(std::abs(v - ComplexF(1.0, 0.0)) < 1e-15);
  }
  std::vector<ComplexF> tone(16);
  for (std::size_t n = 0; n < tone.size(); ++n) {
    tone[n] = std::polar(1.0, 2.0 * kPi * 3.0 * n / 16.0);
  }
  const auto X = oracle::dft(tone);
  for (std::size_t k = 0; k < X.size(); ++k) {
    CHECK(std::abs(X[k]) == doctest::Approx(k == 3 ? 16.0 : 0.0).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("Bessel harmonic levels") {
  // Small-angle limit: higher harmonics vanish relative to the first.
  const auto small = oracle::pm_harmonics(1e-4);
  CHECK(small.harmonic[1] / small.harmonic[0] < 1e-4);
  CHECK(small.harmonic[4] / small.harmonic[0] < 1e-15);
  // J2(1)/J1(1), 0.440050585744934 vs 0.114903484931901.
  const auto one = oracle::pm_harmonics(1.0);
  CHECK(one.harmonic[1] / one.harmonic[0] == doctest::Approx(0.261114264).epsilon(1e-8));
  CHECK(one.harmonic[0] == doctest::Approx(0.440050585744934).epsilon(1e-12));
  // First zero of J0 at 2.404825557695773.
  CHECK(oracle::pm_harmonics(2.404825557695773).carrier < 1e-12);
  CHECK(oracle::pm_harmonics(2.405).carrier < 1e-3);
}

TEST_CASE("reference unwrap") {
  const std::vector<double> in{3.0, -3.0};
  const auto out = oracle::reference_unwrap(in);
  CHECK(out[1] == doctest::Approx(3.2831853071795862).epsilon(1e-15));
}
