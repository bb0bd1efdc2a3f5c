#include "pulseradar/xcorr.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace pulseradar {

void EngineConfig::validate() const {
  if (taps == 0 || taps > window_len) {
    throw Error("engine: taps must be in [1, window_len]");
  }
  if (window_len == taps) {
    throw Error("engine: window_len must exceed taps to produce any lag");
  }
  if (truncate_to_bits == 0 || truncate_to_bits > 64 || magsq_bits_expected < truncate_to_bits ||
      magsq_bits_expected > 127) {
    throw Error("engine: truncation widths out of range");
  }
  if (threads == 0) {
    throw Error("engine: threads must be at least 1");
  }
}

namespace {

std::int32_t rounded_mean(std::int64_t sum, std::size_t count) {
  const auto n = static_cast<std::int64_t>(count);
  const std::int64_t q = (2 * std::abs(sum) + n) / (2 * n);
  return static_cast<std::int32_t>(sum < 0 ? -q : q);
}

// DC-corrected planar copy of a buffer; the reference gets its Q negated.
struct Planar {
  std::vector<std::int32_t> i;
  std::vector<std::int32_t> q;
};

Planar to_planar(const IqBuffer& buffer, const DcEstimate& dc, bool conjugate) {
  Planar p;
  p.i.resize(buffer.size());
  p.q.resize(buffer.size());
  for (std::size_t n = 0; n < buffer.size(); ++n) {
    p.i[n] = static_cast<std::int32_t>(buffer[n].i) - dc.mean_i;
    const std::int32_t q = static_cast<std::int32_t>(buffer[n].q) - dc.mean_q;
    p.q[n] = conjugate ? -q : q;
  }
  return p;
}

// AVX2 clone gets packed 32x32->64 multiplies; output is identical.
__attribute__((target_clones("avx2", "default")))
void correlate_range(const Planar& ref, const Planar& echo, std::size_t first, std::size_t last,
                     std::span<ComplexAcc> out) {
  const std::size_t taps = ref.i.size();
  const std::int32_t* ri = ref.i.data();
  const std::int32_t* rq = ref.q.data();
  for (std::size_t m = first; m < last; ++m) {
    const std::int32_t* ei = echo.i.data() + m;
    const std::int32_t* eq = echo.q.data() + m;
    std::int64_t re = 0;
    std::int64_t im = 0;
    for (std::size_t k = 0; k < taps; ++k) {
      re += std::int64_t{ri[k]} * ei[k] - std::int64_t{rq[k]} * eq[k];
      im += std::int64_t{ri[k]} * eq[k] + std::int64_t{rq[k]} * ei[k];
    }
    out[m] = {re, im};
  }
}

} // namespace

DcEstimate dc_estimate(const IqBuffer& buffer) {
  if (buffer.empty()) {
    throw Error("dc_estimate: empty buffer");
  }
  std::int64_t sum_i = 0;
  std::int64_t sum_q = 0;
  for (const auto& s : buffer) {
    sum_i += s.i;
    sum_q += s.q;
  }
  return {rounded_mean(sum_i, buffer.size()), rounded_mean(sum_q, buffer.size())};
}

std::vector<ComplexAcc> cross_correlate(const IqBuffer& rx1, const IqBuffer& rx2, const DcEstimate& dc1,
                                        const DcEstimate& dc2, const EngineConfig& config) {
  config.validate();
  if (rx1.size() != config.taps) {
    throw Error("cross_correlate: reference length " + std::to_string(rx1.size()) + " != taps " +
                std::to_string(config.taps));
  }
  if (rx2.size() != config.window_len) {
    throw Error("cross_correlate: echo length " + std::to_string(rx2.size()) + " != window " +
                std::to_string(config.window_len));
  }

  const Planar ref = to_planar(rx1, dc1, true);
  const Planar echo = to_planar(rx2, dc2, false);
  const std::size_t lags = config.lag_count();
  std::vector<ComplexAcc> out(lags);

  const std::size_t workers = std::min<std::size_t>(config.threads, lags);
  if (workers <= 1) {
    correlate_range(ref, echo, 0, lags, out);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (lags + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t first = w * chunk;
      const std::size_t last = std::min(lags, first + chunk);
      pool.emplace_back([&, first, last] { correlate_range(ref, echo, first, last, out); });
    }
  }

  constexpr std::int64_t guard = std::int64_t{1} << kAccumulatorGuardBits;
  for (std::size_t m = 0; m < lags; ++m) {
    if (out[m].re >= guard || out[m].re <= -guard || out[m].im >= guard || out[m].im <= -guard) {
      throw Error("cross_correlate: accumulator at lag " + std::to_string(m) + " exceeds 2^" +
                  std::to_string(kAccumulatorGuardBits));
    }
  }
  return out;
}

unsigned __int128 magnitude_squared(const ComplexAcc& lag) {
  const auto re = static_cast<__int128>(lag.re);
  const auto im = static_cast<__int128>(lag.im);
  return static_cast<unsigned __int128>(re * re) + static_cast<unsigned __int128>(im * im);
}

std::uint64_t isqrt(std::uint64_t v) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<double>(v)));
  // The double estimate is within a few units; settle on the exact floor.
  while (r > 0 && (r > 0xFFFFFFFFULL || r * r > v)) {
    --r;
  }
  while (r < 0xFFFFFFFFULL && (r + 1) * (r + 1) <= v) {
    ++r;
  }
  return r;
}

std::uint64_t lag_magnitude(const ComplexAcc& lag, const EngineConfig& config) {
  const unsigned __int128 s = magnitude_squared(lag);
  std::uint64_t truncated = 0;
  if (config.truncation == Truncation::DropLsb) {
    const unsigned __int128 shifted = s >> config.truncation_shift();
    const unsigned __int128 limit = ~static_cast<unsigned __int128>(0) >> (128 - config.truncate_to_bits);
    truncated = static_cast<std::uint64_t>(std::min(shifted, limit));
  } else {
    const unsigned __int128 limit = ~static_cast<unsigned __int128>(0) >> (128 - config.truncate_to_bits);
    truncated = static_cast<std::uint64_t>(std::min(s, limit));
  }
  return isqrt(truncated);
}

std::vector<std::uint64_t> magnitude(std::span<const ComplexAcc> lags, const EngineConfig& config) {
  std::vector<std::uint64_t> out(lags.size());
  std::transform(lags.begin(), lags.end(), out.begin(),
                 [&](const ComplexAcc& lag) { return lag_magnitude(lag, config); });
  return out;
}

std::vector<double> phase(std::span<const ComplexAcc> lags) {
  std::vector<double> out(lags.size());
  std::transform(lags.begin(), lags.end(), out.begin(), [](const ComplexAcc& lag) {
    if (lag.re == 0 && lag.im == 0) {
      return 0.0;
    }
    const double p = std::atan2(static_cast<double>(lag.im), static_cast<double>(lag.re));
    // atan2 yields -pi for (negative, -0); the contract is (-pi, pi].
    return p == -kPi ? kPi : p;
  });
  return out;
}

std::size_t peak_bin(std::span<const std::uint64_t> magnitude) {
  if (magnitude.empty()) {
    throw Error("peak_bin: empty profile");
  }
  return static_cast<std::size_t>(std::max_element(magnitude.begin(), magnitude.end()) - magnitude.begin());
}

unsigned signed_bit_width(std::int64_t v) {
  const auto magnitude_bits = v < 0 ? std::bit_width(static_cast<std::uint64_t>(~v))
                                    : std::bit_width(static_cast<std::uint64_t>(v));
  return static_cast<unsigned>(magnitude_bits) + 1;
}

unsigned bit_width(unsigned __int128 v) {
  const auto hi = static_cast<std::uint64_t>(v >> 64);
  if (hi != 0) {
    return 64 + static_cast<unsigned>(std::bit_width(hi));
  }
  return static_cast<unsigned>(std::bit_width(static_cast<std::uint64_t>(v)));
}

BitGrowth measure_bit_growth(std::span<const ComplexAcc> lags) {
  BitGrowth g;
  for (const auto& lag : lags) {
    g.lag_bits = std::max({g.lag_bits, signed_bit_width(lag.re), signed_bit_width(lag.im)});
    g.magsq_bits = std::max(g.magsq_bits, bit_width(magnitude_squared(lag)));
  }
  return g;
}

RangeCompressor::RangeCompressor(EngineConfig config) : config_(config) { config_.validate(); }

RangeProfile RangeCompressor::process(const IqBuffer& rx1, const IqBuffer& rx2, std::uint64_t pulse_index) {
  RangeProfile profile;
  profile.pulse_index = pulse_index;
  profile.lags = cross_correlate(rx1, rx2, dc1_, dc2_, config_);
  profile.magnitude = magnitude(profile.lags, config_);
  profile.phase = phase(profile.lags);
  dc1_ = dc_estimate(rx1);
  dc2_ = dc_estimate(rx2);
  return profile;
}

void RangeCompressor::reset() {
  dc1_ = {};
  dc2_ = {};
}

} // namespace pulseradar
