#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pulseradar/types.hpp"

namespace pulseradar {

// How the 85-bit magnitude-squared sum is reduced to 64 bits before the
// square root.
enum class Truncation {
  DropLsb,     // logical shift right by (85 - 64) bits
  SaturateMsb, // keep the low 64 bits, clamping values that do not fit
};

struct EngineConfig {
  std::size_t taps = 448;
  std::size_t window_len = 3136;
  unsigned sample_bits = 16;
  unsigned accum_bits_expected = 42;
  unsigned magsq_bits_expected = 85;
  unsigned truncate_to_bits = 64;
  Truncation truncation = Truncation::DropLsb;
  // Worker threads for the lag loop. Output is identical for any value.
  unsigned threads = 1;

  void validate() const;
  std::size_t lag_count() const { return window_len - taps; }
  unsigned truncation_shift() const { return magsq_bits_expected - truncate_to_bits; }
};

// Hard ceiling on any accumulator component. Never reached for 17-bit
// DC-corrected inputs at 448 taps.
inline constexpr unsigned kAccumulatorGuardBits = 47;

// Per-channel mean, in LSB, applied to the following PRI.
struct DcEstimate {
  std::int32_t mean_i = 0;
  std::int32_t mean_q = 0;

  friend bool operator==(const DcEstimate&, const DcEstimate&) = default;
};

// Arithmetic mean of I and Q, rounded half away from zero.
DcEstimate dc_estimate(const IqBuffer& buffer);

// out[m] = sum_k conj(rx1'[k]) * rx2'[k + m], m = 0 .. window_len - taps - 1,
// where x' = x - dc. Conjugation is done by negating the Q component of the
// reference, as the hardware does before filling its buffer.
std::vector<ComplexAcc> cross_correlate(const IqBuffer& rx1, const IqBuffer& rx2, const DcEstimate& dc1,
                                        const DcEstimate& dc2, const EngineConfig& config = {});

std::vector<std::uint64_t> magnitude(std::span<const ComplexAcc> lags, const EngineConfig& config = {});
std::vector<double> phase(std::span<const ComplexAcc> lags);

// Index of the maximum, lowest index on ties.
std::size_t peak_bin(std::span<const std::uint64_t> magnitude);

// Magnitude of one lag under the configured truncation.
std::uint64_t lag_magnitude(const ComplexAcc& lag, const EngineConfig& config = {});
// floor(sqrt(v)), exact.
std::uint64_t isqrt(std::uint64_t v);
// Re^2 + Im^2 in full width.
unsigned __int128 magnitude_squared(const ComplexAcc& lag);

// Two's-complement width needed to hold v, sign bit included.
unsigned signed_bit_width(std::int64_t v);
unsigned bit_width(unsigned __int128 v);

// Observed datapath widths for a batch of lags.
struct BitGrowth {
  unsigned lag_bits = 0;   // widest Re/Im component, sign included
  unsigned magsq_bits = 0; // widest Re^2 + Im^2
};

BitGrowth measure_bit_growth(std::span<const ComplexAcc> lags);

struct RangeProfile {
  std::uint64_t pulse_index = 0;
  std::vector<ComplexAcc> lags;
  std::vector<std::uint64_t> magnitude;
  std::vector<double> phase;
};

// Stateful per-stream compressor. Each PRI is corrected with the means of
// the previous PRI (zero for the first one), then its own means are stored.
class RangeCompressor {
public:
  explicit RangeCompressor(EngineConfig config = {});

  RangeProfile process(const IqBuffer& rx1, const IqBuffer& rx2, std::uint64_t pulse_index);
  void reset();

  const EngineConfig& config() const noexcept { return config_; }
  DcEstimate dc_rx1() const noexcept { return dc1_; }
  DcEstimate dc_rx2() const noexcept { return dc2_; }

private:
  EngineConfig config_;
  DcEstimate dc1_;
  DcEstimate dc2_;
};

} // namespace pulseradar
