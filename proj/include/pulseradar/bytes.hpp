#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pulseradar/types.hpp"

namespace pulseradar {

// Little-endian encoder independent of host byte order.
class ByteWriter {
public:
  void u8(std::uint8_t v) { data_.push_back(v); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::string_view s) { data_.insert(data_.end(), s.begin(), s.end()); }
  void zeros(std::size_t n) { data_.insert(data_.end(), n, 0); }

  std::size_t size() const noexcept { return data_.size(); }
  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t> take() { return std::move(data_); }

private:
  void put(std::uint64_t v, int n) {
    for (int b = 0; b < n; ++b) {
      data_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
    }
  }

  std::vector<std::uint8_t> data_;
};

class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int16_t i16() { return static_cast<std::int16_t>(u16()); }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void skip(std::size_t n) {
    need(n);
    pos_ += n;
  }

  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  std::size_t position() const noexcept { return pos_; }

private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error("truncated input: need " + std::to_string(n) + " bytes at offset " + std::to_string(pos_));
    }
  }

  std::uint64_t get(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int b = 0; b < n; ++b) {
      v |= static_cast<std::uint64_t>(data_[pos_ + static_cast<std::size_t>(b)]) << (8 * b);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

} // namespace pulseradar
