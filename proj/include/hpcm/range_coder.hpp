// Copyright 2026 The hpcm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "hpcm/errors.hpp"
#include "hpcm/ggm.hpp"

// Carry-aware range coder over 16-bit cumulative-frequency tables.
// 64-bit low / 32-bit range, byte-wise renormalization at range < 2^24.
// Symbol intervals are scaled exactly, sub_range = floor(range * cum / 2^16),
// so the only fixed overhead is the 4-byte flush of the low window; the
// encoder and decoder walk bit-identical state trajectories.

namespace hpcm {

inline constexpr uint32_t kRangeTop = 1u << 24;

class RangeEncoder {
 public:
  void encode(size_t symbol, const QuantizedCdf& table) {
    if (finalized_) throw ContractError("RangeEncoder: encode after finalize");
    if (symbol >= table.size() || table.freq(symbol) == 0)
      throw ContractError("RangeEncoder: zero-frequency symbol");
    const uint64_t r = range_;
    const uint32_t lo = static_cast<uint32_t>((r * table.lo(symbol)) >> 16);
    const uint32_t hi = static_cast<uint32_t>((r * table.hi(symbol)) >> 16);
    low_ += lo;
    range_ = hi - lo;
    while (range_ < kRangeTop) {
      shift_low();
      range_ <<= 8;
    }
  }

  // Emits the minimal aligned suffix (4 bytes of the low window) that makes
  // every encoded symbol decodable. The encoder is unusable afterwards.
  std::vector<uint8_t> finalize() {
    if (finalized_) throw ContractError("RangeEncoder: double finalize");
    finalized_ = true;
    for (int i = 0; i < 5; ++i) shift_low();
    return std::move(out_);
  }

  size_t bytes_pending() const { return out_.size(); }

 private:
  void shift_low() {
    // The first stream byte of this coder is provably zero (nested coding
    // intervals keep the value below 1), so it is elided entirely; the
    // decoder primes its 32-bit window straight from the first real byte.
    if (static_cast<uint32_t>(low_) < 0xff000000u || (low_ >> 32) != 0) {
      const uint8_t carry = static_cast<uint8_t>(low_ >> 32);
      if (have_cache_) out_.push_back(static_cast<uint8_t>(cache_ + carry));
      for (; pending_ > 0; --pending_)
        out_.push_back(static_cast<uint8_t>(0xff + carry));
      cache_ = static_cast<uint8_t>(low_ >> 24);
      have_cache_ = true;
    } else {
      ++pending_;
    }
    low_ = (low_ & 0x00ffffffull) << 8;
  }

  uint64_t low_ = 0;
  uint32_t range_ = 0xffffffffu;
  uint8_t cache_ = 0;
  bool have_cache_ = false;
  uint64_t pending_ = 0;
  bool finalized_ = false;
  std::vector<uint8_t> out_;
};

class RangeDecoder {
 public:
  // Primes the 32-bit code window. A valid segment is at least 4 bytes (the
  // flush of an empty session).
  RangeDecoder(const uint8_t* data, size_t size) : data_(data), size_(size) {
    if (size_ < 4)
      throw CorruptBitstreamError("range decoder: segment shorter than prime window");
    for (int i = 0; i < 4; ++i) code_ = (code_ << 8) | data_[pos_++];
  }

  size_t decode(const QuantizedCdf& table) {
    const uint64_t r = range_;
    // Largest symbol whose scaled interval start is <= code.
    size_t lo_idx = 0, hi_idx = table.size() - 1;
    while (lo_idx < hi_idx) {
      const size_t mid = (lo_idx + hi_idx + 1) / 2;
      const uint32_t bound = static_cast<uint32_t>((r * table.lo(mid)) >> 16);
      if (bound <= code_)
        lo_idx = mid;
      else
        hi_idx = mid - 1;
    }
    const uint32_t lo = static_cast<uint32_t>((r * table.lo(lo_idx)) >> 16);
    const uint32_t hi = static_cast<uint32_t>((r * table.hi(lo_idx)) >> 16);
    code_ -= lo;
    range_ = hi - lo;
    while (range_ < kRangeTop) {
      if (pos_ >= size_)
        throw CorruptBitstreamError("range decoder: truncated segment");
      code_ = (code_ << 8) | data_[pos_++];
      range_ <<= 8;
    }
    return lo_idx;
  }

  size_t bytes_consumed() const { return pos_; }

 private:
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
  uint32_t code_ = 0;
  uint32_t range_ = 0xffffffffu;
};

// Fixed uniform byte table shared by the escape path (raw 16-bit values are
// coded as two bytes against it).
inline const QuantizedCdf& uniform_byte_cdf() {
  static const QuantizedCdf table = [] {
    QuantizedCdf t;
    t.cum_freq.resize(257);
    for (size_t i = 0; i <= 256; ++i)
      t.cum_freq[i] = static_cast<uint32_t>(i * 256);
    return t;
  }();
  return table;
}

inline void encode_raw_u16(RangeEncoder& enc, uint16_t value) {
  enc.encode(value >> 8, uniform_byte_cdf());
  enc.encode(value & 0xff, uniform_byte_cdf());
}

inline uint16_t decode_raw_u16(RangeDecoder& dec) {
  const uint16_t hi = static_cast<uint16_t>(dec.decode(uniform_byte_cdf()));
  const uint16_t lo = static_cast<uint16_t>(dec.decode(uniform_byte_cdf()));
  return static_cast<uint16_t>((hi << 8) | lo);
}

}  // namespace hpcm
