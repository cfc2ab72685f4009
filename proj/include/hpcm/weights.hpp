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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "hpcm/errors.hpp"

namespace hpcm {

// splitmix64 finalizer; the whole weight scheme is built on it so that
// encoder and decoder reconstruct identical parameters from (seed, name)
// without shipping weight bytes.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Uniform double in [0, 1) from 53 high bits.
inline double u64_to_unit(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// N-dimensional parameter array (rank 1..4). Values are f32-representable
// so that the seeded path and the HPCMW file path agree bit-for-bit.
struct WeightTensor {
  std::vector<uint32_t> dims;
  std::vector<double> values;

  size_t count() const {
    size_t n = 1;
    for (uint32_t d : dims) n *= d;
    return n;
  }
};

// Named parameter map. Two modes:
//  - seeded: parameters are materialized on first use from (seed, name),
//    uniform in [-sqrt(3), sqrt(3)] / sqrt(fan_in), rounded to f32;
//  - frozen (loaded from an HPCMW file): lookups must match exactly or fail.
// Biases are zero-initialized in seeded mode.
class WeightStore {
 public:
  explicit WeightStore(uint64_t seed) : seed_(seed), frozen_(false) {}

  uint64_t seed() const { return seed_; }

  const WeightTensor& weight(const std::string& name,
                             std::vector<uint32_t> dims) {
    uint64_t fan_in = 1;
    for (size_t i = 1; i < dims.size(); ++i) fan_in *= dims[i];
    return weight_with_fan_in(name, std::move(dims), fan_in);
  }

  const WeightTensor& weight_with_fan_in(const std::string& name,
                                         std::vector<uint32_t> dims,
                                         uint64_t fan_in) {
    return resolve(name, std::move(dims), fan_in, /*zero=*/false);
  }

  const WeightTensor& bias(const std::string& name, uint32_t n) {
    return resolve(name, {n}, 1, /*zero=*/true);
  }

  size_t entry_count() const {
    std::lock_guard<std::mutex> lock(*mu_);
    return entries_.size();
  }

  size_t parameter_count() const {
    std::lock_guard<std::mutex> lock(*mu_);
    size_t n = 0;
    for (const auto& [k, v] : entries_) n += v.count();
    return n;
  }

  void save(const std::string& path) const;
  static WeightStore load(const std::string& path);

 private:
  const WeightTensor& resolve(const std::string& name,
                              std::vector<uint32_t> dims, uint64_t fan_in,
                              bool zero) {
    std::lock_guard<std::mutex> lock(*mu_);
    auto it = entries_.find(name);
    if (it != entries_.end()) {
      if (it->second.dims != dims)
        throw ShapeError("WeightStore: dims mismatch for '" + name + "'");
      return it->second;
    }
    if (frozen_)
      throw ConfigError("WeightStore: missing entry '" + name + "'");
    WeightTensor t;
    t.dims = std::move(dims);
    size_t n = t.count();
    t.values.resize(n);
    if (zero) {
      std::fill(t.values.begin(), t.values.end(), 0.0);
    } else {
      const uint64_t base = mix64(seed_ ^ mix64(fnv1a64(name)));
      const double scale =
          1.7320508075688772 / std::sqrt(static_cast<double>(fan_in));
      for (size_t i = 0; i < n; ++i) {
        double u = u64_to_unit(mix64(base + i));
        t.values[i] = static_cast<double>(
            static_cast<float>((2.0 * u - 1.0) * scale));
      }
    }
    return entries_.emplace(name, std::move(t)).first->second;
  }

  uint64_t seed_;
  bool frozen_;
  // In a unique_ptr so the store stays movable; materialization of shared
  // stores from multiple sessions must be serialized.
  mutable std::unique_ptr<std::mutex> mu_ = std::make_unique<std::mutex>();
  std::map<std::string, WeightTensor> entries_;
};

namespace detail {

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v & 0xff));
  out.push_back(static_cast<uint8_t>(v >> 8));
}
inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}
inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

class ByteReader {
 public:
  ByteReader(const uint8_t* p, size_t n) : p_(p), n_(n) {}
  uint8_t u8() { return need(1), p_[pos_++]; }
  uint16_t u16() {
    need(2);
    uint16_t v = static_cast<uint16_t>(p_[pos_] | (p_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  void bytes(void* dst, size_t n) {
    need(n);
    std::memcpy(dst, p_ + pos_, n);
    pos_ += n;
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return n_ - pos_; }

 private:
  void need(size_t n) const {
    if (pos_ + n > n_) throw CorruptBitstreamError("unexpected end of data");
  }
  const uint8_t* p_;
  size_t n_;
  size_t pos_ = 0;
};

inline std::vector<uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::fseek(f, 0, SEEK_END);
  long n = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<uint8_t> buf(n > 0 ? static_cast<size_t>(n) : 0);
  if (!buf.empty() && std::fread(buf.data(), 1, buf.size(), f) != buf.size()) {
    std::fclose(f);
    throw IoError("short read on '" + path + "'");
  }
  std::fclose(f);
  return buf;
}

inline void write_file(const std::string& path, const uint8_t* p, size_t n) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  if (n > 0 && std::fwrite(p, 1, n, f) != n) {
    std::fclose(f);
    throw IoError("short write on '" + path + "'");
  }
  std::fclose(f);
}

}  // namespace detail

// HPCMW container: magic "HPCMW", version u16, entry count u32, then per
// entry: name length u16, UTF-8 name, rank u8, dims u32 each, raw
// little-endian f32 values.
inline void WeightStore::save(const std::string& path) const {
  std::lock_guard<std::mutex> lock(*mu_);
  std::vector<uint8_t> out;
  out.insert(out.end(), {'H', 'P', 'C', 'M', 'W'});
  detail::put_u16(out, 1);
  detail::put_u32(out, static_cast<uint32_t>(entries_.size()));
  for (const auto& [name, t] : entries_) {
    detail::put_u16(out, static_cast<uint16_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    out.push_back(static_cast<uint8_t>(t.dims.size()));
    for (uint32_t d : t.dims) detail::put_u32(out, d);
    for (double v : t.values) {
      float f = static_cast<float>(v);
      uint32_t bits;
      std::memcpy(&bits, &f, 4);
      detail::put_u32(out, bits);
    }
  }
  detail::write_file(path, out.data(), out.size());
}

inline WeightStore WeightStore::load(const std::string& path) {
  std::vector<uint8_t> buf = detail::read_file(path);
  detail::ByteReader r(buf.data(), buf.size());
  char magic[5];
  r.bytes(magic, 5);
  if (std::memcmp(magic, "HPCMW", 5) != 0)
    throw CorruptBitstreamError("not an HPCMW file: " + path);
  uint16_t version = r.u16();
  if (version != 1)
    throw IncompatibleBitstreamError("unsupported HPCMW version");
  uint32_t count = r.u32();
  WeightStore store(0);
  store.frozen_ = true;
  for (uint32_t i = 0; i < count; ++i) {
    uint16_t name_len = r.u16();
    std::string name(name_len, '\0');
    r.bytes(name.data(), name_len);
    uint8_t rank = r.u8();
    if (rank == 0 || rank > 4)
      throw CorruptBitstreamError("HPCMW: bad rank");
    WeightTensor t;
    t.dims.resize(rank);
    for (auto& d : t.dims) d = r.u32();
    t.values.resize(t.count());
    for (auto& v : t.values) {
      uint32_t bits = r.u32();
      float f;
      std::memcpy(&f, &bits, 4);
      v = static_cast<double>(f);
    }
    store.entries_.emplace(std::move(name), std::move(t));
  }
  return store;
}

}  // namespace hpcm
