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
#include <cstring>
#include <string>
#include <vector>

#include "hpcm/errors.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// On-disk containers (all little-endian):
//   HPCL: magic "HPCL", dims u32 C/H/W, then i16 symbols row-major (c, h, w).
//   HPCF: magic "HPCF", dims u32 C/H/W, then f32 values row-major.

namespace hpcm {

inline void write_latent_file(const std::string& path, const LatentTensor& t) {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'H', 'P', 'C', 'L'});
  detail::put_u32(out, static_cast<uint32_t>(t.channels));
  detail::put_u32(out, static_cast<uint32_t>(t.height));
  detail::put_u32(out, static_cast<uint32_t>(t.width));
  for (int32_t v : t.values) {
    if (v > kSymbolLimit || v < -kSymbolLimit)
      throw DomainError("latent value outside the 16-bit signed range");
    detail::put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }
  detail::write_file(path, out.data(), out.size());
}

inline LatentTensor read_latent_file(const std::string& path) {
  const std::vector<uint8_t> buf = detail::read_file(path);
  detail::ByteReader r(buf.data(), buf.size());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "HPCL", 4) != 0)
    throw CorruptBitstreamError("not an HPCL file: " + path);
  const uint32_t c = r.u32(), h = r.u32(), w = r.u32();
  if (c == 0 || h == 0 || w == 0 ||
      static_cast<uint64_t>(c) * h * w * 2 != r.remaining())
    throw CorruptBitstreamError("HPCL payload size mismatch");
  LatentTensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (auto& v : t.values) v = static_cast<int16_t>(r.u16());
  return t;
}

inline void write_image_file(const std::string& path, const Tensor& t) {
  std::vector<uint8_t> out;
  out.insert(out.end(), {'H', 'P', 'C', 'F'});
  detail::put_u32(out, static_cast<uint32_t>(t.channels()));
  detail::put_u32(out, static_cast<uint32_t>(t.height()));
  detail::put_u32(out, static_cast<uint32_t>(t.width()));
  for (double v : t.values()) {
    const float f = static_cast<float>(v);
    uint32_t bits;
    std::memcpy(&bits, &f, 4);
    detail::put_u32(out, bits);
  }
  detail::write_file(path, out.data(), out.size());
}

inline Tensor read_image_file(const std::string& path) {
  const std::vector<uint8_t> buf = detail::read_file(path);
  detail::ByteReader r(buf.data(), buf.size());
  char magic[4];
  r.bytes(magic, 4);
  if (std::memcmp(magic, "HPCF", 4) != 0)
    throw CorruptBitstreamError("not an HPCF file: " + path);
  const uint32_t c = r.u32(), h = r.u32(), w = r.u32();
  if (c == 0 || h == 0 || w == 0 ||
      static_cast<uint64_t>(c) * h * w * 4 != r.remaining())
    throw CorruptBitstreamError("HPCF payload size mismatch");
  Tensor t(static_cast<int>(c), static_cast<int>(h), static_cast<int>(w));
  for (auto& v : t.values()) {
    const uint32_t bits = r.u32();
    float f;
    std::memcpy(&f, &bits, 4);
    v = static_cast<double>(f);
  }
  return t;
}

// Detects the container type from the first four bytes.
inline std::string sniff_magic(const std::string& path) {
  const std::vector<uint8_t> buf = detail::read_file(path);
  if (buf.size() < 4) throw CorruptBitstreamError("file too short: " + path);
  return std::string(reinterpret_cast<const char*>(buf.data()), 4);
}

// 8-bit binary PGM (portable graymap), row-major.
inline void write_pgm(const std::string& path,
                      const std::vector<uint8_t>& pixels, int height,
                      int width) {
  if (pixels.size() != static_cast<size_t>(height) * width)
    throw ShapeError("write_pgm: pixel count mismatch");
  std::string header = "P5\n" + std::to_string(width) + " " +
                       std::to_string(height) + "\n255\n";
  std::vector<uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  detail::write_file(path, out.data(), out.size());
}

}  // namespace hpcm
