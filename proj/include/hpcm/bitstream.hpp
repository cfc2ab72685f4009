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
#include "hpcm/weights.hpp"

// Versioned byte container. Layout (all little-endian, normative, see
// docs/format.md):
//   magic "HPCM" | version u16 | C u32 | H u32 | W u32 | seed u64 |
//   allocation code u8 | backend code u8 |
//   z length u32 | z bytes | y length u32 | y bytes

namespace hpcm {

inline constexpr uint16_t kBitstreamVersion = 1;

struct BitstreamHeader {
  uint16_t version = kBitstreamVersion;
  uint32_t channels = 0, height = 0, width = 0;
  uint64_t seed = 0;
  uint8_t allocation_code = 0;
  uint8_t backend_code = 0;
};

struct Bitstream {
  BitstreamHeader header;
  std::vector<uint8_t> z_segment;
  std::vector<uint8_t> y_segment;

  std::vector<uint8_t> serialize() const {
    std::vector<uint8_t> out;
    out.reserve(28 + z_segment.size() + y_segment.size());
    out.insert(out.end(), {'H', 'P', 'C', 'M'});
    detail::put_u16(out, header.version);
    detail::put_u32(out, header.channels);
    detail::put_u32(out, header.height);
    detail::put_u32(out, header.width);
    detail::put_u64(out, header.seed);
    out.push_back(header.allocation_code);
    out.push_back(header.backend_code);
    detail::put_u32(out, static_cast<uint32_t>(z_segment.size()));
    out.insert(out.end(), z_segment.begin(), z_segment.end());
    detail::put_u32(out, static_cast<uint32_t>(y_segment.size()));
    out.insert(out.end(), y_segment.begin(), y_segment.end());
    return out;
  }

  static Bitstream parse(const uint8_t* data, size_t size) {
    detail::ByteReader r(data, size);
    char magic[4];
    r.bytes(magic, 4);
    if (std::memcmp(magic, "HPCM", 4) != 0)
      throw CorruptBitstreamError("bad magic, not an HPCM stream");
    Bitstream bs;
    bs.header.version = r.u16();
    if (bs.header.version != kBitstreamVersion)
      throw IncompatibleBitstreamError("unsupported bitstream version");
    bs.header.channels = r.u32();
    bs.header.height = r.u32();
    bs.header.width = r.u32();
    bs.header.seed = r.u64();
    bs.header.allocation_code = r.u8();
    bs.header.backend_code = r.u8();
    const uint32_t z_len = r.u32();
    if (z_len > r.remaining())
      throw CorruptBitstreamError("z segment truncated");
    bs.z_segment.resize(z_len);
    if (z_len) r.bytes(bs.z_segment.data(), z_len);
    const uint32_t y_len = r.u32();
    if (y_len > r.remaining())
      throw CorruptBitstreamError("y segment truncated");
    bs.y_segment.resize(y_len);
    if (y_len) r.bytes(bs.y_segment.data(), y_len);
    if (r.remaining() != 0)
      throw CorruptBitstreamError("trailing bytes after y segment");
    return bs;
  }

  static Bitstream parse(const std::vector<uint8_t>& data) {
    return parse(data.data(), data.size());
  }
};

}  // namespace hpcm
