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
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hpcm/errors.hpp"
#include "hpcm/tensor.hpp"

// Hierarchical coding schedule. The latent grid is covered by three nested
// sub-lattices per channel group: S1 (spacing 4), S2 (spacing 2), S3
// (spacing 1). Groups use distinct sampling phases; coding proceeds coarse
// to fine, and every (channel, row, col) is assigned to exactly one step.

namespace hpcm {

enum class Scale : uint8_t { S1 = 0, S2 = 1, S3 = 2 };

inline int scale_spacing(Scale s) {
  switch (s) {
    case Scale::S1: return 4;
    case Scale::S2: return 2;
    default: return 1;
  }
}

inline const char* scale_name(Scale s) {
  switch (s) {
    case Scale::S1: return "S1";
    case Scale::S2: return "S2";
    default: return "S3";
  }
}

inline constexpr int kNumGroups = 8;

// Frozen per-group S1 sampling phases (row, col) mod 4. All eight are
// distinct in the 4x4 phase grid, and each S2 phase is the S1 phase mod 2,
// which makes every S1 lattice a subset of its group's S2 lattice.
inline constexpr std::array<std::pair<int, int>, kNumGroups> kGroupS1Offsets{{
    {0, 0}, {2, 2}, {1, 1}, {3, 3}, {0, 2}, {2, 0}, {1, 3}, {3, 1},
}};

struct GroupPhase {
  int group = 0;
  int s1_row = 0, s1_col = 0;  // mod-4 offsets
  int s2_row = 0, s2_col = 0;  // mod-2 offsets

  static GroupPhase of(int group) {
    if (group < 0 || group >= kNumGroups)
      throw ConfigError("group index out of range");
    GroupPhase p;
    p.group = group;
    p.s1_row = kGroupS1Offsets[group].first;
    p.s1_col = kGroupS1Offsets[group].second;
    p.s2_row = p.s1_row & 1;
    p.s2_col = p.s1_col & 1;
    return p;
  }

  int offset_row(Scale s) const {
    return s == Scale::S1 ? s1_row : (s == Scale::S2 ? s2_row : 0);
  }
  int offset_col(Scale s) const {
    return s == Scale::S1 ? s1_col : (s == Scale::S2 ? s2_col : 0);
  }
};

struct Allocation {
  int s1 = 2, s2 = 3, s3 = 6;

  int total() const { return s1 + s2 + s3; }
  bool operator==(const Allocation& o) const {
    return s1 == o.s1 && s2 == o.s2 && s3 == o.s3;
  }
  std::string str() const {
    return "(" + std::to_string(s1) + "," + std::to_string(s2) + "," +
           std::to_string(s3) + ")";
  }
};

inline const std::array<Allocation, 4>& supported_allocations() {
  static const std::array<Allocation, 4> k{{
      {2, 3, 6}, {2, 3, 3}, {2, 3, 12}, {4, 3, 6},
  }};
  return k;
}

inline uint8_t allocation_code(const Allocation& a) {
  const auto& all = supported_allocations();
  for (size_t i = 0; i < all.size(); ++i)
    if (all[i] == a) return static_cast<uint8_t>(i);
  throw ConfigError("unsupported allocation " + a.str());
}

inline Allocation allocation_from_code(uint8_t code) {
  const auto& all = supported_allocations();
  if (code >= all.size()) throw CorruptBitstreamError("bad allocation code");
  return all[code];
}

// Canonical order of the twelve non-S2 positions inside a 4x4 patch (for
// the group phase (0,0)), two per step in the default 6-step order. The
// first pair is maximally dispersed (Chebyshev distance 2 under every
// phase translation); later positions are 8-adjacent to already-coded
// sites. This table is frozen: it is part of the bitstream contract.
inline constexpr std::array<std::pair<int, int>, 12> kPatchCodingOrder{{
    {1, 1}, {3, 3},  // step 1: dispersed diagonal
    {1, 3}, {3, 1},  // step 2: remaining odd-odd corners
    {0, 1}, {2, 3},  // step 3
    {2, 1}, {0, 3},  // step 4
    {1, 0}, {3, 2},  // step 5
    {1, 2}, {3, 0},  // step 6
}};

struct SpatialSite {
  uint16_t row = 0, col = 0;
};

struct CodingStep {
  int index = 0;  // 1-based
  Scale scale = Scale::S1;
  // Full-resolution spatial sites per group, ascending (row, col). Every
  // channel of a group codes the same spatial sites at this step.
  std::array<std::vector<SpatialSite>, kNumGroups> sites;
};

namespace detail {

inline int round_up4(int v) { return (v + 3) & ~3; }

// Positions coded at S2 relative to the pre-filled S1 position of each
// 2x2 cell: anti-diagonal neighbor, then horizontal, then vertical.
inline std::array<std::pair<int, int>, 3> s2_cell_order(const GroupPhase& p) {
  const int ar = p.s1_row >> 1;  // cell-local position of the S1 site
  const int ac = p.s1_col >> 1;
  return {{{1 - ar, 1 - ac}, {ar, 1 - ac}, {1 - ar, ac}}};
}

}  // namespace detail

class CodingSchedule {
 public:
  // dims = (C, H, W) of the latent tensor. C must be divisible by 8; H and
  // W are padded up to multiples of 4 internally and site sets are clipped
  // back to the true grid.
  CodingSchedule(int channels, int height, int width, Allocation allocation)
      : channels_(channels), height_(height), width_(width),
        padded_h_(detail::round_up4(height)),
        padded_w_(detail::round_up4(width)), allocation_(allocation) {
    if (channels <= 0 || channels % kNumGroups != 0)
      throw ConfigError("latent channel count must be a positive multiple of 8");
    if (height <= 0 || width <= 0) throw ConfigError("empty latent grid");
    allocation_code(allocation);  // throws on unsupported allocation
    build();
  }

  int channels() const { return channels_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int padded_height() const { return padded_h_; }
  int padded_width() const { return padded_w_; }
  int channels_per_group() const { return channels_ / kNumGroups; }
  const Allocation& allocation() const { return allocation_; }

  int total_steps() const { return static_cast<int>(steps_.size()); }
  const CodingStep& step(int index_1based) const {
    if (index_1based < 1 || index_1based > total_steps())
      throw ContractError("step index out of range");
    return steps_[index_1based - 1];
  }
  const std::vector<CodingStep>& steps() const { return steps_; }

  Scale scale_of_step(int index_1based) const {
    return step(index_1based).scale;
  }

  int first_step_of_scale(Scale s) const {
    switch (s) {
      case Scale::S1: return 1;
      case Scale::S2: return allocation_.s1 + 1;
      default: return allocation_.s1 + allocation_.s2 + 1;
    }
  }

  // Latent sites (over all channels) coded at one step.
  size_t step_site_count(int index_1based) const {
    const CodingStep& st = step(index_1based);
    size_t n = 0;
    for (const auto& g : st.sites) n += g.size();
    return n * channels_per_group();
  }

  // 0/1 masks at full resolution: sites coded strictly before step i, and
  // sites coded at step i.
  std::pair<Tensor, Tensor> step_mask(int index_1based) const {
    if (index_1based < 1 || index_1based > total_steps())
      throw ContractError("step index out of range");
    Tensor before(channels_, height_, width_);
    Tensor at(channels_, height_, width_);
    for (int s = 1; s <= index_1based; ++s) {
      Tensor& dst = (s == index_1based) ? at : before;
      const CodingStep& st = steps_[s - 1];
      const int cpg = channels_per_group();
      for (int g = 0; g < kNumGroups; ++g)
        for (const SpatialSite& site : st.sites[g])
          for (int k = 0; k < cpg; ++k)
            dst.at(g * cpg + k, site.row, site.col) = 1.0;
    }
    return {std::move(before), std::move(at)};
  }

  // CSV dump, one row per (step, group, channel, row, col) in canonical
  // coding order. This is the order symbols enter the range coder.
  std::string dump_csv() const {
    std::string out = "step,group,channel,row,col\n";
    const int cpg = channels_per_group();
    for (const CodingStep& st : steps_)
      for (int g = 0; g < kNumGroups; ++g)
        for (int k = 0; k < cpg; ++k)
          for (const SpatialSite& site : st.sites[g])
            out += std::to_string(st.index) + "," + std::to_string(g) + "," +
                   std::to_string(g * cpg + k) + "," +
                   std::to_string(site.row) + "," + std::to_string(site.col) +
                   "\n";
    return out;
  }

 private:
  void build() {
    const int t = allocation_.total();
    steps_.resize(t);
    for (int i = 0; i < t; ++i) {
      steps_[i].index = i + 1;
      steps_[i].scale = i < allocation_.s1
                            ? Scale::S1
                            : (i < allocation_.s1 + allocation_.s2 ? Scale::S2
                                                                   : Scale::S3);
    }
    for (int g = 0; g < kNumGroups; ++g) build_group(GroupPhase::of(g));
  }

  void push_site(int step0, int group, int row, int col) {
    if (row < height_ && col < width_)
      steps_[step0].sites[group].push_back(
          {static_cast<uint16_t>(row), static_cast<uint16_t>(col)});
  }

  void build_group(const GroupPhase& p) {
    const int g = p.group;
    // S1: checkerboard over the S1 grid. Two steps use the (i+j) parity;
    // four steps split further into (i%2, j%2) classes.
    const int s1_rows = padded_h_ / 4, s1_cols = padded_w_ / 4;
    for (int i = 0; i < s1_rows; ++i) {
      for (int j = 0; j < s1_cols; ++j) {
        int step0;
        if (allocation_.s1 == 2) {
          step0 = (i + j) & 1;
        } else {  // 4-way parity split: (0,0), (1,1), (0,1), (1,0)
          static constexpr int cls[2][2] = {{0, 2}, {3, 1}};
          step0 = cls[i & 1][j & 1];
        }
        push_site(step0, g, p.s1_row + 4 * i, p.s1_col + 4 * j);
      }
    }
    // S2: each 2x2 cell of the S2 grid has its S1 site pre-filled; the
    // other three positions are coded one per step.
    const auto cell_order = detail::s2_cell_order(p);
    const int s2_rows = padded_h_ / 2, s2_cols = padded_w_ / 2;
    for (int i = 0; i < s2_rows; ++i) {
      for (int j = 0; j < s2_cols; ++j) {
        const int ci = i & 1, cj = j & 1;
        for (int s = 0; s < 3; ++s) {
          if (cell_order[s].first == ci && cell_order[s].second == cj) {
            push_site(allocation_.s1 + s, g, p.s2_row + 2 * i, p.s2_col + 2 * j);
            break;
          }
        }
      }
    }
    // S3: frozen 12-position order per 4x4 patch, translated by the S2
    // phase; sites per step depend on the allocation (2 / 4 / 1).
    const int per_step = 12 / allocation_.s3;
    const int base = allocation_.s1 + allocation_.s2;
    for (int py = 0; py < padded_h_ / 4; ++py) {
      for (int px = 0; px < padded_w_ / 4; ++px) {
        for (int k = 0; k < 12; ++k) {
          const int r = (kPatchCodingOrder[k].first + p.s2_row) & 3;
          const int c = (kPatchCodingOrder[k].second + p.s2_col) & 3;
          push_site(base + k / per_step, g, 4 * py + r, 4 * px + c);
        }
      }
    }
    // Per-step site lists must be ascending (row, col); the loops above
    // emit S1/S2 in order, S3 per patch needs a sort.
    for (int s = base; s < allocation_.total(); ++s) {
      auto& v = steps_[s].sites[g];
      std::sort(v.begin(), v.end(), [](const SpatialSite& a, const SpatialSite& b) {
        return a.row != b.row ? a.row < b.row : a.col < b.col;
      });
    }
  }

  int channels_, height_, width_;
  int padded_h_, padded_w_;
  Allocation allocation_;
  std::vector<CodingStep> steps_;
};

inline CodingSchedule build_schedule(int channels, int height, int width,
                                     Allocation allocation) {
  return CodingSchedule(channels, height, width, allocation);
}

// Extracts the sub-lattice of `latent` for a group phase at a scale. The
// output grid covers the padded extent (sites beyond the true grid read 0).
inline LatentTensor downsample_to_scale(const LatentTensor& latent, Scale s,
                                        const GroupPhase& phase) {
  const int spacing = scale_spacing(s);
  const int hp = detail::round_up4(latent.height);
  const int wp = detail::round_up4(latent.width);
  LatentTensor out(latent.channels, hp / spacing, wp / spacing);
  for (int c = 0; c < latent.channels; ++c)
    for (int i = 0; i < out.height; ++i)
      for (int j = 0; j < out.width; ++j) {
        const int r = phase.offset_row(s) + spacing * i;
        const int k = phase.offset_col(s) + spacing * j;
        out.at(c, i, j) = (r < latent.height && k < latent.width)
                              ? latent.at(c, r, k)
                              : 0;
      }
  return out;
}

// Writes `sub` (a scale lattice extracted as above) back into `into` at the
// same lattice sites; other sites are unchanged.
inline LatentTensor upsample_fill(const LatentTensor& sub,
                                  const LatentTensor& into, Scale s,
                                  const GroupPhase& phase) {
  const int spacing = scale_spacing(s);
  const int hp = detail::round_up4(into.height);
  const int wp = detail::round_up4(into.width);
  if (sub.channels != into.channels || sub.height != hp / spacing ||
      sub.width != wp / spacing)
    throw ShapeError("upsample_fill: sub dims do not match the scale lattice");
  LatentTensor out = into;
  for (int c = 0; c < sub.channels; ++c)
    for (int i = 0; i < sub.height; ++i)
      for (int j = 0; j < sub.width; ++j) {
        const int r = phase.offset_row(s) + spacing * i;
        const int k = phase.offset_col(s) + spacing * j;
        if (r < into.height && k < into.width) out.at(c, r, k) = sub.at(c, i, j);
      }
  return out;
}

}  // namespace hpcm
