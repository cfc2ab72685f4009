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

#include <cmath>
#include <cstdint>

#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// Deterministic synthetic latent fields for tests and benchmarks.

namespace hpcm {

class FieldRng {
 public:
  explicit FieldRng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    uint64_t x = state_;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  // Uniform in (0, 1].
  double unit_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = unit_open();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586477 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline LatentTensor gen_zeros(int c, int h, int w) {
  return LatentTensor(c, h, w);
}

// i.i.d. integers uniform in [-amplitude, amplitude].
inline LatentTensor gen_uniform(int c, int h, int w, uint64_t seed,
                                int amplitude) {
  if (amplitude < 0 || amplitude > kSymbolLimit)
    throw ConfigError("gen_uniform: bad amplitude");
  LatentTensor out(c, h, w);
  FieldRng rng(mix64(seed ^ 0x756e6966u));
  const int span = 2 * amplitude + 1;
  for (auto& v : out.values)
    v = static_cast<int32_t>(rng.unit() * span) - amplitude;
  return out;
}

// Separable AR(1) field: a row-wise then column-wise first-order recursion
// over white Gaussian noise, stationary with unit marginal variance and
// product correlation rho^|dr| * rho^|dc|; scaled and rounded to integers.
// Channels are independent.
inline LatentTensor gen_ar1(int c, int h, int w, double rho, uint64_t seed,
                            double scale = 4.0) {
  if (!(rho >= 0.0 && rho < 1.0))
    throw ConfigError("gen_ar1: rho must be in [0, 1)");
  if (!(scale > 0.0)) throw ConfigError("gen_ar1: scale must be positive");
  LatentTensor out(c, h, w);
  const double innov = std::sqrt(1.0 - rho * rho);
  std::vector<double> field(static_cast<size_t>(h) * w);
  for (int ch = 0; ch < c; ++ch) {
    FieldRng rng(mix64(seed + 0x9e3779b97f4a7c15ull * (ch + 1)));
    for (int r = 0; r < h; ++r) {
      double prev = 0.0;
      for (int k = 0; k < w; ++k) {
        const double g = rng.gaussian();
        const double v = (k == 0) ? g : rho * prev + innov * g;
        field[static_cast<size_t>(r) * w + k] = v;
        prev = v;
      }
    }
    for (int k = 0; k < w; ++k) {
      double prev = field[k];
      for (int r = 1; r < h; ++r) {
        const double v = rho * prev + innov * field[static_cast<size_t>(r) * w + k];
        field[static_cast<size_t>(r) * w + k] = v;
        prev = v;
      }
    }
    for (int r = 0; r < h; ++r)
      for (int k = 0; k < w; ++k) {
        const double v = std::nearbyint(scale * field[static_cast<size_t>(r) * w + k]);
        out.at(ch, r, k) = static_cast<int32_t>(
            std::clamp(v, -static_cast<double>(kSymbolLimit),
                       static_cast<double>(kSymbolLimit)));
      }
  }
  return out;
}

}  // namespace hpcm
