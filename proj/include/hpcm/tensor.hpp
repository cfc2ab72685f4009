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
#include <string>
#include <vector>

#include "hpcm/errors.hpp"

namespace hpcm {

// Dense (channels, height, width) tensor of doubles, row-major in (c, h, w).
// All forward math in this library accumulates in double with ascending
// index order, so a given input produces bit-identical output on every run.
class Tensor {
 public:
  Tensor() = default;
  Tensor(int channels, int height, int width)
      : c_(channels), h_(height), w_(width) {
    if (channels < 0 || height < 0 || width < 0)
      throw ShapeError("Tensor: negative dimension");
    data_.assign(static_cast<size_t>(c_) * h_ * w_, 0.0);
  }

  static Tensor zeros(int c, int h, int w) { return Tensor(c, h, w); }

  int channels() const { return c_; }
  int height() const { return h_; }
  int width() const { return w_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& values() { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool same_shape(const Tensor& o) const {
    return c_ == o.c_ && h_ == o.h_ && w_ == o.w_;
  }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(c_) + "," + std::to_string(h_) + "," +
           std::to_string(w_) + ")";
  }

 private:
  size_t index(int c, int y, int x) const {
    return (static_cast<size_t>(c) * h_ + y) * w_ + x;
  }

  int c_ = 0, h_ = 0, w_ = 0;
  std::vector<double> data_;
};

// Quantized latent symbols, same (c, h, w) layout. Values must stay within
// the escape-extended 16-bit signed range; encode_latents rejects anything
// outside it.
struct LatentTensor {
  int channels = 0, height = 0, width = 0;
  std::vector<int32_t> values;

  LatentTensor() = default;
  LatentTensor(int c, int h, int w)
      : channels(c), height(h), width(w),
        values(static_cast<size_t>(c) * h * w, 0) {}

  int32_t& at(int c, int y, int x) {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  int32_t at(int c, int y, int x) const {
    return values[(static_cast<size_t>(c) * height + y) * width + x];
  }
  size_t size() const { return values.size(); }

  bool operator==(const LatentTensor& o) const {
    return channels == o.channels && height == o.height && width == o.width &&
           values == o.values;
  }

  Tensor to_tensor() const {
    Tensor t(channels, height, width);
    for (size_t i = 0; i < values.size(); ++i)
      t.values()[i] = static_cast<double>(values[i]);
    return t;
  }
};

inline constexpr int32_t kSymbolLimit = 32767;  // |value| bound (16-bit signed)

}  // namespace hpcm
