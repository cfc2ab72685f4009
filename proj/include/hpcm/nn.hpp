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
#include <string>
#include <vector>

#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// Forward-only layers for the context networks. No training, no autograd.
// Dot products accumulate in double, ascending input index; that order is
// part of the codec contract (entropy parameters must be bit-identical on
// the encode and decode side).

namespace hpcm {

// weight dims (out, in), bias dims (out).
inline Tensor conv1x1(const Tensor& in, const WeightTensor& weight,
                      const WeightTensor& bias) {
  if (weight.dims.size() != 2 || bias.dims.size() != 1)
    throw ShapeError("conv1x1: weight must be (out,in), bias (out)");
  const int out_ch = static_cast<int>(weight.dims[0]);
  const int in_ch = static_cast<int>(weight.dims[1]);
  if (in.channels() != in_ch || static_cast<int>(bias.dims[0]) != out_ch)
    throw ShapeError("conv1x1: channel mismatch, input " + in.shape_str());
  const int hw = in.height() * in.width();
  Tensor out(out_ch, in.height(), in.width());
  for (int o = 0; o < out_ch; ++o) {
    double* dst = out.data() + static_cast<size_t>(o) * hw;
    for (int p = 0; p < hw; ++p) dst[p] = bias.values[o];
    const double* wrow = weight.values.data() + static_cast<size_t>(o) * in_ch;
    for (int i = 0; i < in_ch; ++i) {
      const double w = wrow[i];
      const double* src = in.data() + static_cast<size_t>(i) * hw;
      for (int p = 0; p < hw; ++p) dst[p] += w * src[p];
    }
  }
  return out;
}

// Per-channel 3x3 kernels, zero padding of 1; kernel dims (C, 3, 3), bias (C).
inline Tensor depthwise_conv3x3(const Tensor& in, const WeightTensor& kernel,
                                const WeightTensor& bias) {
  if (kernel.dims.size() != 3 || kernel.dims[1] != 3 || kernel.dims[2] != 3)
    throw ShapeError("depthwise_conv3x3: kernel must be (C,3,3)");
  const int ch = in.channels();
  if (static_cast<int>(kernel.dims[0]) != ch ||
      static_cast<int>(bias.dims[0]) != ch)
    throw ShapeError("depthwise_conv3x3: channel mismatch");
  const int h = in.height(), w = in.width();
  Tensor out(ch, h, w);
  for (int c = 0; c < ch; ++c) {
    const double* k = kernel.values.data() + static_cast<size_t>(c) * 9;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = bias.values[c];
        for (int ky = 0; ky < 3; ++ky) {
          const int sy = y + ky - 1;
          if (sy < 0 || sy >= h) continue;
          for (int kx = 0; kx < 3; ++kx) {
            const int sx = x + kx - 1;
            if (sx < 0 || sx >= w) continue;
            acc += k[ky * 3 + kx] * in.at(c, sy, sx);
          }
        }
        out.at(c, y, x) = acc;
      }
    }
  }
  return out;
}

// Affine map over token matrices. Tokens are (batch, rows, dim_in) tensors;
// weight dims (dim_out, dim_in), bias (dim_out). Rows are tokens.
inline Tensor linear(const Tensor& tokens, const WeightTensor& weight,
                     const WeightTensor& bias) {
  if (weight.dims.size() != 2 || bias.dims.size() != 1)
    throw ShapeError("linear: weight must be (out,in), bias (out)");
  const int dim_in = static_cast<int>(weight.dims[1]);
  const int dim_out = static_cast<int>(weight.dims[0]);
  if (tokens.width() != dim_in || static_cast<int>(bias.dims[0]) != dim_out)
    throw ShapeError("linear: dimension mismatch, tokens " +
                     tokens.shape_str());
  Tensor out(tokens.channels(), tokens.height(), dim_out);
  for (int b = 0; b < tokens.channels(); ++b) {
    for (int r = 0; r < tokens.height(); ++r) {
      for (int o = 0; o < dim_out; ++o) {
        double acc = bias.values[o];
        const double* wrow =
            weight.values.data() + static_cast<size_t>(o) * dim_in;
        for (int i = 0; i < dim_in; ++i) acc += wrow[i] * tokens.at(b, r, i);
        out.at(b, r, o) = acc;
      }
    }
  }
  return out;
}

// Row-wise softmax over the last axis, stabilized by row-max subtraction.
inline Tensor softmax_rows(const Tensor& m) {
  Tensor out(m.channels(), m.height(), m.width());
  for (int b = 0; b < m.channels(); ++b) {
    for (int r = 0; r < m.height(); ++r) {
      double mx = m.at(b, r, 0);
      for (int x = 1; x < m.width(); ++x) mx = std::max(mx, m.at(b, r, x));
      double sum = 0.0;
      for (int x = 0; x < m.width(); ++x) {
        double e = std::exp(m.at(b, r, x) - mx);
        out.at(b, r, x) = e;
        sum += e;
      }
      for (int x = 0; x < m.width(); ++x) out.at(b, r, x) /= sum;
    }
  }
  return out;
}

inline Tensor relu(Tensor t) {
  for (double& v : t.values())
    if (v < 0.0) v = 0.0;
  return t;
}

// Non-overlapping spatial windows. (D, H, W) -> (windows, window*window, D),
// windows raster-ordered, tokens raster-ordered inside each window. H and W
// must be divisible by `window`; callers pad beforehand (see pad_spatial).
inline Tensor window_partition(const Tensor& feature, int window) {
  if (window <= 0 || feature.height() % window != 0 ||
      feature.width() % window != 0)
    throw ShapeError("window_partition: dims not divisible by window");
  const int gy = feature.height() / window;
  const int gx = feature.width() / window;
  const int d = feature.channels();
  Tensor out(gy * gx, window * window, d);
  for (int wy = 0; wy < gy; ++wy)
    for (int wx = 0; wx < gx; ++wx) {
      const int g = wy * gx + wx;
      for (int ty = 0; ty < window; ++ty)
        for (int tx = 0; tx < window; ++tx) {
          const int t = ty * window + tx;
          for (int c = 0; c < d; ++c)
            out.at(g, t, c) =
                feature.at(c, wy * window + ty, wx * window + tx);
        }
    }
  return out;
}

// Exact inverse of window_partition.
inline Tensor window_merge(const Tensor& tokens, int window, int height,
                           int width) {
  const int gy = height / window;
  const int gx = width / window;
  if (height % window != 0 || width % window != 0 ||
      tokens.channels() != gy * gx || tokens.height() != window * window)
    throw ShapeError("window_merge: inconsistent geometry");
  const int d = tokens.width();
  Tensor out(d, height, width);
  for (int wy = 0; wy < gy; ++wy)
    for (int wx = 0; wx < gx; ++wx) {
      const int g = wy * gx + wx;
      for (int ty = 0; ty < window; ++ty)
        for (int tx = 0; tx < window; ++tx) {
          const int t = ty * window + tx;
          for (int c = 0; c < d; ++c)
            out.at(c, wy * window + ty, wx * window + tx) = tokens.at(g, t, c);
        }
    }
  return out;
}

// Zero-pad bottom/right to (height, width).
inline Tensor pad_spatial(const Tensor& t, int height, int width) {
  if (height < t.height() || width < t.width())
    throw ShapeError("pad_spatial: target smaller than input");
  if (height == t.height() && width == t.width()) return t;
  Tensor out(t.channels(), height, width);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x) out.at(c, y, x) = t.at(c, y, x);
  return out;
}

inline Tensor crop_spatial(const Tensor& t, int height, int width) {
  if (height > t.height() || width > t.width())
    throw ShapeError("crop_spatial: target larger than input");
  if (height == t.height() && width == t.width()) return t;
  Tensor out(t.channels(), height, width);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) out.at(c, y, x) = t.at(c, y, x);
  return out;
}

// conv1x1 expand (2w) -> ReLU -> depthwise 3x3 -> ReLU -> conv1x1 project (w),
// with a residual skip. Channel count is preserved.
class DepthConvBlock {
 public:
  DepthConvBlock(WeightStore& store, const std::string& prefix, int width)
      : w_expand_(store.weight(prefix + ".expand.w",
                               {static_cast<uint32_t>(2 * width),
                                static_cast<uint32_t>(width)})),
        b_expand_(store.bias(prefix + ".expand.b", 2 * width)),
        k_dw_(store.weight(prefix + ".dw.k",
                           {static_cast<uint32_t>(2 * width), 3, 3})),
        b_dw_(store.bias(prefix + ".dw.b", 2 * width)),
        w_proj_(store.weight(prefix + ".proj.w",
                             {static_cast<uint32_t>(width),
                              static_cast<uint32_t>(2 * width)})),
        b_proj_(store.bias(prefix + ".proj.b", width)) {}

  Tensor forward(const Tensor& x) const {
    Tensor h = relu(conv1x1(x, w_expand_, b_expand_));
    h = relu(depthwise_conv3x3(h, k_dw_, b_dw_));
    h = conv1x1(h, w_proj_, b_proj_);
    for (size_t i = 0; i < h.size(); ++i) h.values()[i] += x.values()[i];
    return h;
  }

  size_t parameter_count() const {
    return w_expand_.count() + b_expand_.count() + k_dw_.count() +
           b_dw_.count() + w_proj_.count() + b_proj_.count();
  }

  const WeightTensor& expand_weight() const { return w_expand_; }

 private:
  const WeightTensor &w_expand_, &b_expand_, &k_dw_, &b_dw_, &w_proj_,
      &b_proj_;
};

}  // namespace hpcm
