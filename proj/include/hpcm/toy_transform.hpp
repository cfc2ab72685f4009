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

#include <array>
#include <string>

#include "hpcm/codec.hpp"
#include "hpcm/nn.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// Seeded stand-in analysis/synthesis transforms with total stride 16. The
// weights are untrained; the pair exists to exercise the latent codec from
// an image-shaped input and to report distortion/bpp, not to compress well.

namespace hpcm {

namespace detail {

inline Tensor space_to_depth(const Tensor& t, int s) {
  if (t.height() % s != 0 || t.width() % s != 0)
    throw ShapeError("space_to_depth: dims not divisible by stride");
  Tensor out(t.channels() * s * s, t.height() / s, t.width() / s);
  for (int c = 0; c < t.channels(); ++c)
    for (int y = 0; y < t.height(); ++y)
      for (int x = 0; x < t.width(); ++x)
        out.at(c * s * s + (y % s) * s + (x % s), y / s, x / s) = t.at(c, y, x);
  return out;
}

inline Tensor depth_to_space(const Tensor& t, int s) {
  if (t.channels() % (s * s) != 0)
    throw ShapeError("depth_to_space: channels not divisible by stride^2");
  Tensor out(t.channels() / (s * s), t.height() * s, t.width() * s);
  for (int c = 0; c < out.channels(); ++c)
    for (int y = 0; y < out.height(); ++y)
      for (int x = 0; x < out.width(); ++x)
        out.at(c, y, x) =
            t.at(c * s * s + (y % s) * s + (x % s), y / s, x / s);
  return out;
}

}  // namespace detail

// FasterNet-style residual block: dense 3x3 depthwise convolution on the
// first quarter of channels only (partial convolution), then a 1x1 expand /
// project pair, plus the skip.
class PartialResBlock {
 public:
  PartialResBlock(WeightStore& store, const std::string& prefix, int width)
      : width_(width), partial_(std::max(1, width / 4)),
        k_dw_(store.weight(prefix + ".pconv.k",
                           {static_cast<uint32_t>(partial_), 3, 3})),
        b_dw_(store.bias(prefix + ".pconv.b", partial_)),
        w_expand_(store.weight(prefix + ".expand.w",
                               {static_cast<uint32_t>(2 * width),
                                static_cast<uint32_t>(width)})),
        b_expand_(store.bias(prefix + ".expand.b", 2 * width)),
        w_proj_(store.weight(prefix + ".proj.w",
                             {static_cast<uint32_t>(width),
                              static_cast<uint32_t>(2 * width)})),
        b_proj_(store.bias(prefix + ".proj.b", width)) {}

  Tensor forward(const Tensor& x) const {
    Tensor h = x;
    Tensor part(partial_, x.height(), x.width());
    for (int c = 0; c < partial_; ++c)
      for (int y = 0; y < x.height(); ++y)
        for (int k = 0; k < x.width(); ++k) part.at(c, y, k) = x.at(c, y, k);
    part = depthwise_conv3x3(part, k_dw_, b_dw_);
    for (int c = 0; c < partial_; ++c)
      for (int y = 0; y < x.height(); ++y)
        for (int k = 0; k < x.width(); ++k) h.at(c, y, k) = part.at(c, y, k);
    Tensor out = conv1x1(relu(conv1x1(h, w_expand_, b_expand_)), w_proj_,
                         b_proj_);
    for (size_t i = 0; i < out.size(); ++i) out.values()[i] += x.values()[i];
    return out;
  }

 private:
  int width_, partial_;
  const WeightTensor &k_dw_, &b_dw_, &w_expand_, &b_expand_, &w_proj_, &b_proj_;
};

struct ToyTransformConfig {
  int width = 64;
  int latent_channels = 32;
  std::array<int, 5> depths = {1, 1, 1, 1, 1};  // blocks per stage
};

// Analysis: stride 4, 2, 2 downsampling stages (total 16). Synthesis is the
// mirrored stack. Downsampling is space-to-depth plus a 1x1 convolution,
// the exact transpose pairing on the way back up.
class ToyTransform {
 public:
  ToyTransform(WeightStore& store, int image_channels,
               ToyTransformConfig cfg = {})
      : cfg_(cfg), image_channels_(image_channels), store_(store) {
    const int w = cfg.width;
    auto cw = [&](const std::string& n, int out, int in) {
      return &store.weight(n, {static_cast<uint32_t>(out),
                               static_cast<uint32_t>(in)});
    };
    ga_in_w_ = cw("toy.ga.in.w", w, image_channels * 16);
    ga_in_b_ = &store.bias("toy.ga.in.b", w);
    ga_d1_w_ = cw("toy.ga.d1.w", w, 4 * w);
    ga_d1_b_ = &store.bias("toy.ga.d1.b", w);
    ga_d2_w_ = cw("toy.ga.d2.w", w, 4 * w);
    ga_d2_b_ = &store.bias("toy.ga.d2.b", w);
    ga_out_w_ = cw("toy.ga.out.w", cfg.latent_channels, w);
    ga_out_b_ = &store.bias("toy.ga.out.b", cfg.latent_channels);
    gs_in_w_ = cw("toy.gs.in.w", w, cfg.latent_channels);
    gs_in_b_ = &store.bias("toy.gs.in.b", w);
    gs_u1_w_ = cw("toy.gs.u1.w", 4 * w, w);
    gs_u1_b_ = &store.bias("toy.gs.u1.b", 4 * w);
    gs_u2_w_ = cw("toy.gs.u2.w", 4 * w, w);
    gs_u2_b_ = &store.bias("toy.gs.u2.b", 4 * w);
    gs_out_w_ = cw("toy.gs.out.w", image_channels * 16, w);
    gs_out_b_ = &store.bias("toy.gs.out.b", image_channels * 16);
    for (int i = 0; i < cfg.depths[0]; ++i)
      l1_.emplace_back(store, "toy.ga.l1b" + std::to_string(i), w);
    for (int i = 0; i < cfg.depths[1]; ++i)
      l2_.emplace_back(store, "toy.ga.l2b" + std::to_string(i), w);
    for (int i = 0; i < cfg.depths[2]; ++i)
      l3_.emplace_back(store, "toy.ga.l3b" + std::to_string(i), w);
    for (int i = 0; i < cfg.depths[3]; ++i)
      l4_.emplace_back(store, "toy.gs.l4b" + std::to_string(i), w);
    for (int i = 0; i < cfg.depths[4]; ++i)
      l5_.emplace_back(store, "toy.gs.l5b" + std::to_string(i), w);
  }

  // (C_img, H, W) -> rounded latents (latent_channels, H/16, W/16).
  LatentTensor analyze(const Tensor& image) const {
    if (image.channels() != image_channels_)
      throw ShapeError("toy analysis: image channel mismatch");
    if (image.height() % 16 != 0 || image.width() % 16 != 0)
      throw ConfigError("toy transform needs dims divisible by 16");
    Tensor h = conv1x1(detail::space_to_depth(image, 4), *ga_in_w_, *ga_in_b_);
    for (const auto& b : l1_) h = b.forward(h);
    h = conv1x1(detail::space_to_depth(h, 2), *ga_d1_w_, *ga_d1_b_);
    for (const auto& b : l2_) h = b.forward(h);
    h = conv1x1(detail::space_to_depth(h, 2), *ga_d2_w_, *ga_d2_b_);
    for (const auto& b : l3_) h = b.forward(h);
    h = conv1x1(h, *ga_out_w_, *ga_out_b_);
    LatentTensor y(h.channels(), h.height(), h.width());
    for (size_t i = 0; i < h.size(); ++i) {
      double v = std::nearbyint(h.values()[i]);
      y.values[i] = static_cast<int32_t>(
          std::clamp(v, -static_cast<double>(kSymbolLimit),
                     static_cast<double>(kSymbolLimit)));
    }
    return y;
  }

  // (latent_channels, H/16, W/16) -> (C_img, H, W).
  Tensor synthesize(const LatentTensor& y) const {
    Tensor h = conv1x1(y.to_tensor(), *gs_in_w_, *gs_in_b_);
    for (const auto& b : l4_) h = b.forward(h);
    h = detail::depth_to_space(conv1x1(h, *gs_u1_w_, *gs_u1_b_), 2);
    for (const auto& b : l5_) h = b.forward(h);
    h = detail::depth_to_space(conv1x1(h, *gs_u2_w_, *gs_u2_b_), 2);
    return detail::depth_to_space(conv1x1(h, *gs_out_w_, *gs_out_b_), 4);
  }

 private:
  ToyTransformConfig cfg_;
  int image_channels_;
  WeightStore& store_;
  const WeightTensor *ga_in_w_, *ga_in_b_, *ga_d1_w_, *ga_d1_b_, *ga_d2_w_,
      *ga_d2_b_, *ga_out_w_, *ga_out_b_;
  const WeightTensor *gs_in_w_, *gs_in_b_, *gs_u1_w_, *gs_u1_b_, *gs_u2_w_,
      *gs_u2_b_, *gs_out_w_, *gs_out_b_;
  std::vector<PartialResBlock> l1_, l2_, l3_, l4_, l5_;
};

struct ToyRoundtrip {
  LatentTensor latents;
  Tensor reconstruction;
  Bitstream stream;
  RateReport report;
};

inline ToyRoundtrip toy_transform_roundtrip(const Tensor& image,
                                            const CodecConfig& cfg,
                                            ToyTransformConfig toy_cfg = {}) {
  WeightStore store(cfg.seed);
  ToyTransform transform(store, image.channels(), toy_cfg);
  ToyRoundtrip result;
  result.latents = transform.analyze(image);
  SessionTrace trace;
  result.stream = encode_latents(result.latents, cfg, &trace);
  result.reconstruction = transform.synthesize(result.latents);
  result.report = rate_report(result.stream, trace);
  const double pixels =
      static_cast<double>(image.height()) * image.width();
  result.report.bpp =
      static_cast<double>(result.report.bits_z + result.report.bits_y) /
      pixels;
  double se = 0.0;
  for (size_t i = 0; i < image.size(); ++i) {
    const double d = image.values()[i] - result.reconstruction.values()[i];
    se += d * d;
  }
  result.report.mse = se / static_cast<double>(image.size());
  return result;
}

}  // namespace hpcm
