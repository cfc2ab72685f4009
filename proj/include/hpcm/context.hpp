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
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "hpcm/config.hpp"
#include "hpcm/ggm.hpp"
#include "hpcm/nn.hpp"
#include "hpcm/schedule.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// Step-wise context machinery. A ContextEngine owns the per-session state
// (accumulated context, entropy-parameter state, coded planes) and hands the
// codec per-site (mu, alpha) for each coding step. The engine is driven
// identically on the encode and decode side; everything it computes for step
// i depends only on the hyper information and on symbols committed at steps
// strictly before i.

namespace hpcm {

struct ChannelStats {
  double mean = 0.0;
  double alpha = 1.0;  // clamped std estimate
};

// Entropy-parameter network: 1x1 convolution, per-step channel modulation
// (step adaptive embedding), two stages of DepthConvBlocks with a 1x1 mixing
// convolution between them, and a 1x1 head emitting 2C channels (mu planes
// then log-alpha planes). Block weights are shared across every step the
// network serves; only the embedding differs per step.
class EntropyParamNet {
 public:
  EntropyParamNet(WeightStore& store, const std::string& prefix, int in_ch,
                  int width, int out_ch, EpDepths depths, int steps)
      : prefix_(prefix), width_(width),
        w_in_(store.weight(prefix + ".in.w",
                           {static_cast<uint32_t>(width),
                            static_cast<uint32_t>(in_ch)})),
        b_in_(store.bias(prefix + ".in.b", width)),
        w_mid_(store.weight(prefix + ".mid.w",
                            {static_cast<uint32_t>(width),
                             static_cast<uint32_t>(width)})),
        b_mid_(store.bias(prefix + ".mid.b", width)),
        w_head_(store.weight(prefix + ".head.w",
                             {static_cast<uint32_t>(out_ch),
                              static_cast<uint32_t>(width)})),
        b_head_(store.bias(prefix + ".head.b", out_ch)) {
    for (int i = 0; i < depths.n1; ++i)
      stage1_.emplace_back(store, prefix + ".s1b" + std::to_string(i), width);
    for (int i = 0; i < depths.n2; ++i)
      stage2_.emplace_back(store, prefix + ".s2b" + std::to_string(i), width);
    for (int s = 0; s < steps; ++s) {
      const std::string sp = prefix + ".step" + std::to_string(s);
      embed_gamma_.push_back(&store.weight_with_fan_in(
          sp + ".gamma", {static_cast<uint32_t>(width)}, width));
      embed_beta_.push_back(&store.weight_with_fan_in(
          sp + ".beta", {static_cast<uint32_t>(width)}, width));
    }
  }

  // local_step indexes the embedding table (0-based within this network).
  Tensor forward(const Tensor& input, int local_step) const {
    if (local_step < 0 || local_step >= static_cast<int>(embed_gamma_.size()))
      throw ContractError("EntropyParamNet: step beyond schedule");
    Tensor x = conv1x1(input, w_in_, b_in_);
    const WeightTensor& g = *embed_gamma_[local_step];
    const WeightTensor& b = *embed_beta_[local_step];
    const int hw = x.height() * x.width();
    for (int c = 0; c < width_; ++c) {
      double* row = x.data() + static_cast<size_t>(c) * hw;
      const double scale = 1.0 + g.values[c];
      const double shift = b.values[c];
      for (int p = 0; p < hw; ++p) row[p] = row[p] * scale + shift;
    }
    x = relu(std::move(x));
    for (const auto& blk : stage1_) x = blk.forward(x);
    x = relu(conv1x1(x, w_mid_, b_mid_));
    for (const auto& blk : stage2_) x = blk.forward(x);
    return conv1x1(x, w_head_, b_head_);
  }

  size_t parameter_count() const {
    size_t n = w_in_.count() + b_in_.count() + w_mid_.count() + b_mid_.count() +
               w_head_.count() + b_head_.count();
    for (const auto& b : stage1_) n += b.parameter_count();
    for (const auto& b : stage2_) n += b.parameter_count();
    for (const auto* e : embed_gamma_) n += e->count();
    for (const auto* e : embed_beta_) n += e->count();
    return n;
  }

  int stage1_blocks() const { return static_cast<int>(stage1_.size()); }
  int stage2_blocks() const { return static_cast<int>(stage2_.size()); }
  int embedding_steps() const { return static_cast<int>(embed_gamma_.size()); }
  const WeightTensor* embedding_gamma(int s) const { return embed_gamma_[s]; }
  const WeightTensor* shared_input_weight() const { return &w_in_; }
  const std::string& prefix() const { return prefix_; }

 private:
  std::string prefix_;
  int width_;
  const WeightTensor &w_in_, &b_in_, &w_mid_, &b_mid_, &w_head_, &b_head_;
  std::vector<DepthConvBlock> stage1_, stage2_;
  std::vector<const WeightTensor*> embed_gamma_, embed_beta_;
};

// Windowed cross-attention fusion of the entropy-parameter state into the
// accumulated context: queries come from psi, keys/values from the context,
// and a linear projection of psi is the residual. Output shape equals the
// context shape.
class ContextFusion {
 public:
  ContextFusion(WeightStore& store, int ctx_ch, int psi_ch, int attn_dim,
                int window)
      : attn_dim_(attn_dim), window_(window),
        w_q_(store.weight("pcf.q.w", {static_cast<uint32_t>(attn_dim),
                                      static_cast<uint32_t>(psi_ch)})),
        b_q_(store.bias("pcf.q.b", attn_dim)),
        w_k_(store.weight("pcf.k.w", {static_cast<uint32_t>(attn_dim),
                                      static_cast<uint32_t>(ctx_ch)})),
        b_k_(store.bias("pcf.k.b", attn_dim)),
        w_v_(store.weight("pcf.v.w", {static_cast<uint32_t>(ctx_ch),
                                      static_cast<uint32_t>(ctx_ch)})),
        b_v_(store.bias("pcf.v.b", ctx_ch)),
        w_r_(store.weight("pcf.r.w", {static_cast<uint32_t>(ctx_ch),
                                      static_cast<uint32_t>(psi_ch)})),
        b_r_(store.bias("pcf.r.b", ctx_ch)) {}

  Tensor fuse(const Tensor& ctx, const Tensor& psi) const {
    if (ctx.height() != psi.height() || ctx.width() != psi.width())
      throw ShapeError("ContextFusion: spatial dims differ");
    const int h = ctx.height(), w = ctx.width();
    const int hp = ((h + window_ - 1) / window_) * window_;
    const int wp = ((w + window_ - 1) / window_) * window_;
    const Tensor ctx_p = pad_spatial(ctx, hp, wp);
    const Tensor psi_p = pad_spatial(psi, hp, wp);

    const Tensor ctx_tok = window_partition(ctx_p, window_);
    const Tensor psi_tok = window_partition(psi_p, window_);
    const Tensor q = linear(psi_tok, w_q_, b_q_);
    const Tensor k = linear(ctx_tok, w_k_, b_k_);
    const Tensor v = linear(ctx_tok, w_v_, b_v_);
    const Tensor res = linear(psi_tok, w_r_, b_r_);

    const int groups = q.channels();
    const int tokens = q.height();
    const double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(attn_dim_));
    Tensor logits(groups, tokens, tokens);
    for (int g = 0; g < groups; ++g)
      for (int a = 0; a < tokens; ++a)
        for (int b = 0; b < tokens; ++b) {
          double acc = 0.0;
          for (int d = 0; d < attn_dim_; ++d)
            acc += q.at(g, a, d) * k.at(g, b, d);
          logits.at(g, a, b) = acc * inv_sqrt_dk;
        }
    const Tensor attn = softmax_rows(logits);

    const int dim = v.width();
    Tensor out_tok(groups, tokens, dim);
    for (int g = 0; g < groups; ++g)
      for (int a = 0; a < tokens; ++a)
        for (int d = 0; d < dim; ++d) {
          double acc = res.at(g, a, d);
          for (int b = 0; b < tokens; ++b)
            acc += attn.at(g, a, b) * v.at(g, b, d);
          out_tok.at(g, a, d) = acc;
        }

    return crop_spatial(window_merge(out_tok, window_, hp, wp), h, w);
  }

 private:
  int attn_dim_, window_;
  const WeightTensor &w_q_, &b_q_, &w_k_, &b_k_, &w_v_, &b_v_, &w_r_, &b_r_;
};

// Toy hyper path: stride-4 analysis of the latents and a mirrored synthesis
// back to the full latent grid, both seeded-weight 1x1 conv stacks.
class HyperTransforms {
 public:
  HyperTransforms(WeightStore& store, int latent_ch, int hyper_ch)
      : hyper_ch_(hyper_ch),
        a0_w_(store.weight("hyper.ha.c0.w", {u(hyper_ch), u(latent_ch)})),
        a0_b_(store.bias("hyper.ha.c0.b", hyper_ch)),
        a1_w_(store.weight("hyper.ha.c1.w", {u(hyper_ch), u(hyper_ch)})),
        a1_b_(store.bias("hyper.ha.c1.b", hyper_ch)),
        a2_w_(store.weight("hyper.ha.c2.w", {u(hyper_ch), u(hyper_ch)})),
        a2_b_(store.bias("hyper.ha.c2.b", hyper_ch)),
        s0_w_(store.weight("hyper.hs.c0.w", {u(hyper_ch), u(hyper_ch)})),
        s0_b_(store.bias("hyper.hs.c0.b", hyper_ch)),
        s1_w_(store.weight("hyper.hs.c1.w", {u(hyper_ch), u(hyper_ch)})),
        s1_b_(store.bias("hyper.hs.c1.b", hyper_ch)),
        s2_w_(store.weight("hyper.hs.c2.w", {u(hyper_ch), u(hyper_ch)})),
        s2_b_(store.bias("hyper.hs.c2.b", hyper_ch)) {}

  // (C, Hp, Wp) -> rounded hyper latents (hyper_ch, Hp/4, Wp/4).
  LatentTensor analyze(const Tensor& y) const {
    Tensor h = relu(conv1x1(y, a0_w_, a0_b_));
    h = stride2(h);
    h = relu(conv1x1(h, a1_w_, a1_b_));
    h = stride2(h);
    h = conv1x1(h, a2_w_, a2_b_);
    LatentTensor z(h.channels(), h.height(), h.width());
    for (size_t i = 0; i < h.size(); ++i) {
      double v = std::nearbyint(h.values()[i]);
      if (v > kSymbolLimit) v = kSymbolLimit;
      if (v < -kSymbolLimit) v = -kSymbolLimit;
      z.values[i] = static_cast<int32_t>(v);
    }
    return z;
  }

  // (hyper_ch, Hp/4, Wp/4) -> feature grid (hyper_ch, Hp, Wp).
  Tensor synthesize(const LatentTensor& z) const {
    Tensor h = relu(conv1x1(z.to_tensor(), s0_w_, s0_b_));
    h = upsample2(h);
    h = relu(conv1x1(h, s1_w_, s1_b_));
    h = upsample2(h);
    return conv1x1(h, s2_w_, s2_b_);
  }

 private:
  static uint32_t u(int v) { return static_cast<uint32_t>(v); }

  static Tensor stride2(const Tensor& t) {
    Tensor out(t.channels(), t.height() / 2, t.width() / 2);
    for (int c = 0; c < t.channels(); ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
          out.at(c, y, x) = t.at(c, 2 * y, 2 * x);
    return out;
  }

  static Tensor upsample2(const Tensor& t) {
    Tensor out(t.channels(), t.height() * 2, t.width() * 2);
    for (int c = 0; c < t.channels(); ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
          out.at(c, y, x) = t.at(c, y / 2, x / 2);
    return out;
  }

  int hyper_ch_;
  const WeightTensor &a0_w_, &a0_b_, &a1_w_, &a1_b_, &a2_w_, &a2_b_;
  const WeightTensor &s0_w_, &s0_b_, &s1_w_, &s1_b_, &s2_w_, &s2_b_;
};

// Fixed per-channel zero-mean GGM prior for the hyper latents. Both sides
// rebuild the tables deterministically from the seeded per-channel scales;
// nothing is serialized.
class FactorizedPrior {
 public:
  FactorizedPrior(WeightStore& store, int channels) {
    const WeightTensor& log_alpha = store.weight_with_fan_in(
        "hyper.prior_logalpha", {static_cast<uint32_t>(channels)}, 1);
    tables_.reserve(channels);
    alphas_.reserve(channels);
    for (int c = 0; c < channels; ++c) {
      const double alpha =
          std::clamp(std::exp(log_alpha.values[c]), kAlphaMin, kAlphaMax);
      alphas_.push_back(alpha);
      tables_.push_back(latent_cdf(GgmParams{0.0, alpha}));
    }
  }

  const QuantizedCdf& table(int channel) const {
    if (channel < 0 || channel >= static_cast<int>(tables_.size()))
      throw ContractError("FactorizedPrior: channel out of range");
    return tables_[channel];
  }
  double alpha(int channel) const { return alphas_[channel]; }
  int channels() const { return static_cast<int>(tables_.size()); }

 private:
  std::vector<QuantizedCdf> tables_;
  std::vector<double> alphas_;
};

// Per-step (mu, alpha) capture for tests (causality, encoder/decoder
// parameter equality).
struct StepTrace {
  std::vector<std::vector<double>> mu;
  std::vector<std::vector<double>> alpha;
};

class ContextEngine {
 public:
  // `hyper_feat` must be non-null for the neural backend (the synthesized
  // hyper feature grid at padded resolution); `stats` must be non-null for
  // the stats-driven backends.
  ContextEngine(const CodecConfig& config, const CodingSchedule& schedule,
                WeightStore* store, const Tensor* hyper_feat,
                const std::vector<ChannelStats>* stats)
      : config_(config), schedule_(schedule),
        coded_(schedule.channels(), schedule.padded_height(),
               schedule.padded_width()),
        group_mask_(kNumGroups, schedule.padded_height(),
                    schedule.padded_width()) {
    for (int g = 0; g < kNumGroups; ++g) phases_[g] = GroupPhase::of(g);
    if (config.backend == Backend::kNeural) {
      if (store == nullptr || hyper_feat == nullptr)
        throw ContractError("neural backend needs weights and hyper features");
      if (hyper_feat->height() != schedule.padded_height() ||
          hyper_feat->width() != schedule.padded_width())
        throw ShapeError("hyper feature grid does not match padded latents");
      const int c = schedule.channels();
      const int in_ch = c + kNumGroups + config.context_width;
      const Allocation& a = schedule.allocation();
      coarse_net_ = std::make_unique<EntropyParamNet>(
          *store, "ep_coarse", in_ch, config.ep_width, 2 * c,
          coarse_net_depths(config.model), a.s1 + a.s2);
      fine_net_ = std::make_unique<EntropyParamNet>(
          *store, "ep_fine", in_ch, config.ep_width, 2 * c,
          fine_net_depths(config.model), a.s3);
      fusion_ = std::make_unique<ContextFusion>(
          *store, config.context_width, 2 * c, config.attention_dim,
          config.window);
      proj_w_ = &store->weight(
          "ctx.hyper_proj.w", {static_cast<uint32_t>(config.context_width),
                               static_cast<uint32_t>(hyper_feat->channels())});
      proj_b_ = &store->bias("ctx.hyper_proj.b", config.context_width);
      hyper_proj_ = conv1x1(*hyper_feat, *proj_w_, *proj_b_);
    } else {
      if (stats == nullptr)
        throw ContractError("stats-driven backend needs channel stats");
      if (static_cast<int>(stats->size()) != schedule.channels())
        throw ShapeError("channel stats count mismatch");
      stats_ = *stats;
    }
  }

  void set_trace(StepTrace* trace) { trace_ = trace; }

  // Entropy parameters for every site of the step, in canonical coding
  // order (group asc, channel asc, then (row, col) asc). Must be called
  // with consecutive steps starting at 1, with commit_step in between.
  std::vector<GgmParams> step_params(int step) {
    if (step != next_step_)
      throw ContractError("ContextEngine: steps must be driven in order");
    if (step > schedule_.total_steps())
      throw ContractError("ContextEngine: step beyond schedule");
    std::vector<GgmParams> params;
    params.reserve(schedule_.step_site_count(step));
    switch (config_.backend) {
      case Backend::kHyperpriorOnly:
        for_each_site(step, [&](int ch, int, int, const GroupPhase&) {
          params.push_back(
              GgmParams::clamped(stats_[ch].mean, stats_[ch].alpha));
        });
        break;
      case Backend::kAnalytic:
        for_each_site(step, [&](int ch, int r, int c, const GroupPhase& p) {
          params.push_back(analytic_site_params(ch, r, c, p));
        });
        break;
      case Backend::kNeural: {
        advance_context(step);
        psi_ = neural_psi(step);
        const Scale s = schedule_.scale_of_step(step);
        const int spacing = scale_spacing(s);
        const int chans = schedule_.channels();
        for_each_site(step, [&](int ch, int r, int c, const GroupPhase& p) {
          const int i = (r - p.offset_row(s)) / spacing;
          const int j = (c - p.offset_col(s)) / spacing;
          params.push_back(GgmParams{psi_.at(ch, i, j),
                                     psi_.at(chans + ch, i, j)});
        });
        break;
      }
    }
    if (trace_) {
      std::vector<double> mu, alpha;
      mu.reserve(params.size());
      alpha.reserve(params.size());
      for (const GgmParams& p : params) {
        mu.push_back(p.mu);
        alpha.push_back(p.alpha);
      }
      trace_->mu.push_back(std::move(mu));
      trace_->alpha.push_back(std::move(alpha));
    }
    return params;
  }

  // Commits the step's symbols (same canonical order as step_params).
  void commit_step(int step, const std::vector<int32_t>& symbols) {
    if (step != next_step_)
      throw ContractError("ContextEngine: commit out of order");
    size_t k = 0;
    for_each_site(step, [&](int ch, int r, int c, const GroupPhase& p) {
      coded_.at(ch, r, c) = static_cast<double>(symbols.at(k++));
      group_mask_.at(p.group, r, c) = 1.0;
    });
    if (k != symbols.size())
      throw ContractError("ContextEngine: symbol count mismatch");
    ++next_step_;
  }

  const EntropyParamNet* coarse_net() const { return coarse_net_.get(); }
  const EntropyParamNet* fine_net() const { return fine_net_.get(); }

  // The context-width projection of the hyper features, sampled on a scale
  // grid (stride 4/2/1, offset (0,0)). Step 1 starts from the S1 sampling.
  Tensor hyper_context_at(Scale s) const { return sample_hyper_proj(s); }

  // Lattice sites of the coarser grid carry the accumulated context; every
  // other site carries the projected hyper features.
  Tensor cross_scale_fill(const Tensor& coarse, Scale target) const {
    Tensor out = sample_hyper_proj(target);
    if (coarse.height() * 2 != out.height() ||
        coarse.width() * 2 != out.width())
      throw ShapeError("cross_scale_fill: not the successor scale");
    for (int c = 0; c < out.channels(); ++c)
      for (int y = 0; y < coarse.height(); ++y)
        for (int x = 0; x < coarse.width(); ++x)
          out.at(c, 2 * y, 2 * x) = coarse.at(c, y, x);
    return out;
  }

 private:
  template <typename Fn>
  void for_each_site(int step, Fn&& fn) const {
    const CodingStep& st = schedule_.step(step);
    const int cpg = schedule_.channels_per_group();
    for (int g = 0; g < kNumGroups; ++g)
      for (int k = 0; k < cpg; ++k)
        for (const SpatialSite& site : st.sites[g])
          fn(g * cpg + k, site.row, site.col, phases_[g]);
  }

  // ---- analytic backend -------------------------------------------------

  // Offsets of the Chebyshev ring at radius d, ordered by (|dr|+|dc|, dr,
  // dc): axis-aligned neighbors come first. The order is the coded-neighbor
  // tie-break rule and is frozen (see docs/format.md).
  const std::vector<std::pair<int, int>>& ring_offsets(int d) const {
    while (static_cast<int>(rings_.size()) <= d) {
      const int rd = static_cast<int>(rings_.size());
      std::vector<std::pair<int, int>> ring;
      for (int dr = -rd; dr <= rd; ++dr)
        for (int dc = -rd; dc <= rd; ++dc)
          if (std::max(std::abs(dr), std::abs(dc)) == rd)
            ring.emplace_back(dr, dc);
      std::sort(ring.begin(), ring.end(), [](const auto& a, const auto& b) {
        const int sa = std::abs(a.first) + std::abs(a.second);
        const int sb = std::abs(b.first) + std::abs(b.second);
        if (sa != sb) return sa < sb;
        return a < b;
      });
      rings_.push_back(std::move(ring));
    }
    return rings_[d];
  }

  // mu: inverse-Chebyshev-weighted average of the first knn coded sites in
  // ring-scan order (same channel plane). alpha: the channel's base scale
  // shrunk once per coded neighbor within the close radius, capped.
  GgmParams analytic_site_params(int ch, int row, int col,
                                 const GroupPhase& p) const {
    const int hp = schedule_.padded_height(), wp = schedule_.padded_width();
    const int max_radius = std::max(hp, wp);
    double wsum = 0.0, vsum = 0.0;
    int found = 0;
    for (int d = 1; d <= max_radius && found < config_.knn; ++d) {
      for (const auto& [dr, dc] : ring_offsets(d)) {
        if (found >= config_.knn) break;
        const int r = row + dr, c = col + dc;
        if (r < 0 || r >= hp || c < 0 || c >= wp) continue;
        if (group_mask_.at(p.group, r, c) == 0.0) continue;
        const double w = 1.0 / d;
        wsum += w;
        vsum += w * coded_.at(ch, r, c);
        ++found;
      }
    }
    int close = 0;
    const int rad = config_.neighbor_radius;
    for (int dr = -rad; dr <= rad; ++dr)
      for (int dc = -rad; dc <= rad; ++dc) {
        if (dr == 0 && dc == 0) continue;
        const int r = row + dr, c = col + dc;
        if (r < 0 || r >= hp || c < 0 || c >= wp) continue;
        if (group_mask_.at(p.group, r, c) != 0.0) ++close;
      }
    close = std::min(close, config_.shrink_cap);
    const double base = stats_[ch].alpha;
    const double alpha = base * std::pow(config_.shrink, close);
    const double mu = (found == 0) ? 0.0 : vsum / wsum;
    return GgmParams::clamped(mu, alpha);
  }

  // ---- neural backend ---------------------------------------------------

  Tensor sample_hyper_proj(Scale s) const {
    const int spacing = scale_spacing(s);
    if (spacing == 1) return hyper_proj_;
    Tensor out(hyper_proj_.channels(), hyper_proj_.height() / spacing,
               hyper_proj_.width() / spacing);
    for (int c = 0; c < out.channels(); ++c)
      for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
          out.at(c, y, x) = hyper_proj_.at(c, y * spacing, x * spacing);
    return out;
  }

  // Progressive accumulation: fuse the previous step's psi into the context,
  // then lift across the scale boundary when the step changes scale.
  void advance_context(int step) {
    if (step == 1) {
      ctx_ = sample_hyper_proj(Scale::S1);
      return;
    }
    ctx_ = fusion_->fuse(ctx_, psi_);
    const Scale prev = schedule_.scale_of_step(step - 1);
    const Scale cur = schedule_.scale_of_step(step);
    if (prev != cur) ctx_ = cross_scale_fill(ctx_, cur);
  }

  Tensor neural_psi(int step) {
    const Scale s = schedule_.scale_of_step(step);
    const int spacing = scale_spacing(s);
    const int chans = schedule_.channels();
    const int hs = schedule_.padded_height() / spacing;
    const int ws = schedule_.padded_width() / spacing;
    Tensor input(chans + kNumGroups + ctx_.channels(), hs, ws);
    const int cpg = schedule_.channels_per_group();
    for (int ch = 0; ch < chans; ++ch) {
      const GroupPhase& p = phases_[ch / cpg];
      const int orow = p.offset_row(s), ocol = p.offset_col(s);
      for (int i = 0; i < hs; ++i)
        for (int j = 0; j < ws; ++j) {
          const int r = orow + spacing * i, c = ocol + spacing * j;
          if (group_mask_.at(p.group, r, c) != 0.0)
            input.at(ch, i, j) = coded_.at(ch, r, c);
        }
    }
    for (int g = 0; g < kNumGroups; ++g) {
      const GroupPhase& p = phases_[g];
      const int orow = p.offset_row(s), ocol = p.offset_col(s);
      for (int i = 0; i < hs; ++i)
        for (int j = 0; j < ws; ++j)
          input.at(chans + g, i, j) =
              group_mask_.at(g, orow + spacing * i, ocol + spacing * j);
    }
    for (int c = 0; c < ctx_.channels(); ++c)
      for (int i = 0; i < hs; ++i)
        for (int j = 0; j < ws; ++j)
          input.at(chans + kNumGroups + c, i, j) = ctx_.at(c, i, j);

    const Allocation& a = schedule_.allocation();
    Tensor psi;
    if (s == Scale::S3)
      psi = fine_net_->forward(input, step - a.s1 - a.s2 - 1);
    else
      psi = coarse_net_->forward(input, step - 1);
    // Positive alpha activation on the second half of the channels.
    const int hw = psi.height() * psi.width();
    for (int c = chans; c < 2 * chans; ++c) {
      double* row = psi.data() + static_cast<size_t>(c) * hw;
      for (int p = 0; p < hw; ++p)
        row[p] = std::clamp(std::exp(row[p]), kAlphaMin, kAlphaMax);
    }
    return psi;
  }

  const CodecConfig config_;
  const CodingSchedule& schedule_;
  std::array<GroupPhase, kNumGroups> phases_{};
  Tensor coded_;       // committed symbols at full padded resolution
  Tensor group_mask_;  // per-group coded mask, full padded resolution
  std::vector<ChannelStats> stats_;

  std::unique_ptr<EntropyParamNet> coarse_net_, fine_net_;
  std::unique_ptr<ContextFusion> fusion_;
  const WeightTensor* proj_w_ = nullptr;
  const WeightTensor* proj_b_ = nullptr;
  Tensor hyper_proj_;  // context-width projection of the hyper features
  Tensor ctx_;         // accumulated context at the current scale grid
  Tensor psi_;         // entropy-parameter state of the last step

  int next_step_ = 1;
  StepTrace* trace_ = nullptr;
  // Ring-offset cache for the analytic predictor; a session is single-owner
  // so no locking is needed.
  mutable std::vector<std::vector<std::pair<int, int>>> rings_;
};

}  // namespace hpcm
