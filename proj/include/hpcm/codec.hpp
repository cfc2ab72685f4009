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
#include <optional>
#include <vector>

#include "hpcm/bitstream.hpp"
#include "hpcm/config.hpp"
#include "hpcm/context.hpp"
#include "hpcm/ggm.hpp"
#include "hpcm/range_coder.hpp"
#include "hpcm/schedule.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"

// End-to-end latent codec: schedule-driven stepwise encode/decode with the
// selected context backend, hyper segment handling, and rate accounting.

namespace hpcm {

struct SiteBits {
  int32_t channel = 0, row = 0, col = 0;
  double bits = 0.0;
};

// Optional per-session capture used by the CLI and the test suites.
struct SessionTrace {
  StepTrace params;                  // per-step (mu, alpha) in coding order
  std::vector<double> bits_per_step; // payload-byte deltas * 8 (encode side)
  std::vector<double> ce_per_step;   // sum of -log2 p_quantized per step
  std::vector<SiteBits> site_bits;   // encode side, coding order
  uint64_t bits_z = 0, bits_y = 0;
  double cross_entropy_bits = 0.0;
};

struct RateReport {
  uint64_t bits_z = 0, bits_y = 0;
  std::vector<double> bits_per_step;
  double cross_entropy_estimate_bits = 0.0;
  double bpp = 0.0;     // filled when image dimensions are known
  double mse = -1.0;    // toy transform round-trips only
  double lambda = 0.0;  // reporting knob, never optimized
};

inline RateReport rate_report(const Bitstream& stream,
                              const SessionTrace& trace) {
  RateReport r;
  r.bits_z = 8 * stream.z_segment.size();
  r.bits_y = 8 * stream.y_segment.size();
  r.bits_per_step = trace.bits_per_step;
  r.cross_entropy_estimate_bits = trace.cross_entropy_bits;
  return r;
}

namespace detail {

inline double log2_freq_bits(uint32_t freq) {
  return -std::log2(static_cast<double>(freq) / kCdfTotal);
}

// In-range values code directly; out-of-range ones code the escape symbol
// followed by the raw 16-bit value. Returns the quantized-table bits spent.
inline double encode_latent_symbol(RangeEncoder& enc, int32_t v,
                                   const QuantizedCdf& table) {
  if (v >= -kAlphabetBound && v <= kAlphabetBound) {
    const size_t idx = static_cast<size_t>(v + kAlphabetBound);
    const double bits = log2_freq_bits(table.freq(idx));
    enc.encode(idx, table);
    return bits;
  }
  const size_t esc = escape_symbol_index();
  const double bits = log2_freq_bits(table.freq(esc)) + 16.0;
  enc.encode(esc, table);
  encode_raw_u16(enc, static_cast<uint16_t>(static_cast<int16_t>(v)));
  return bits;
}

inline int32_t decode_latent_symbol(RangeDecoder& dec,
                                    const QuantizedCdf& table) {
  const size_t idx = dec.decode(table);
  if (idx == static_cast<size_t>(escape_symbol_index()))
    return static_cast<int16_t>(decode_raw_u16(dec));
  return static_cast<int32_t>(idx) - kAlphabetBound;
}

// Per-channel mean/std over the true grid, quantized to Q8.8 fixed point.
// Both sides code with the dequantized values, so the exact same entropy
// parameters are derived from the transmitted bytes.
struct StatsCodec {
  static std::vector<uint8_t> encode(const LatentTensor& y,
                                     std::vector<ChannelStats>* out) {
    std::vector<uint8_t> bytes;
    const size_t plane = static_cast<size_t>(y.height) * y.width;
    for (int c = 0; c < y.channels; ++c) {
      double sum = 0.0, sum_sq = 0.0;
      const int32_t* p = y.values.data() + static_cast<size_t>(c) * plane;
      for (size_t i = 0; i < plane; ++i) {
        sum += p[i];
        sum_sq += static_cast<double>(p[i]) * p[i];
      }
      const double mean = sum / static_cast<double>(plane);
      const double var = std::max(0.0, sum_sq / static_cast<double>(plane) -
                                           mean * mean);
      const double std_dev = std::sqrt(var);
      int64_t mean_q = std::llround(mean * 256.0);
      int64_t std_q = std::llround(std_dev * 256.0);
      mean_q = std::clamp<int64_t>(mean_q, INT32_MIN, INT32_MAX);
      std_q = std::clamp<int64_t>(std_q, 1, UINT32_MAX);
      put_u32(bytes, static_cast<uint32_t>(static_cast<int32_t>(mean_q)));
      put_u32(bytes, static_cast<uint32_t>(std_q));
      if (out)
        out->push_back({static_cast<double>(mean_q) / 256.0,
                        static_cast<double>(std_q) / 256.0});
    }
    return bytes;
  }

  static std::vector<ChannelStats> decode(const std::vector<uint8_t>& bytes,
                                          int channels) {
    if (bytes.size() != static_cast<size_t>(channels) * 8)
      throw CorruptBitstreamError("channel stats segment has wrong size");
    ByteReader r(bytes.data(), bytes.size());
    std::vector<ChannelStats> stats;
    stats.reserve(channels);
    for (int c = 0; c < channels; ++c) {
      const int32_t mean_q = static_cast<int32_t>(r.u32());
      const uint32_t std_q = r.u32();
      stats.push_back({static_cast<double>(mean_q) / 256.0,
                       static_cast<double>(std_q) / 256.0});
    }
    return stats;
  }
};

inline Tensor pad_latents(const LatentTensor& y, int hp, int wp) {
  Tensor out(y.channels, hp, wp);
  for (int c = 0; c < y.channels; ++c)
    for (int r = 0; r < y.height; ++r)
      for (int k = 0; k < y.width; ++k)
        out.at(c, r, k) = static_cast<double>(y.at(c, r, k));
  return out;
}

}  // namespace detail

inline Bitstream encode_latents(const LatentTensor& y, const CodecConfig& cfg,
                                SessionTrace* trace = nullptr) {
  cfg.validate();
  for (int32_t v : y.values)
    if (v > kSymbolLimit || v < -kSymbolLimit)
      throw DomainError("latent value outside the 16-bit signed range");
  const CodingSchedule schedule(y.channels, y.height, y.width, cfg.allocation);

  Bitstream bs;
  bs.header.channels = static_cast<uint32_t>(y.channels);
  bs.header.height = static_cast<uint32_t>(y.height);
  bs.header.width = static_cast<uint32_t>(y.width);
  bs.header.seed = cfg.seed;
  bs.header.allocation_code = allocation_code(cfg.allocation);
  bs.header.backend_code = backend_code(cfg.backend);

  std::optional<WeightStore> store;
  std::optional<HyperTransforms> hyper;
  std::optional<FactorizedPrior> prior;
  Tensor hyper_feat;
  std::vector<ChannelStats> stats;

  if (cfg.backend == Backend::kNeural) {
    store.emplace(cfg.seed);
    hyper.emplace(*store, y.channels, cfg.hyper_channels);
    prior.emplace(*store, cfg.hyper_channels);
    const Tensor y_pad = detail::pad_latents(y, schedule.padded_height(),
                                             schedule.padded_width());
    const LatentTensor z = hyper->analyze(y_pad);
    RangeEncoder zenc;
    for (int c = 0; c < z.channels; ++c) {
      const QuantizedCdf& table = prior->table(c);
      for (int r = 0; r < z.height; ++r)
        for (int k = 0; k < z.width; ++k)
          detail::encode_latent_symbol(zenc, z.at(c, r, k), table);
    }
    bs.z_segment = zenc.finalize();
    hyper_feat = hyper->synthesize(z);
  } else {
    bs.z_segment = detail::StatsCodec::encode(y, &stats);
  }

  ContextEngine engine(cfg, schedule,
                       store ? &*store : nullptr,
                       cfg.backend == Backend::kNeural ? &hyper_feat : nullptr,
                       cfg.backend == Backend::kNeural ? nullptr : &stats);
  if (trace) engine.set_trace(&trace->params);

  // Hyperprior-only parameters are constant per channel; cache the tables.
  std::vector<std::optional<QuantizedCdf>> channel_tables(
      cfg.backend == Backend::kHyperpriorOnly ? y.channels : 0);
  QuantizedCdf scratch_table;
  auto site_table = [&](int ch, const GgmParams& p) -> const QuantizedCdf& {
    if (!channel_tables.empty()) {
      if (!channel_tables[ch]) channel_tables[ch] = latent_cdf(p);
      return *channel_tables[ch];
    }
    scratch_table = latent_cdf(p);
    return scratch_table;
  };

  RangeEncoder yenc;
  double total_ce = 0.0;
  for (int step = 1; step <= schedule.total_steps(); ++step) {
    const std::vector<GgmParams> params = engine.step_params(step);
    std::vector<int32_t> symbols;
    symbols.reserve(params.size());
    const size_t bytes_before = yenc.bytes_pending();
    double step_ce = 0.0;
    size_t k = 0;
    const CodingStep& st = schedule.step(step);
    const int cpg = schedule.channels_per_group();
    for (int g = 0; g < kNumGroups; ++g)
      for (int ci = 0; ci < cpg; ++ci)
        for (const SpatialSite& site : st.sites[g]) {
          const int ch = g * cpg + ci;
          const int32_t v = y.at(ch, site.row, site.col);
          const QuantizedCdf& table = site_table(ch, params[k]);
          const double bits = detail::encode_latent_symbol(yenc, v, table);
          step_ce += bits;
          if (trace) trace->site_bits.push_back({ch, site.row, site.col, bits});
          symbols.push_back(v);
          ++k;
        }
    engine.commit_step(step, symbols);
    total_ce += step_ce;
    if (trace) {
      trace->ce_per_step.push_back(step_ce);
      trace->bits_per_step.push_back(
          8.0 * static_cast<double>(yenc.bytes_pending() - bytes_before));
    }
  }
  bs.y_segment = yenc.finalize();
  if (trace) {
    trace->bits_z = 8 * bs.z_segment.size();
    trace->bits_y = 8 * bs.y_segment.size();
    trace->cross_entropy_bits = total_ce;
  }
  return bs;
}

inline LatentTensor decode_latents(const Bitstream& bs, const CodecConfig& cfg,
                                   SessionTrace* trace = nullptr) {
  cfg.validate();
  if (bs.header.seed != cfg.seed)
    throw IncompatibleBitstreamError("stream seed does not match config");
  if (bs.header.allocation_code != allocation_code(cfg.allocation))
    throw IncompatibleBitstreamError("stream allocation does not match config");
  if (bs.header.backend_code != backend_code(cfg.backend))
    throw IncompatibleBitstreamError("stream backend does not match config");
  const int channels = static_cast<int>(bs.header.channels);
  const int height = static_cast<int>(bs.header.height);
  const int width = static_cast<int>(bs.header.width);
  if (channels <= 0 || height <= 0 || width <= 0 || channels % kNumGroups != 0)
    throw CorruptBitstreamError("bad latent dimensions in header");
  const CodingSchedule schedule(channels, height, width, cfg.allocation);

  std::optional<WeightStore> store;
  std::optional<HyperTransforms> hyper;
  std::optional<FactorizedPrior> prior;
  Tensor hyper_feat;
  std::vector<ChannelStats> stats;

  if (cfg.backend == Backend::kNeural) {
    store.emplace(cfg.seed);
    hyper.emplace(*store, channels, cfg.hyper_channels);
    prior.emplace(*store, cfg.hyper_channels);
    LatentTensor z(cfg.hyper_channels, schedule.padded_height() / 4,
                   schedule.padded_width() / 4);
    RangeDecoder zdec(bs.z_segment.data(), bs.z_segment.size());
    for (int c = 0; c < z.channels; ++c) {
      const QuantizedCdf& table = prior->table(c);
      for (int r = 0; r < z.height; ++r)
        for (int k = 0; k < z.width; ++k)
          z.at(c, r, k) = detail::decode_latent_symbol(zdec, table);
    }
    if (zdec.bytes_consumed() != bs.z_segment.size())
      throw CorruptBitstreamError("z segment has trailing bytes");
    hyper_feat = hyper->synthesize(z);
  } else {
    stats = detail::StatsCodec::decode(bs.z_segment, channels);
  }

  ContextEngine engine(cfg, schedule,
                       store ? &*store : nullptr,
                       cfg.backend == Backend::kNeural ? &hyper_feat : nullptr,
                       cfg.backend == Backend::kNeural ? nullptr : &stats);
  if (trace) engine.set_trace(&trace->params);

  std::vector<std::optional<QuantizedCdf>> channel_tables(
      cfg.backend == Backend::kHyperpriorOnly ? channels : 0);
  QuantizedCdf scratch_table;
  auto site_table = [&](int ch, const GgmParams& p) -> const QuantizedCdf& {
    if (!channel_tables.empty()) {
      if (!channel_tables[ch]) channel_tables[ch] = latent_cdf(p);
      return *channel_tables[ch];
    }
    scratch_table = latent_cdf(p);
    return scratch_table;
  };

  LatentTensor out(channels, height, width);
  RangeDecoder ydec(bs.y_segment.data(), bs.y_segment.size());
  for (int step = 1; step <= schedule.total_steps(); ++step) {
    const std::vector<GgmParams> params = engine.step_params(step);
    std::vector<int32_t> symbols;
    symbols.reserve(params.size());
    size_t k = 0;
    const CodingStep& st = schedule.step(step);
    const int cpg = schedule.channels_per_group();
    for (int g = 0; g < kNumGroups; ++g)
      for (int ci = 0; ci < cpg; ++ci)
        for (const SpatialSite& site : st.sites[g]) {
          const int ch = g * cpg + ci;
          const QuantizedCdf& table = site_table(ch, params[k]);
          const int32_t v = detail::decode_latent_symbol(ydec, table);
          out.at(ch, site.row, site.col) = v;
          symbols.push_back(v);
          ++k;
        }
    engine.commit_step(step, symbols);
  }
  if (ydec.bytes_consumed() != bs.y_segment.size())
    throw CorruptBitstreamError("y segment has trailing bytes");
  if (trace) {
    trace->bits_z = 8 * bs.z_segment.size();
    trace->bits_y = 8 * bs.y_segment.size();
  }
  return out;
}

}  // namespace hpcm
