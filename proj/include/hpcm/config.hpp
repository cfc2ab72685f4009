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
#include <string>

#include "hpcm/errors.hpp"
#include "hpcm/schedule.hpp"

namespace hpcm {

// Entropy-parameter predictor. Encoder and decoder must agree; the code is
// carried in the bitstream header.
enum class Backend : uint8_t {
  kHyperpriorOnly = 0,  // per-channel stats only, context-free
  kAnalytic = 1,        // nearest-coded-neighbor linear predictor
  kNeural = 2,          // context networks + progressive fusion
};

inline uint8_t backend_code(Backend b) { return static_cast<uint8_t>(b); }

inline Backend backend_from_code(uint8_t code) {
  if (code > 2) throw CorruptBitstreamError("bad backend code");
  return static_cast<Backend>(code);
}

inline const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kHyperpriorOnly: return "hyper";
    case Backend::kAnalytic: return "analytic";
    default: return "neural";
  }
}

inline Backend backend_from_name(const std::string& s) {
  if (s == "hyper" || s == "hyperprior-only" || s == "hyperprior_only")
    return Backend::kHyperpriorOnly;
  if (s == "analytic" || s == "analytic_linear") return Backend::kAnalytic;
  if (s == "neural") return Backend::kNeural;
  throw ConfigError("unknown backend '" + s + "'");
}

// Depth preset for the two entropy-parameter networks (DepthConvBlock
// counts per stage).
enum class ModelSize { kBase, kLarge };

struct EpDepths {
  int n1 = 0, n2 = 0;
};

inline EpDepths coarse_net_depths(ModelSize m) {
  return m == ModelSize::kBase ? EpDepths{2, 1} : EpDepths{2, 2};
}
inline EpDepths fine_net_depths(ModelSize m) {
  return m == ModelSize::kBase ? EpDepths{3, 2} : EpDepths{4, 3};
}

struct CodecConfig {
  uint64_t seed = 1;
  Allocation allocation{2, 3, 6};
  Backend backend = Backend::kAnalytic;
  ModelSize model = ModelSize::kBase;

  // Desk-scale feature widths (the schedule and formats do not depend on
  // them, but encoder and decoder must use the same values).
  int context_width = 64;   // channels of the accumulated context
  int ep_width = 64;        // internal width of the entropy parameter nets
  int attention_dim = 32;   // d_k of the fusion cross-attention
  int window = 4;           // attention window (on the scale grid)
  int hyper_channels = 32;  // toy hyper path width

  // Analytic predictor constants (frozen; part of the backend-1 contract).
  int knn = 4;               // nearest coded neighbors averaged into mu
  double shrink = 0.8;       // alpha multiplier per close coded neighbor
  int shrink_cap = 6;        // cap on counted neighbors within radius 2
  int neighbor_radius = 2;   // radius for the shrink count

  void validate() const {
    allocation_code(allocation);
    if (window < 1) throw ConfigError("window must be >= 1");
    if (context_width < 1 || ep_width < 1 || attention_dim < 1 ||
        hyper_channels < 1)
      throw ConfigError("feature widths must be positive");
    if (knn < 1 || shrink <= 0.0 || shrink > 1.0 || shrink_cap < 0)
      throw ConfigError("bad analytic predictor constants");
  }
};

}  // namespace hpcm
