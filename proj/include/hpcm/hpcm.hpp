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

#include "hpcm/bitstream.hpp"
#include "hpcm/codec.hpp"
#include "hpcm/config.hpp"
#include "hpcm/context.hpp"
#include "hpcm/errors.hpp"
#include "hpcm/gen.hpp"
#include "hpcm/ggm.hpp"
#include "hpcm/nn.hpp"
#include "hpcm/range_coder.hpp"
#include "hpcm/schedule.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/tensor_io.hpp"
#include "hpcm/toy_transform.hpp"
#include "hpcm/weights.hpp"
