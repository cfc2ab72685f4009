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

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "hpcm/gen.hpp"
#include "hpcm/nn.hpp"
#include "hpcm/tensor.hpp"
#include "hpcm/weights.hpp"
#include "oracle/naive_nn.hpp"

using namespace hpcm;

namespace {

WeightTensor make_wt(std::vector<uint32_t> dims, std::vector<double> vals) {
  WeightTensor t;
  t.dims = std::move(dims);
  t.values = std::move(vals);
  return t;
}

Tensor random_tensor(int c, int h, int w, uint64_t seed, double amp = 1.0) {
  Tensor t(c, h, w);
  FieldRng rng(seed);
  for (auto& v : t.values()) v = amp * (2.0 * rng.unit() - 1.0);
  return t;
}

}  // namespace

TEST_CASE("conv1x1 identity weights pass input through") {
  const Tensor in = random_tensor(3, 5, 7, 11);
  std::vector<double> eye(9, 0.0);
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  const WeightTensor w = make_wt({3, 3}, eye);
  const WeightTensor b = make_wt({3}, {0.0, 0.0, 0.0});
  const Tensor out = conv1x1(in, w, b);
  REQUIRE(out.values() == in.values());
}

TEST_CASE("conv1x1 hand example") {
  // all-ones (2,1,1) input, W=[[1,1],[2,2]], b=[0,1] -> [[2],[5]]
  Tensor in(2, 1, 1);
  in.at(0, 0, 0) = 1.0;
  in.at(1, 0, 0) = 1.0;
  const WeightTensor w = make_wt({2, 2}, {1, 1, 2, 2});
  const WeightTensor b = make_wt({2}, {0, 1});
  const Tensor out = conv1x1(in, w, b);
  REQUIRE(out.at(0, 0, 0) == Catch::Approx(2.0));
  REQUIRE(out.at(1, 0, 0) == Catch::Approx(5.0));
}

TEST_CASE("conv1x1 rejects channel mismatch") {
  const Tensor in = random_tensor(3, 2, 2, 5);
  const WeightTensor w = make_wt({2, 4}, std::vector<double>(8, 0.0));
  const WeightTensor b = make_wt({2}, {0, 0});
  REQUIRE_THROWS_AS(conv1x1(in, w, b), ShapeError);
}

TEST_CASE("conv1x1 matches naive reference on random input") {
  WeightStore store(77);
  const auto& w = store.weight("t.w", {6, 8});
  const auto& b = store.bias("t.b", 6);
  const Tensor in = random_tensor(8, 4, 4, 3);
  const Tensor fast = conv1x1(in, w, b);
  const Tensor ref = oracle::naive_conv1x1(in, w, b);
  REQUIRE(oracle::max_rel_error(fast, ref) < 1e-6);
}

TEST_CASE("depthwise_conv3x3 delta kernel is identity") {
  WeightTensor k = make_wt({2, 3, 3}, std::vector<double>(18, 0.0));
  k.values[4] = 1.0;   // center of channel 0
  k.values[13] = 1.0;  // center of channel 1
  const WeightTensor b = make_wt({2}, {0, 0});
  const Tensor in = random_tensor(2, 6, 5, 21);
  const Tensor out = depthwise_conv3x3(in, k, b);
  REQUIRE(out.values() == in.values());
}

TEST_CASE("depthwise_conv3x3 all-ones kernel on one-hot center") {
  const WeightTensor k = make_wt({1, 3, 3}, std::vector<double>(9, 1.0));
  const WeightTensor b = make_wt({1}, {0});
  Tensor in(1, 3, 3);
  in.at(0, 1, 1) = 1.0;
  const Tensor out = depthwise_conv3x3(in, k, b);
  for (double v : out.values()) REQUIRE(v == Catch::Approx(1.0));
}

TEST_CASE("depthwise_conv3x3 matches naive reference") {
  WeightStore store(78);
  const auto& k = store.weight("dw.k", {4, 3, 3});
  const auto& b = store.bias("dw.b", 4);
  const Tensor in = random_tensor(4, 8, 8, 9);
  REQUIRE(oracle::max_rel_error(depthwise_conv3x3(in, k, b),
                                oracle::naive_depthwise3x3(in, k, b)) < 1e-6);
}

TEST_CASE("linear identity and hand example") {
  const Tensor in = random_tensor(1, 4, 3, 2);
  std::vector<double> eye(9, 0.0);
  for (int i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
  REQUIRE(linear(in, make_wt({3, 3}, eye), make_wt({3}, {0, 0, 0})).values() ==
          in.values());

  Tensor tok(1, 1, 2);
  tok.at(0, 0, 0) = 1.0;
  tok.at(0, 0, 1) = 2.0;
  // rows are output dims: W = [[1,0],[0,1],[1,1]]
  const Tensor out = linear(tok, make_wt({3, 2}, {1, 0, 0, 1, 1, 1}),
                            make_wt({3}, {0, 0, 0}));
  REQUIRE(out.at(0, 0, 0) == Catch::Approx(1.0));
  REQUIRE(out.at(0, 0, 1) == Catch::Approx(2.0));
  REQUIRE(out.at(0, 0, 2) == Catch::Approx(3.0));
}

TEST_CASE("linear matches naive matmul on random tokens") {
  WeightStore store(79);
  const auto& w = store.weight("lin.w", {5, 8});
  const auto& b = store.bias("lin.b", 5);
  const Tensor tok = random_tensor(1, 16, 8, 13);
  REQUIRE(oracle::max_rel_error(linear(tok, w, b),
                                oracle::naive_linear(tok, w, b)) < 1e-6);
}

TEST_CASE("softmax_rows equal values and analytic case") {
  Tensor row(1, 1, 5);
  for (int i = 0; i < 5; ++i) row.at(0, 0, i) = 2.5;
  const Tensor s = softmax_rows(row);
  for (int i = 0; i < 5; ++i) REQUIRE(s.at(0, 0, i) == Catch::Approx(0.2));

  Tensor two(1, 1, 2);
  two.at(0, 0, 0) = 0.0;
  two.at(0, 0, 1) = std::log(3.0);
  const Tensor s2 = softmax_rows(two);
  REQUIRE(s2.at(0, 0, 0) == Catch::Approx(0.25).epsilon(1e-9));
  REQUIRE(s2.at(0, 0, 1) == Catch::Approx(0.75).epsilon(1e-9));
}

TEST_CASE("softmax_rows rows sum to one on random matrices") {
  const Tensor m = random_tensor(1, 32, 32, 55, 30.0);
  const Tensor s = softmax_rows(m);
  for (int r = 0; r < 32; ++r) {
    double sum = 0.0;
    for (int c = 0; c < 32; ++c) {
      REQUIRE(s.at(0, r, c) >= 0.0);
      sum += s.at(0, r, c);
    }
    REQUIRE(sum == Catch::Approx(1.0).margin(1e-6));
  }
}

TEST_CASE("window partition round-trip is exact") {
  SECTION("full-extent window gives a single group") {
    const Tensor t = random_tensor(3, 4, 4, 91);
    const Tensor tok = window_partition(t, 4);
    REQUIRE(tok.channels() == 1);
    REQUIRE(tok.height() == 16);
    REQUIRE(tok.width() == 3);
    REQUIRE(window_merge(tok, 4, 4, 4).values() == t.values());
  }
  SECTION("(1,4,4) with window 2 gives 4 groups of 4 tokens") {
    const Tensor t = random_tensor(1, 4, 4, 92);
    const Tensor tok = window_partition(t, 2);
    REQUIRE(tok.channels() == 4);
    REQUIRE(tok.height() == 4);
    REQUIRE(window_merge(tok, 2, 4, 4).values() == t.values());
  }
  SECTION("random (8,16,16), window 8 merges bit-identically") {
    const Tensor t = random_tensor(8, 16, 16, 93);
    REQUIRE(window_merge(window_partition(t, 8), 8, 16, 16).values() ==
            t.values());
  }
}

TEST_CASE("forward ops are deterministic and finite") {
  WeightStore s1(1234), s2(1234);
  const auto& w1 = s1.weight("a.w", {16, 16});
  const auto& w2 = s2.weight("a.w", {16, 16});
  REQUIRE(w1.values == w2.values);
  const Tensor in = random_tensor(16, 6, 6, 3, 10.0);
  const Tensor o1 = conv1x1(in, w1, s1.bias("a.b", 16));
  const Tensor o2 = conv1x1(in, w2, s2.bias("a.b", 16));
  REQUIRE(o1.values() == o2.values());
  REQUIRE(o1.all_finite());
}

TEST_CASE("DepthConvBlock matches naive reference and keeps shape") {
  WeightStore store(4242);
  const DepthConvBlock blk(store, "blk0", 12);
  const Tensor in = random_tensor(12, 5, 6, 77);
  const Tensor out = blk.forward(in);
  REQUIRE(out.same_shape(in));
  const Tensor ref = oracle::naive_depth_conv_block(store, "blk0", 12, in);
  REQUIRE(oracle::max_rel_error(out, ref) < 1e-6);
}
