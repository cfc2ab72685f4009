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

// Self-checks for the brute-force references, plus golden-file maintenance:
// setting HPCM_REGEN_GOLDEN=1 rewrites testdata/ from the oracles.

#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>
#include <vector>

#include "hpcm/schedule.hpp"
#include "oracle/ar1_entropy.hpp"
#include "oracle/quadrature.hpp"
#include "oracle/schedule_check.hpp"

using namespace hpcm;

namespace {

std::string testdata_root() {
  const char* root = std::getenv("HPCM_TESTDATA");
  REQUIRE(root != nullptr);
  return root;
}

struct GridPoint {
  double x, alpha, cdf;
};

std::vector<GridPoint> golden_grid_points() {
  // 10 scales x 10 offsets (in units of alpha) around a zero mean.
  const double alphas[] = {0.05, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 60.0, 120.0};
  const double offsets[] = {-6.0, -3.0, -1.5, -0.75, -0.25, 0.25, 0.75, 1.5, 3.0, 6.0};
  std::vector<GridPoint> pts;
  for (double a : alphas)
    for (double t : offsets)
      pts.push_back({t * a, a, oracle::ggm_quadrature_cdf(t * a, 0.0, a, 1.5)});
  return pts;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  REQUIRE(f.good());
  f << text;
}

}  // namespace

TEST_CASE("golden files regenerate bit-identically from the oracles") {
  const std::string root = testdata_root();
  const bool regen = std::getenv("HPCM_REGEN_GOLDEN") != nullptr;

  std::string grid = "x,alpha,cdf\n";
  for (const GridPoint& p : golden_grid_points()) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", p.x, p.alpha, p.cdf);
    grid += buf;
  }
  const std::string dump = CodingSchedule(8, 8, 8, {2, 3, 6}).dump_csv();

  if (regen) {
    write_text(root + "/ggm_grid.csv", grid);
    write_text(root + "/schedule_8x8x8_default.csv", dump);
  }
  for (const auto& [name, want] :
       {std::pair<std::string, const std::string&>{"/ggm_grid.csv", grid},
        {"/schedule_8x8x8_default.csv", dump}}) {
    std::ifstream f(root + name, std::ios::binary);
    INFO("missing golden file " << name << " (set HPCM_REGEN_GOLDEN=1)");
    REQUIRE(f.good());
    std::string got((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
    REQUIRE(got == want);
  }
}

TEST_CASE("quadrature cdf basics") {
  REQUIRE(oracle::ggm_quadrature_cdf(0.0, 0.0, 1.0, 1.5) == 0.5);
  // beta = 2 is a Gaussian with sigma = alpha / sqrt(2).
  for (double x : {-3.0, -0.4, 0.3, 1.7, 6.0}) {
    const double want = 0.5 * (1.0 + std::erf(x / 1.3));
    REQUIRE(oracle::ggm_quadrature_cdf(x, 0.0, 1.3, 2.0) ==
            Catch::Approx(want).margin(1e-9));
  }
  // Far tails saturate cleanly.
  REQUIRE(oracle::ggm_quadrature_cdf(64.5, 0.0, 1e-3, 1.5) ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(oracle::ggm_quadrature_cdf(-64.5, 0.0, 1e-3, 1.5) ==
          Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("schedule checker accepts every supported build") {
  for (const Allocation& a : supported_allocations()) {
    const CodingSchedule s(16, 64, 64, a);
    REQUIRE(oracle::schedule_coverage_check(s).ok);
  }
}

TEST_CASE("ar1 conditional entropy: independence at rho 0") {
  const CodingSchedule s(8, 16, 16, {2, 3, 6});
  const oracle::Ar1EntropyConfig cfg{.rho = 0.0, .scale = 4.0, .fields = 8,
                                     .rng_seed = 42};
  const auto uncond = oracle::ar1_symbol_entropy(cfg);
  const auto cond = oracle::ar1_conditional_entropy(s, cfg);
  REQUIRE(std::fabs(cond.bits_per_symbol - uncond.bits_per_symbol) <=
          2.0 * std::max(cond.std_error, 1e-12) + 1e-9);
}

TEST_CASE("ar1 conditional entropy: strict gap at rho 0.9, monotone in rho") {
  const CodingSchedule s(8, 16, 16, {2, 3, 6});
  double prev_gap = -1.0;
  for (double rho : {0.5, 0.9, 0.99}) {
    const oracle::Ar1EntropyConfig cfg{.rho = rho, .scale = 4.0, .fields = 8,
                                       .rng_seed = 7};
    const auto uncond = oracle::ar1_symbol_entropy(cfg);
    const auto cond = oracle::ar1_conditional_entropy(s, cfg);
    const double gap = uncond.bits_per_symbol - cond.bits_per_symbol;
    if (rho == 0.9) REQUIRE(gap > 5.0 * cond.std_error);
    REQUIRE(gap > prev_gap);
    prev_gap = gap;
  }
}
