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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "hpcm/errors.hpp"

// Generalized Gaussian entropy model with shape beta = 1.5:
//   density  p(x) ~ exp(-(|x - mu| / alpha)^beta)
//   CDF      F(x) = 1/2 + sign(x - mu) * P(1/beta, (|x - mu|/alpha)^beta) / 2
// where P is the regularized lower incomplete gamma function. Symbol
// probabilities are unit-bin integrals of the density, quantized to 16-bit
// cumulative-frequency tables for the range coder. A beta = 2 (Gaussian)
// mode exists for numeric cross-checks only.

namespace hpcm {

inline constexpr double kGgmBeta = 1.5;
inline constexpr double kAlphaMin = 1e-3;
inline constexpr double kAlphaMax = 1e3;
inline constexpr int kAlphabetBound = 64;    // symbols in [-64, 64]
inline constexpr uint32_t kCdfTotal = 1u << 16;

namespace detail {

// Gamma(1/beta) for the two supported shapes, precomputed so the fast path
// never calls tgamma.
inline double gamma_of_inv_beta(double beta) {
  if (beta == 1.5) return 1.3541179394264004169;  // Gamma(2/3)
  if (beta == 2.0) return 1.7724538509055160273;  // Gamma(1/2) = sqrt(pi)
  return std::tgamma(1.0 / beta);
}

// Regularized lower incomplete gamma P(a, x): series for x < a + 1,
// continued fraction (modified Lentz) above. Absolute tolerance 1e-15.
inline double regularized_gamma_p(double a, double x, double gamma_a) {
  if (x <= 0.0) return 0.0;
  const double log_prefix = a * std::log(x) - x;
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return std::min(1.0, sum * std::exp(log_prefix) / gamma_a);
  }
  // Continued fraction for Q(a, x) = 1 - P(a, x).
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(log_prefix) * h / gamma_a;
  return std::max(0.0, 1.0 - q);
}

// |t|^beta without pow() for the supported shapes.
inline double pow_beta(double t, double beta) {
  if (beta == 1.5) return t * std::sqrt(t);
  if (beta == 2.0) return t * t;
  return std::pow(t, beta);
}

}  // namespace detail

// Continuous GGM CDF. F(mu) = 1/2 exactly; monotone in x.
inline double ggm_cdf(double x, double mu, double alpha,
                      double beta = kGgmBeta) {
  if (!std::isfinite(x) || !std::isfinite(mu) || !std::isfinite(alpha))
    throw DomainError("ggm_cdf: non-finite input");
  if (alpha <= 0.0) throw DomainError("ggm_cdf: alpha must be positive");
  const double t = std::fabs(x - mu) / alpha;
  if (t == 0.0) return 0.5;
  const double p = detail::regularized_gamma_p(
      1.0 / beta, detail::pow_beta(t, beta), detail::gamma_of_inv_beta(beta));
  return x > mu ? 0.5 + 0.5 * p : 0.5 - 0.5 * p;
}

// Per-element entropy parameters. alpha is clamped into [kAlphaMin,
// kAlphaMax]; beta is the module constant and never stored per element.
struct GgmParams {
  double mu = 0.0;
  double alpha = 1.0;

  static GgmParams clamped(double mu, double alpha) {
    return {mu, std::clamp(alpha, kAlphaMin, kAlphaMax)};
  }
};

// p(k) = F(k + 1/2) - F(k - 1/2) for k in [-bound, bound], with the two
// tails folded into the boundary symbols.
inline std::vector<double> discretize_pmf(const GgmParams& params,
                                          int bound = kAlphabetBound,
                                          double beta = kGgmBeta) {
  if (bound < 1) throw DomainError("discretize_pmf: bound must be >= 1");
  const int n = 2 * bound + 1;
  std::vector<double> pmf(n);
  double prev = 0.0;  // F(-bound - 1/2) folded to 0 (tail into symbol -bound)
  for (int k = -bound; k < bound; ++k) {
    const double hi = ggm_cdf(k + 0.5, params.mu, params.alpha, beta);
    pmf[k + bound] = std::max(0.0, hi - prev);
    prev = hi;
  }
  pmf[n - 1] = std::max(0.0, 1.0 - prev);  // upper tail into symbol +bound
  return pmf;
}

// 16-bit cumulative frequency table over an alphabet of symbol indices.
// cum_freq has size() + 1 entries, strictly increasing, ending at 2^16:
// every symbol keeps a nonzero frequency no matter how small its
// probability.
struct QuantizedCdf {
  std::vector<uint32_t> cum_freq;

  size_t size() const { return cum_freq.empty() ? 0 : cum_freq.size() - 1; }
  uint32_t lo(size_t symbol) const { return cum_freq[symbol]; }
  uint32_t hi(size_t symbol) const { return cum_freq[symbol + 1]; }
  uint32_t freq(size_t symbol) const { return hi(symbol) - lo(symbol); }
};

// Deterministic largest-remainder quantization: each symbol gets
// floor(p * (total - n)) + 1, and the leftover mass goes to the largest
// remainders (ties to the lower index).
inline QuantizedCdf quantize_cdf(const std::vector<double>& pmf) {
  const size_t n = pmf.size();
  if (n == 0 || n > kCdfTotal)
    throw DomainError("quantize_cdf: alphabet size unsupported");
  double sum = 0.0;
  for (double p : pmf) {
    if (!(p >= 0.0)) throw DomainError("quantize_cdf: negative probability");
    sum += p;
  }
  if (std::fabs(sum - 1.0) > 1e-6)
    throw DomainError("quantize_cdf: pmf does not sum to 1");

  const double budget = static_cast<double>(kCdfTotal - n);
  std::vector<uint32_t> freq(n);
  std::vector<double> remainder(n);
  uint64_t assigned = 0;
  for (size_t i = 0; i < n; ++i) {
    const double share = pmf[i] / sum * budget;
    const double fl = std::floor(share);
    freq[i] = static_cast<uint32_t>(fl) + 1;
    remainder[i] = share - fl;
    assigned += freq[i];
  }
  uint64_t leftover = kCdfTotal - assigned;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return remainder[a] > remainder[b];
  });
  for (uint64_t i = 0; i < leftover; ++i) freq[order[i % n]] += 1;

  QuantizedCdf cdf;
  cdf.cum_freq.resize(n + 1);
  cdf.cum_freq[0] = 0;
  for (size_t i = 0; i < n; ++i) cdf.cum_freq[i + 1] = cdf.cum_freq[i] + freq[i];
  return cdf;
}

// Symbol table for latent values: indices 0..2*bound map to values
// -bound..+bound, index 2*bound+1 is the escape symbol (value coded as raw
// 16-bit two's complement afterwards). The escape gets a floor probability
// only; in-range symbols keep the folded-tail pmf.
inline QuantizedCdf latent_cdf(const GgmParams& params,
                               int bound = kAlphabetBound,
                               double beta = kGgmBeta) {
  std::vector<double> pmf = discretize_pmf(params, bound, beta);
  pmf.push_back(0.0);  // escape; quantize_cdf floors it to frequency >= 1
  return quantize_cdf(pmf);
}

inline constexpr int escape_symbol_index(int bound = kAlphabetBound) {
  return 2 * bound + 1;
}

// Mean code length in bits of the dequantized table under its own pmf.
inline double table_entropy_bits(const QuantizedCdf& cdf) {
  double h = 0.0;
  for (size_t s = 0; s < cdf.size(); ++s) {
    const double p = static_cast<double>(cdf.freq(s)) / kCdfTotal;
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

}  // namespace hpcm
