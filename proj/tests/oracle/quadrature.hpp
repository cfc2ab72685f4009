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

// Ground truth for the generalized Gaussian model: the CDF evaluated by
// adaptive numerical integration of the density. Shares nothing with the
// incomplete-gamma path it verifies (the normalizer uses std::tgamma).

#include <cmath>
#include <functional>
#include <vector>

namespace hpcm::oracle {

namespace qdetail {

inline double adaptive_simpson(const std::function<double(double)>& f,
                               double a, double m, double b, double fa,
                               double fm, double fb, double whole, double tol,
                               int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol,
                          depth - 1) +
         adaptive_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol,
                          depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, m, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace qdetail

inline double ggm_density(double x, double mu, double alpha, double beta) {
  const double norm = beta / (2.0 * alpha * std::tgamma(1.0 / beta));
  return norm * std::exp(-std::pow(std::fabs(x - mu) / alpha, beta));
}

// F(x) = 1/2 + sign(x - mu) * integral of the density over [mu, x], with
// the integral split into dyadic panels in units of alpha so the adaptive
// rule never misses the mass near the mode.
inline double ggm_quadrature_cdf(double x, double mu, double alpha,
                                 double beta, double tol = 1e-11) {
  const double dist = std::fabs(x - mu);
  if (dist == 0.0) return 0.5;
  const double sign = x > mu ? 1.0 : -1.0;
  auto f = [=](double u) { return ggm_density(mu + sign * u, mu, alpha, beta); };
  double acc = 0.0;
  double lo = 0.0;
  for (double edge = 0.5 * alpha; lo < dist; edge *= 2.0) {
    const double hi = std::min(dist, edge);
    if (hi > lo) acc += qdetail::integrate(f, lo, hi, tol);
    lo = hi;
    if (edge > dist) break;
  }
  if (lo < dist) acc += qdetail::integrate(f, lo, dist, tol);
  const double p = 0.5 + sign * acc;
  return std::min(1.0, std::max(0.0, p));
}

// Unit-bin symbol probability by direct integration (tails folded at the
// alphabet boundary).
inline double ggm_quadrature_bin(int symbol, double mu, double alpha,
                                 double beta, int bound, double tol = 1e-11) {
  if (symbol <= -bound) return ggm_quadrature_cdf(-bound + 0.5, mu, alpha, beta, tol);
  if (symbol >= bound)
    return 1.0 - ggm_quadrature_cdf(bound - 0.5, mu, alpha, beta, tol);
  return ggm_quadrature_cdf(symbol + 0.5, mu, alpha, beta, tol) -
         ggm_quadrature_cdf(symbol - 0.5, mu, alpha, beta, tol);
}

inline double entropy_bits(const std::vector<double>& pmf) {
  double h = 0.0;
  for (double p : pmf)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

inline double kl_bits(const std::vector<double>& p,
                      const std::vector<double>& q) {
  double kl = 0.0;
  for (size_t i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) kl += p[i] * std::log2(p[i] / q[i]);
  return kl;
}

}  // namespace hpcm::oracle
