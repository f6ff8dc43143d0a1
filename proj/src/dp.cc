/*
 * Copyright 2026 The byzfed Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "byzfed/dp.h"

#include <cmath>
#include <limits>
#include <string>

#include "byzfed/error.h"

namespace byzfed {

uint64_t InclusionBound(uint64_t tau_max, uint64_t rho, uint64_t k, uint64_t delta_max) {
  if (k == 0) throw Error(ErrorCode::kBadParams, "k must be positive");
  return (tau_max * rho + k - 1) / k + delta_max;
}

double CalibrateSigma2(double T, double C, double alpha, double epsilon) {
  if (!(T > 0) || !(C > 0) || !(epsilon > 0) || !(alpha > 1)) {
    throw Error(ErrorCode::kBadParams, "calibration needs T, C, epsilon > 0 and alpha > 1");
  }
  return (T * C * C * alpha) / (2 * epsilon);
}

double RdpEpsilon(double alpha, double T, double sigma2, double C) {
  if (!(sigma2 > 0) || !(alpha > 1)) {
    throw Error(ErrorCode::kBadParams, "need sigma2 > 0 and alpha > 1");
  }
  return (T * C * C * alpha) / (2 * sigma2);
}

double DpEpsilon(double alpha, double T, double sigma2, double C, double delta) {
  return RdpEpsilon(alpha, T, sigma2, C) + std::log(1.0 / delta) / (alpha - 1.0);
}

const std::vector<double>& AlphaGrid() {
  static const std::vector<double> grid = [] {
    std::vector<double> g;
    for (int i = 5; i <= 256; ++i) g.push_back(i * 0.25);  // 1.25 .. 64
    for (int a = 65; a <= 256; ++a) g.push_back(a);
    return g;
  }();
  return grid;
}

DpCalibration DpFromRdp(double target_epsilon, double delta, double T, double C) {
  if (!(target_epsilon > 0) || !(delta > 0) || !(delta < 1) || !(T > 0) || !(C > 0)) {
    throw Error(ErrorCode::kBadParams, "need epsilon > 0, 0 < delta < 1, T > 0, C > 0");
  }
  DpCalibration best;
  best.sigma2 = std::numeric_limits<double>::infinity();
  for (double alpha : AlphaGrid()) {
    double eps_rdp = target_epsilon - std::log(1.0 / delta) / (alpha - 1.0);
    if (!(eps_rdp > 0)) continue;
    double sigma2 = CalibrateSigma2(T, C, alpha, eps_rdp);
    // Guard against rounding in the forward direction.
    while (DpEpsilon(alpha, T, sigma2, C, delta) > target_epsilon) {
      sigma2 = std::nextafter(sigma2, std::numeric_limits<double>::infinity());
    }
    if (sigma2 < best.sigma2) best = {alpha, sigma2, RdpEpsilon(alpha, T, sigma2, C)};
  }
  if (!std::isfinite(best.sigma2)) {
    throw Error(ErrorCode::kInfeasible,
                "no order on the grid reaches epsilon=" + std::to_string(target_epsilon));
  }
  return best;
}

double L2Norm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> Clip(std::span<const double> g, double C) {
  if (!(C > 0)) throw Error(ErrorCode::kBadParams, "clipping norm must be positive");
  double scale = std::max(1.0, L2Norm(g) / C);
  std::vector<double> out(g.begin(), g.end());
  if (scale > 1.0) {
    for (double& x : out) x /= scale;
  }
  return out;
}

std::vector<double> DrawNoise(double sigma2, uint64_t rho, size_t dim, ChaChaRng& rng,
                              double clamp) {
  if (sigma2 < 0 || rho == 0) throw Error(ErrorCode::kBadParams, "noise parameters");
  std::vector<double> out(dim, 0.0);
  if (sigma2 == 0) return out;
  const double sd = std::sqrt(sigma2 / static_cast<double>(rho));
  for (double& x : out) {
    do {
      x = sd * StandardNormal(rng);
    } while (std::fabs(x) > clamp);
  }
  return out;
}

}  // namespace byzfed
