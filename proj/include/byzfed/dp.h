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

// Noise calibration for the Gaussian mechanism under Renyi DP, and the
// conversion from an (epsilon, delta)-DP target.

#ifndef BYZFED_DP_H_
#define BYZFED_DP_H_

#include <cstdint>
#include <span>
#include <vector>

#include "byzfed/rng.h"

namespace byzfed {

// ceil(tau_max * rho / k) + delta_max: the most rounds any client can be
// included in when inclusion is debiased.
uint64_t InclusionBound(uint64_t tau_max, uint64_t rho, uint64_t k, uint64_t delta_max);

// sigma^2 = T * C^2 * alpha / (2 * epsilon). The numerator is formed first,
// so for inputs whose product is representable the result is the correctly
// rounded quotient. Throws kBadParams on non-positive inputs or alpha <= 1.
double CalibrateSigma2(double T, double C, double alpha, double epsilon);

// Inverse of CalibrateSigma2.
double RdpEpsilon(double alpha, double T, double sigma2, double C);

// epsilon_rdp(alpha) + log(1/delta) / (alpha - 1).
double DpEpsilon(double alpha, double T, double sigma2, double C, double delta);

// 1.25, 1.5, ..., 64 followed by 65, 66, ..., 256.
const std::vector<double>& AlphaGrid();

struct DpCalibration {
  double alpha = 0;
  double sigma2 = 0;
  double epsilon_rdp = 0;
};

// Smallest sigma^2 over the grid such that DpEpsilon(alpha*, ...) <= target.
// Throws kInfeasible if no grid order admits the target, kBadParams on bad
// inputs.
DpCalibration DpFromRdp(double target_epsilon, double delta, double T, double C);

struct DpConfig {
  double epsilon_max = 1.0;  // RDP budget at order alpha
  double alpha = 2.0;
  double C = 1.0;
  uint64_t T = 1;
  uint64_t rho = 1;
  double sigma2 = 0.0;
  double delta = 1e-5;
  uint64_t tau_max = 1;
  uint64_t delta_max_inclusion = 0;
};

// g / max(1, ||g|| / C). Throws kBadParams if C <= 0.
std::vector<double> Clip(std::span<const double> g, double C);
double L2Norm(std::span<const double> v);

// dim i.i.d. N(0, sigma2 / rho) draws. Coordinates beyond `clamp` in
// absolute value are redrawn, keeping the result inside the codec range.
std::vector<double> DrawNoise(double sigma2, uint64_t rho, size_t dim, ChaChaRng& rng,
                              double clamp = 1e300);

}  // namespace byzfed

#endif  // BYZFED_DP_H_
