// Copyright 2026 The ctn Authors. All Rights Reserved.
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

#ifndef CTN_OBJECTIVE_H_
#define CTN_OBJECTIVE_H_

#include <span>
#include <vector>

#include "ctn/tensor.h"

namespace ctn {

// SI-SNR values are clamped to [-cap, +cap] dB so that perfect (or wholly
// wrong) estimates yield a finite loss; `kSiSnrTiny` guards the
// noise-power denominator.
inline constexpr double kSiSnrCapDb = 60.0;
inline constexpr double kSiSnrTiny = 1e-10;
inline constexpr int kMaxPitSources = 4;

// Scale-invariant SNR in dB of `estimate` against `reference`, both
// zero-meaned first. Requires equal lengths >= 2 and a reference with
// non-zero power (DataError otherwise).
double SiSnr(std::span<const double> estimate, std::span<const double> reference);

// Differentiable SI-SNR (scalar tensor). The gradient flows to `estimate`;
// `reference` is treated as a constant. Zero gradient once clamped.
Tensor SiSnrOp(const Tensor& estimate, const Tensor& reference);

struct Assignment {
  std::vector<int> perm;      // estimate i is matched to reference perm[i]
  double mean_si_snr = 0.0;   // mean over sources under `perm`
};

// Best assignment for a C x C score matrix (scores[i][j]: estimate i vs
// reference j). Ties go to the lexicographically smallest permutation.
Assignment BestAssignment(const std::vector<std::vector<double>>& scores);

struct PitLoss {
  Tensor loss;                // -mean SI-SNR under the best permutation
  Assignment assignment;
};

// Utterance-level permutation invariant loss over C <= 4 sources.
PitLoss UpitLoss(const std::vector<Tensor>& estimates,
                 const std::vector<Tensor>& references);

}  // namespace ctn

#endif  // CTN_OBJECTIVE_H_
