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

#ifndef CTN_METRICS_H_
#define CTN_METRICS_H_

#include <span>
#include <string>
#include <vector>

#include "ctn/audio.h"

namespace ctn {

// Simplified SDR in dB: 10 log10(|s|^2 / |s_hat - s|^2) on zero-meaned
// signals, without any allowed-distortion filtering. It is not comparable
// with BSS-eval SDR figures. Capped at the same +60 dB as SI-SNR.
double SimpleSdr(std::span<const double> estimate,
                 std::span<const double> reference);

struct SeparationScore {
  std::vector<int> perm;                  // estimate i -> reference perm[i]
  std::vector<double> si_snr;             // per estimate, under perm
  std::vector<double> si_snr_mixture;     // mixture vs reference perm[i]
  std::vector<double> sdr;
  std::vector<double> sdr_mixture;
  double si_snri = 0.0;                   // mean improvement over sources
  double sdri = 0.0;
};

// Scores C estimates against C references, choosing the permutation by
// SI-SNR and using it for both metrics. Improvements are relative to the
// unprocessed mixture. All signals must share one length (DataError).
SeparationScore ScoreSeparation(std::span<const double> mixture,
                                const std::vector<std::vector<double>>& references,
                                const std::vector<std::vector<double>>& estimates);

}  // namespace ctn

#endif  // CTN_METRICS_H_
