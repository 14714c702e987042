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

#ifndef CTN_MASKS_H_
#define CTN_MASKS_H_

#include <string>
#include <vector>

#include "ctn/stft.h"

namespace ctn {

// Ideal time-frequency masks computed from the clean sources.
enum class IdealMaskKind { kIbm, kIrm, kWfm };

std::string ToString(IdealMaskKind kind);
// "ibm", "irm" or "wfm" (case-insensitive); ConfigError otherwise.
IdealMaskKind ParseIdealMaskKind(const std::string& name);

struct IdealMaskResult {
  int64_t num_frames = 0;
  int num_bins = 0;
  // Per source, frame-major [num_frames x num_bins].
  std::vector<std::vector<double>> masks;
  // Per source: istft(mask * stft(sum of sources)), mixture phase.
  std::vector<std::vector<double>> separated;
};

// IBM: 1 where the source has the strictly largest magnitude (ties go to
// the lower source index, so exactly one source owns each bin).
// IRM: |S_i| / sum_j |S_j|.  WFM: |S_i|^2 / sum_j |S_j|^2.
// Bins where every source is silent split evenly (IRM/WFM) or go to
// source 0 (IBM). All-zero input or unequal lengths raise DataError.
IdealMaskResult ApplyIdealMask(IdealMaskKind kind,
                               const std::vector<std::vector<double>>& sources,
                               const StftConfig& config = {});

// Checks the per-bin structure of `result`: IRM/WFM masks sum to one
// within `tol`; IBM masks are 0/1 with exactly one 1 per bin. On failure
// returns false and describes the first offending bin in `why`.
bool CheckMaskInvariants(IdealMaskKind kind, const IdealMaskResult& result,
                         double tol = 1e-12, std::string* why = nullptr);

}  // namespace ctn

#endif  // CTN_MASKS_H_
