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

#ifndef CTN_MIXTURES_H_
#define CTN_MIXTURES_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ctn/dataset.h"

namespace ctn {

struct MixOptions {
  int count = 100;
  int sources = 2;
  double snr_min_db = -5.0;
  double snr_max_db = 5.0;
  uint64_t seed = 0;
  int sample_rate = 8000;
};

// Subdirectories of `root` holding at least one .wav file, sorted. Each
// subdirectory stands for one speaker.
std::vector<std::string> ListSourcePools(const std::string& root);

// Writes `count` mixtures under `out_dir` (mix/, s1/, s2/, ... as float32
// WAV) plus `out_dir`/mixtures.tsv, and returns that manifest.
//
// Each mixture draws C distinct pools and one file from each, truncates
// them to the shortest, and scales source j >= 2 so that the power ratio
// of source 1 to source j is a uniform draw from [snr_min, snr_max] dB.
// If the sum would exceed 0.9 in magnitude, all sources are scaled down
// together. References are snapped to multiples of 2^-24 so that the
// written mixture is exactly their sample-wise sum in float32.
Manifest SynthesizeMixtures(const std::vector<std::string>& source_pools,
                            const std::string& out_dir, const MixOptions& options);

}  // namespace ctn

#endif  // CTN_MIXTURES_H_
