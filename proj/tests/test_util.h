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

#ifndef CTN_TESTS_TEST_UTIL_H_
#define CTN_TESTS_TEST_UTIL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ctn/dataset.h"
#include "ctn/model.h"
#include "ctn/tensor.h"

namespace ctn::testing {

// Uniform values in [lo, hi).
Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double lo = -1.0,
                    double hi = 1.0);
std::vector<double> RandomVector(size_t n, std::mt19937_64& rng, double lo = -1.0,
                                 double hi = 1.0);

struct GradCheckResult {
  double max_rel_error = 0.0;     // worst single input
  std::string worst;              // "input <k>"
  double pooled_rel_error = 0.0;  // all checked elements as one vector
  int64_t checked = 0;
  int64_t skipped_kinks = 0;
};

// Compares reverse-mode gradients of the scalar `f` with central
// differences of step `step` for every element of every input. The error
// of one input is |g_analytic - g_numeric|_2 / max(|g_analytic|_2,
// |g_numeric|_2, 1e-12). With `max_elements` > 0 only that many evenly
// spaced elements of each input are compared.
//
// Central differences are meaningless across a kink, so an element is
// skipped (and counted) when the PReLU/ReLU activation pattern, or the
// optional discrete `signature` (e.g. a chosen permutation), differs
// between the -step, 0 and +step evaluations.
GradCheckResult GradCheck(const std::function<Tensor()>& f,
                          const std::vector<Tensor>& inputs, double step = 1e-3,
                          int64_t max_elements = 0,
                          const std::function<std::vector<int>()>& signature = {});

// A small model configuration used by fast tests.
ModelConfig MicroConfig(bool causal = false);

// A voiced, speech-like test signal: a few decaying harmonics on a
// gliding pitch, gated by a syllable-rate envelope, plus a little noise.
std::vector<double> SyntheticVoice(std::mt19937_64& rng, int64_t samples,
                                   int sample_rate = 8000);

// Creates `speakers` subdirectories under `root` with `files` float32 WAVs
// of `seconds` each. Each speaker keeps its own pitch range.
void WriteSyntheticPools(const std::string& root, int speakers, int files,
                         double seconds, uint64_t seed);

std::string ReadFile(const std::string& path);

// A fresh, empty directory under the system temp path.
std::string MakeTempDir(const std::string& tag);

}  // namespace ctn::testing

#endif  // CTN_TESTS_TEST_UTIL_H_
