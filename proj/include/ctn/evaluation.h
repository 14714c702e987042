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

#ifndef CTN_EVALUATION_H_
#define CTN_EVALUATION_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ctn/dataset.h"
#include "ctn/masks.h"
#include "ctn/model.h"

namespace ctn {

// Maps a mixture (and, for oracles, its clean references) to C estimates.
using Separator = std::function<std::vector<std::vector<double>>(
    const std::vector<double>& mixture,
    const std::vector<std::vector<double>>& references)>;

Separator ModelSeparator(const ModelParams& params);
// Ideal-mask oracle on the references; ignores the mixture argument.
Separator OracleSeparator(IdealMaskKind kind);

struct UtteranceResult {
  std::string id;
  bool ok = false;
  std::string message;  // reason when skipped
  std::vector<int> perm;
  double si_snri = 0.0;
  double sdri = 0.0;
};

struct EvaluationReport {
  std::vector<UtteranceResult> utterances;  // manifest order
  int evaluated = 0;
  int skipped = 0;
  double mean_si_snri = 0.0;
  double mean_sdri = 0.0;
};

// Number of worker threads from CTN_THREADS (default 1).
int ThreadsFromEnv();

// Scores every utterance. Utterances that cannot be loaded or whose
// lengths disagree are skipped with a warning on stderr and counted.
EvaluationReport Evaluate(const Manifest& manifest, const Separator& separator,
                          int threads = 1);
EvaluationReport EvaluateExamples(const std::vector<Example>& examples,
                                  const Separator& separator, int threads = 1);

// Header: utterance,status,si_snri_db,sdri_db. A final "mean" row carries
// the averages and the status "evaluated=<n>;skipped=<m>".
void WriteEvaluationCsv(const std::string& path, const EvaluationReport& report);

struct ShiftResult {
  std::vector<int64_t> shifts;
  std::vector<double> si_snri;
  std::vector<double> sdri;
  double sdri_stddev = 0.0;  // population standard deviation
};

// For s = 0, step, ..., max_shift separates mixture[s:] and scores it
// against references[s:].
ShiftResult ShiftExperiment(const Separator& separator, const Example& example,
                            int64_t max_shift, int64_t step);

void WriteShiftCsv(const std::string& path, const ShiftResult& result);

}  // namespace ctn

#endif  // CTN_EVALUATION_H_
