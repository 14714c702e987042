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

#ifndef CTN_TRAINER_H_
#define CTN_TRAINER_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ctn/dataset.h"
#include "ctn/model.h"

namespace ctn {

struct TrainConfig {
  int epochs = 100;
  double segment_seconds = 4.0;
  double lr_initial = 1e-3;
  int lr_halve_patience = 3;
  double clip_norm = 5.0;
  int batch_size = 4;
  uint64_t seed = 0;
  // Optional early exits; 0 / nullopt disable them.
  int64_t max_steps = 0;
  std::optional<double> target_train_si_snri;

  void Validate() const;
};

struct EpochRecord {
  int epoch = 0;             // 1-based
  double lr = 0.0;           // rate used during the epoch
  double train_loss = 0.0;   // mean uPIT loss over the epoch's segments
  double train_si_snri = 0.0;
  double valid_si_snri = 0.0;
  int64_t steps = 0;         // cumulative optimizer steps
  double seconds = 0.0;      // cumulative wall clock
};

struct TrainReport {
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_valid_si_snri = 0.0;
  int64_t total_steps = 0;
  ModelParams best_params;
};

// A fixed-length training window cut from one example.
struct Segment {
  std::vector<double> mixture;
  std::vector<std::vector<double>> references;
};

// Cuts each example into consecutive windows of `segment_samples`; the
// shorter remainder at the end of each example is dropped.
std::vector<Segment> CutSegments(const std::vector<Example>& examples,
                                 int64_t segment_samples);

// Mean SI-SNRi of the model over `examples` (full utterances, uPIT).
double MeanSiSnri(const ModelParams& params, const std::vector<Example>& examples);

// One optimization step on a batch of segments: forward, uPIT loss,
// backward (gradients averaged over the batch), clip, Adam update, and
// rounding of the parameters to float32 storage. Returns the mean loss.
struct StepResult {
  double loss = 0.0;
  std::vector<double> si_snri;  // per segment, measured before the update
};
class Adam;
StepResult TrainStep(ModelParams& params, Adam& adam,
                     const std::vector<const Segment*>& batch, double lr,
                     double clip_norm);

// Trains `params` in place. Each epoch shuffles the segments (seeded),
// batches them, and steps the optimizer; after each epoch the validation
// SI-SNRi drives the learning-rate halving and best-parameter selection.
// With an empty `valid` set, the epoch's training SI-SNRi is monitored
// instead.
TrainReport Fit(ModelParams& params, const std::vector<Example>& train,
                const std::vector<Example>& valid, const TrainConfig& config,
                const std::function<void(const EpochRecord&)>& on_epoch = {});

// CSV with header epoch,lr,train_loss,train_si_snri,valid_si_snri,steps,seconds
void WriteTrainReportCsv(const std::string& path, const TrainReport& report);

}  // namespace ctn

#endif  // CTN_TRAINER_H_
