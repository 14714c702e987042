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

#ifndef CTN_OPTIMIZER_H_
#define CTN_OPTIMIZER_H_

#include <cstdint>
#include <vector>

#include "ctn/model.h"

namespace ctn {

// Rescales all gradients so that their global L2 norm is at most `max_l2`.
// Returns the factor applied (1 when no clipping was needed). Raises
// NumericError naming the first parameter with a non-finite gradient.
// Parameters without a gradient count as zero.
double ClipGradients(const std::vector<NamedTensor>& params, double max_l2);

// Global L2 norm over all populated gradients.
double GradientNorm(const std::vector<NamedTensor>& params);

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with bias-corrected moments. Holds one first/second moment buffer
// per parameter; a parameter without a gradient is updated as if its
// gradient were zero.
class Adam {
 public:
  explicit Adam(std::vector<NamedTensor> params, AdamOptions options = {});

  void Step(double lr);
  int64_t steps() const { return steps_; }

 private:
  std::vector<NamedTensor> params_;
  AdamOptions options_;
  std::vector<std::vector<double>> m_, v_;
  int64_t steps_ = 0;
};

// Halves the learning rate after `patience` consecutive epochs without an
// improvement of the monitored metric (higher is better).
class LrSchedule {
 public:
  LrSchedule(double initial, int patience);

  double lr() const { return lr_; }
  // Feeds one end-of-epoch metric; returns true if it is a new best.
  bool Observe(double metric);

 private:
  double lr_;
  int patience_;
  int stale_epochs_ = 0;
  bool has_best_ = false;
  double best_ = 0.0;
};

}  // namespace ctn

#endif  // CTN_OPTIMIZER_H_
