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

#ifndef CTN_OPS_H_
#define CTN_OPS_H_

#include <vector>

#include "ctn/tensor.h"

// Differentiable tensor operations. Every op records itself on the active
// tape when one of its inputs requires a gradient. There is no implicit
// broadcasting: apart from per-channel gamma/beta/alpha/bias operands, all
// operand shapes must match exactly.
namespace ctn::ops {

inline constexpr double kNormEps = 1e-8;

struct Conv1dOptions {
  int stride = 1;
  int dilation = 1;
  int pad_left = 0;
  int pad_right = 0;
  int groups = 1;
};

// input [Cin x T], kernel [Cout x Cin/groups x P], bias [Cout] or undefined.
// Output [Cout x T'] with T' = (T + pads - (P-1)*dilation - 1) / stride + 1.
Tensor Conv1d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv1dOptions& options = {});

// input [Cin x T], kernel [Cin x Cout x P]. Output [Cout x (T-1)*stride + P]
// with overlapping contributions summed. Adjoint of the unpadded Conv1d.
Tensor TransposedConv1d(const Tensor& input, const Tensor& kernel, int stride);

// x if x >= 0 else alpha * x. alpha is [1] (shared) or [C] for x [C x ...].
Tensor Prelu(const Tensor& x, const Tensor& alpha);

Tensor Relu(const Tensor& x);
Tensor Sigmoid(const Tensor& x);
// Softmax across axis 0 (the source axis) at every remaining position.
Tensor SoftmaxOverSources(const Tensor& x);

enum class Activation { kSigmoid, kSoftmaxOverSources, kRelu };
Tensor Activate(Activation kind, const Tensor& x);

// F [N x T], gamma/beta [N x 1]. Statistics over all N*T entries.
Tensor GlobalLayerNorm(const Tensor& features, const Tensor& gamma,
                       const Tensor& beta, double eps = kNormEps);
// Frame k is normalized with the statistics of frames 0..k.
Tensor CumulativeLayerNorm(const Tensor& features, const Tensor& gamma,
                           const Tensor& beta, double eps = kNormEps);

Tensor Add(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Scale(const Tensor& x, double factor);
// Sum of same-shaped tensors.
Tensor AddN(const std::vector<Tensor>& terms);
// Sum of all entries, as a scalar.
Tensor Sum(const Tensor& x);

Tensor Reshape(const Tensor& x, Shape shape);
// x[index] along axis 0.
Tensor Select(const Tensor& x, int64_t index);
// Columns [start, start + length) of x [R x T].
Tensor SliceColumns(const Tensor& x, int64_t start, int64_t length);

// For V [N x 1 x L] with N >= L, returns V (V^T V)^{-1} with the same
// shape: the analysis kernel whose frame-wise product with V reconstructs
// any frame exactly (least-squares pseudo-inverse).
Tensor PseudoInverseKernel(const Tensor& basis);

// While alive, records on the current thread which side of its kink every
// PReLU / ReLU input element fell on, in evaluation order. Two evaluations
// with equal patterns lie on the same linear piece of every activation;
// finite-difference gradient checks rely on this.
class ActivationPatternRecorder {
 public:
  ActivationPatternRecorder();
  ~ActivationPatternRecorder();
  ActivationPatternRecorder(const ActivationPatternRecorder&) = delete;
  ActivationPatternRecorder& operator=(const ActivationPatternRecorder&) = delete;

  const std::vector<bool>& pattern() const { return pattern_; }

  // Called by the activation ops.
  static void Note(std::span<const double> x, bool strict);

 private:
  ActivationPatternRecorder* previous_;
  std::vector<bool> pattern_;
};

}  // namespace ctn::ops

#endif  // CTN_OPS_H_
