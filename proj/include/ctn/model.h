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

#ifndef CTN_MODEL_H_
#define CTN_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ctn/audio.h"
#include "ctn/tensor.h"

namespace ctn {

enum class EncoderKind { kLinear, kRelu, kPinv };
enum class MaskKind { kSigmoid, kSoftmax };
enum class NormKind { kGlobal, kCumulative };

std::string ToString(EncoderKind kind);
std::string ToString(MaskKind kind);
std::string ToString(NormKind kind);
EncoderKind ParseEncoderKind(const std::string& name);
MaskKind ParseMaskKind(const std::string& name);
NormKind ParseNormKind(const std::string& name);

// Network hyperparameters. Field comments give the conventional symbol.
struct ModelConfig {
  int n_filters = 512;         // N: encoder/decoder basis functions
  int filter_len = 16;         // L: basis length in samples (even)
  int bottleneck = 128;        // B: bottleneck and residual channels
  int skip_channels = 128;     // Sc: skip-connection channels
  int block_channels = 512;    // H: channels inside each block
  int kernel = 3;              // P: depthwise kernel size
  int blocks_per_repeat = 8;   // X: blocks per repeat, dilations 1..2^(X-1)
  int repeats = 3;             // R
  int sources = 2;             // C
  bool causal = false;
  EncoderKind encoder = EncoderKind::kLinear;
  MaskKind mask = MaskKind::kSigmoid;
  NormKind norm = NormKind::kGlobal;
  int sample_rate = 8000;

  int hop() const { return filter_len / 2; }
  int num_blocks() const { return blocks_per_repeat * repeats; }

  // Throws ConfigError naming the first violated constraint.
  void Validate() const;

  // Largest non-causal configuration of the hyperparameter study.
  static ModelConfig Best();
  static ModelConfig BestCausal();

  bool operator==(const ModelConfig&) const = default;
};

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

// One 1-D convolutional block: 1x1-conv -> PReLU -> norm -> D-conv ->
// PReLU -> norm, then residual and skip 1x1-convs.
struct BlockParams {
  int dilation = 1;
  Tensor in_weight;       // [H x B x 1]
  Tensor in_bias;         // [H]
  Tensor in_prelu;        // [1]
  Tensor in_norm_gamma;   // [H x 1]
  Tensor in_norm_beta;    // [H x 1]
  Tensor dw_weight;       // [H x 1 x P]
  Tensor dw_prelu;        // [1]
  Tensor dw_norm_gamma;   // [H x 1]
  Tensor dw_norm_beta;    // [H x 1]
  Tensor res_weight;      // [B x H x 1]
  Tensor res_bias;        // [B]
  Tensor skip_weight;     // [Sc x H x 1]
  Tensor skip_bias;       // [Sc]
};

struct ModelParams {
  ModelConfig config;
  Tensor encoder;            // [N x 1 x L]; undefined for the pinv encoder
  Tensor decoder;            // [N x 1 x L]
  Tensor input_norm_gamma;   // [N x 1]
  Tensor input_norm_beta;    // [N x 1]
  Tensor bottleneck_weight;  // [B x N x 1]
  Tensor bottleneck_bias;    // [B]
  std::vector<BlockParams> blocks;
  Tensor mask_prelu;         // [1]
  Tensor mask_weight;        // [C*N x Sc x 1]
  Tensor mask_bias;          // [C*N]

  // Every trainable tensor in a fixed order. Handles alias the members.
  std::vector<NamedTensor> Named() const;
  int64_t NumScalars() const;
  ModelParams Clone() const;
  void SetRequiresGrad(bool value) const;
};

// Randomly initialized parameters; identical for identical seeds.
ModelParams BuildModel(const ModelConfig& config, uint64_t seed);

// Exact number of trainable scalars, from the channel arithmetic alone.
int64_t ParamCount(const ModelConfig& config);

// Parameter counts of a standard conv with G inputs, H outputs, kernel P
// versus its depthwise-separable factorization.
int64_t StandardConvParamCount(int64_t in_channels, int64_t out_channels,
                               int64_t kernel);
int64_t SeparableConvParamCount(int64_t in_channels, int64_t out_channels,
                                int64_t kernel);

// Number of encoder frames seen by one output frame of the separator.
int64_t ReceptiveFieldFrames(const ModelConfig& config);
double ReceptiveFieldSeconds(const ModelConfig& config);

// Frames produced by the encoder for `samples` input samples (T >= L).
int64_t NumFrames(const ModelConfig& config, int64_t samples);
// Zero-padded length used by Separate(): a whole number of hops, >= L.
int64_t PaddedLength(const ModelConfig& config, int64_t samples);

// waveform [1 x T] -> encoder representation [N x F].
Tensor Encode(const ModelParams& params, const Tensor& waveform);
// Encoder representation [N x F] -> masks [C x N x F].
Tensor SeparateMasks(const ModelParams& params, const Tensor& encoded);
// Masked representation [N x F] -> waveform [1 x (F-1)*L/2 + L].
Tensor Decode(const ModelParams& params, const Tensor& masked);

struct SeparationTrace {
  Tensor encoded;                // [N x F]
  Tensor masks;                  // [C x N x F]
  std::vector<Tensor> padded;    // C x [1 x T_pad]
  std::vector<Tensor> sources;   // C x [1 x T], padding removed
};

// Differentiable end-to-end pass on mixture [1 x T] (any T >= 1).
SeparationTrace SeparateTrace(const ModelParams& params, const Tensor& mixture);
std::vector<Tensor> Separate(const ModelParams& params, const Tensor& mixture);

// Inference on an audio clip; returns C clips of the input length.
std::vector<AudioClip> Forward(const ModelParams& params,
                               const AudioClip& mixture);

}  // namespace ctn

#endif  // CTN_MODEL_H_
