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

#ifndef CTN_STREAMING_H_
#define CTN_STREAMING_H_

#include <cstdint>
#include <memory>
#include <memory>
#include <span>
#include <vector>

#include "ctn/model.h"

namespace ctn {

class StreamingSeparator;

// Per-stream mutable inference state. Owned by one thread at a time.
class StreamState {
 public:
  int64_t frames_processed() const { return frames_; }
  int64_t samples_received() const { return received_; }
  bool terminal() const { return terminal_; }
  // Running cLN statistics of site `site` (0: encoder output, then two per
  // block): mean and variance over all frames seen so far.
  double NormMean(size_t site) const;
  double NormVariance(size_t site) const;
  // Left-context history of block `block`, oldest frame first,
  // [(P-1)*dilation x H] flattened.
  std::vector<double> BlockHistory(size_t block) const;

  bool operator==(const StreamState&) const = default;

 private:
  friend class StreamingSeparator;

  struct NormStats {
    bool started = false;
    double shift = 0.0;
    double s1 = 0.0;
    double s2 = 0.0;
    double count = 0.0;
    bool operator==(const NormStats&) const = default;
  };

  std::vector<double> pending_;     // < hop samples of the current hop
  std::vector<double> prev_hop_;    // previous complete hop
  bool have_prev_hop_ = false;
  std::vector<NormStats> norms_;
  std::vector<std::vector<double>> history_;  // ring per block
  std::vector<size_t> history_depth_;         // (P-1)*dilation frames
  std::vector<int64_t> history_pos_;          // oldest slot
  std::vector<std::vector<double>> tails_;    // overlap-add tail per source
  int64_t frames_ = 0;
  int64_t received_ = 0;
  bool terminal_ = false;
};

// Frame-by-frame causal separator. Immutable after construction and safe
// to share across threads; each stream carries its own StreamState.
// Emitted audio matches the offline causal forward pass on the zero-padded
// input up to summation-order rounding, with no added delay: after each
// complete frame the next L/2 output samples per source are final and are
// returned. Chunking of the input never changes the output bits.
class StreamingSeparator {
 public:
  // Raises ConfigError for non-causal parameters.
  explicit StreamingSeparator(const ModelParams& params);

  const ModelConfig& config() const { return config_; }
  int hop() const { return config_.hop(); }

  StreamState InitStream() const;

  // Consumes samples; returns C vectors of newly final output samples
  // (each a multiple of L/2 long, possibly empty).
  std::vector<std::vector<double>> Push(StreamState& state,
                                        std::span<const double> samples) const;

  // Zero-pads the remainder to a final hop, emits the rest of the overlap
  // tail and marks the state terminal. Pushing afterwards raises StateError.
  std::vector<std::vector<double>> Flush(StreamState& state) const;

 private:
  struct Block {
    int dilation;
    const float* in_w;           // transposed [B x H], in arena_
    std::vector<double> in_b;
    double in_alpha;
    std::vector<double> in_gamma, in_beta;
    std::vector<float> dw_w;     // [H x P]
    double dw_alpha;
    std::vector<double> dw_gamma, dw_beta;
    // Skip and residual 1x1-convs fused: transposed [H x (Sc + B)], or
    // [H x Sc] alone for the last block.
    const float* out_w;
    std::vector<double> out_b;
  };

  void ProcessFrame(StreamState& state, std::span<const double> frame,
                    std::vector<std::vector<double>>& out) const;
  void NormalizeFrame(StreamState::NormStats& stats, std::span<double> v,
                      const std::vector<double>& gamma,
                      const std::vector<double>& beta) const;

  ModelConfig config_;
  std::vector<double> encoder_;  // [N x L]
  std::vector<double> decoder_;  // [N x L]
  std::vector<double> input_gamma_, input_beta_;
  // Pointwise weights, contiguous in the order a frame reads them.
  std::shared_ptr<float[]> arena_;
  const float* bottleneck_w_ = nullptr;  // transposed [N x B]
  std::vector<double> bottleneck_b_;
  std::vector<Block> blocks_;
  double mask_alpha_ = 0.25;
  const float* mask_w_ = nullptr;  // transposed [Sc x C*N]
  std::vector<double> mask_b_;
};

struct BenchReport {
  double hop_ms = 0.0;
  double mean_tpf_ms = 0.0;
  double p95_tpf_ms = 0.0;
  double stddev_tpf_ms = 0.0;
  std::vector<double> trial_mean_ms;
  int64_t frames_measured = 0;
  bool real_time = false;  // mean TPF < hop duration
};

// Streams `seconds` of seeded synthetic audio hop by hop through a fresh
// state per trial and times every frame after a short warmup.
BenchReport BenchTimePerFrame(const StreamingSeparator& separator,
                              double seconds, int trials, uint64_t seed = 1);

}  // namespace ctn

#endif  // CTN_STREAMING_H_
