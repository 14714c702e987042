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

#include "ctn/streaming.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>

#include <sys/mman.h>

#include "ctn/errors.h"
#include "ctn/ops.h"

namespace ctn {

namespace {

// Pointwise [Out x In x 1] kernels are stored transposed, [In x Out], so
// that the frame product is a sequence of contiguous axpy updates. All of
// them live in one arena, laid out in the order a frame reads them, so
// each frame is a single sequential sweep over the weights.
class ArenaBuilder {
 public:
  void Reserve(int64_t n) { total_ += Padded(n); }

  void Allocate() {
    constexpr size_t kAlign = size_t{2} << 20;
    const size_t bytes = (total_ * sizeof(float) + kAlign - 1) / kAlign * kAlign;
    float* p = static_cast<float*>(std::aligned_alloc(kAlign, std::max(bytes, kAlign)));
    if (p == nullptr) throw std::bad_alloc();
#ifdef MADV_HUGEPAGE
    madvise(p, bytes, MADV_HUGEPAGE);  // best effort
#endif
    arena_ = std::shared_ptr<float[]>(p, [](float* q) { std::free(q); });
  }

  const float* AddTransposed(const Tensor& w) {
    const int64_t out = w.dim(0), in = w.dim(1);
    float* t = arena_.get() + used_;
    auto v = w.data();
    for (int64_t o = 0; o < out; ++o) {
      for (int64_t i = 0; i < in; ++i) t[i * out + o] = static_cast<float>(v[o * in + i]);
    }
    used_ += Padded(w.size());
    return t;
  }

  // Two kernels sharing one input, stored as rows [a_row | b_row].
  const float* AddTransposedPair(const Tensor& a, const Tensor& b) {
    const int64_t oa = a.dim(0), ob = b.dim(0), in = a.dim(1);
    const int64_t out = oa + ob;
    float* t = arena_.get() + used_;
    for (int64_t o = 0; o < oa; ++o) {
      for (int64_t i = 0; i < in; ++i) t[i * out + o] = static_cast<float>(a.data()[o * in + i]);
    }
    for (int64_t o = 0; o < ob; ++o) {
      for (int64_t i = 0; i < in; ++i) {
        t[i * out + oa + o] = static_cast<float>(b.data()[o * in + i]);
      }
    }
    used_ += Padded(in * out);
    return t;
  }

  std::shared_ptr<float[]> arena() const { return arena_; }

 private:
  static size_t Padded(int64_t n) { return (static_cast<size_t>(n) + 15) / 16 * 16; }

  size_t total_ = 0;
  size_t used_ = 0;
  std::shared_ptr<float[]> arena_;
};

std::vector<double> ToDouble(const Tensor& t) {
  return {t.data().begin(), t.data().end()};
}

std::vector<float> ToFloat(const Tensor& t) {
  std::vector<float> f(t.size());
  for (int64_t i = 0; i < t.size(); ++i) f[i] = static_cast<float>(t.data()[i]);
  return f;
}

// y = bias + W x, summed over inputs in ascending order. Parameters are
// float32-representable, so the float copy of W is exact.
void MatVec(const float* wt, const std::vector<double>& bias,
            std::span<const double> x, std::span<double> y) {
  const size_t out = y.size();
  double* __restrict yp = y.data();
  std::copy(bias.begin(), bias.end(), yp);
  for (size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const float* __restrict row = wt + i * out;
    for (size_t o = 0; o < out; ++o) yp[o] += static_cast<double>(row[o]) * xi;
  }
}

void PreluInPlace(std::span<double> v, double alpha) {
  for (double& x : v) x = x >= 0.0 ? x : alpha * x;
}

}  // namespace

double StreamState::NormMean(size_t site) const {
  const NormStats& s = norms_.at(site);
  return s.count > 0 ? s.shift + s.s1 / s.count : 0.0;
}

double StreamState::NormVariance(size_t site) const {
  const NormStats& s = norms_.at(site);
  if (s.count == 0) return 0.0;
  const double m = s.s1 / s.count;
  return std::max(0.0, s.s2 / s.count - m * m);
}

std::vector<double> StreamState::BlockHistory(size_t block) const {
  const auto& ring = history_.at(block);
  if (ring.empty()) return {};
  const size_t depth = history_depth_.at(block);
  const size_t h = ring.size() / depth;
  std::vector<double> ordered;
  ordered.reserve(ring.size());
  for (size_t k = 0; k < depth; ++k) {
    const size_t slot = (history_pos_[block] + k) % depth;
    ordered.insert(ordered.end(), ring.begin() + slot * h,
                   ring.begin() + (slot + 1) * h);
  }
  return ordered;
}

StreamingSeparator::StreamingSeparator(const ModelParams& params)
    : config_(params.config) {
  config_.Validate();
  if (!config_.causal) {
    throw ConfigError("streaming inference requires a causal (cLN) model");
  }
  const Tensor enc = config_.encoder == EncoderKind::kPinv
                         ? ops::PseudoInverseKernel(params.decoder.Detach())
                         : params.encoder;
  encoder_ = ToDouble(enc);
  decoder_ = ToDouble(params.decoder);
  input_gamma_ = ToDouble(params.input_norm_gamma);
  input_beta_ = ToDouble(params.input_norm_beta);
  ArenaBuilder arena;
  arena.Reserve(params.bottleneck_weight.size());
  for (const BlockParams& b : params.blocks) {
    arena.Reserve(b.in_weight.size());
    arena.Reserve(b.skip_weight.size() + b.res_weight.size());
  }
  arena.Reserve(params.mask_weight.size());
  arena.Allocate();
  bottleneck_w_ = arena.AddTransposed(params.bottleneck_weight);
  bottleneck_b_ = ToDouble(params.bottleneck_bias);
  for (const BlockParams& b : params.blocks) {
    Block blk;
    blk.dilation = b.dilation;
    blk.in_w = arena.AddTransposed(b.in_weight);
    blk.in_b = ToDouble(b.in_bias);
    blk.in_alpha = b.in_prelu.data()[0];
    blk.in_gamma = ToDouble(b.in_norm_gamma);
    blk.in_beta = ToDouble(b.in_norm_beta);
    blk.dw_w = ToFloat(b.dw_weight);
    blk.dw_alpha = b.dw_prelu.data()[0];
    blk.dw_gamma = ToDouble(b.dw_norm_gamma);
    blk.dw_beta = ToDouble(b.dw_norm_beta);
    // The last block's residual output feeds nothing and is not computed.
    const bool last = blocks_.size() + 1 == params.blocks.size();
    blk.out_w = last ? arena.AddTransposed(b.skip_weight)
                     : arena.AddTransposedPair(b.skip_weight, b.res_weight);
    blk.out_b = ToDouble(b.skip_bias);
    if (!last) {
      const auto rb = ToDouble(b.res_bias);
      blk.out_b.insert(blk.out_b.end(), rb.begin(), rb.end());
    }
    blocks_.push_back(std::move(blk));
  }
  mask_alpha_ = params.mask_prelu.data()[0];
  mask_w_ = arena.AddTransposed(params.mask_weight);
  arena_ = arena.arena();
  mask_b_ = ToDouble(params.mask_bias);
}

StreamState StreamingSeparator::InitStream() const {
  StreamState s;
  s.pending_.reserve(hop());
  s.prev_hop_.assign(hop(), 0.0);
  s.norms_.assign(1 + 2 * blocks_.size(), StreamState::NormStats{});
  const size_t h = config_.block_channels;
  for (const Block& b : blocks_) {
    const size_t depth = static_cast<size_t>(config_.kernel - 1) * b.dilation;
    s.history_.emplace_back(depth * h, 0.0);
    s.history_depth_.push_back(depth);
    s.history_pos_.push_back(0);
  }
  s.tails_.assign(config_.sources, std::vector<double>(hop(), 0.0));
  return s;
}

void StreamingSeparator::NormalizeFrame(StreamState::NormStats& stats,
                                        std::span<double> v,
                                        const std::vector<double>& gamma,
                                        const std::vector<double>& beta) const {
  if (!stats.started) {
    stats.started = true;
    stats.shift = v[0];
  }
  const double shift = stats.shift;
  // Eight independent partial sums keep the reduction vectorizable.
  double p1[8] = {}, p2[8] = {};
  const size_t n_all = v.size();
  size_t i = 0;
  for (; i + 8 <= n_all; i += 8) {
    for (size_t j = 0; j < 8; ++j) {
      const double d = v[i + j] - shift;
      p1[j] += d;
      p2[j] += d * d;
    }
  }
  for (; i < n_all; ++i) {
    const double d = v[i] - shift;
    p1[0] += d;
    p2[0] += d * d;
  }
  double f1 = 0.0, f2 = 0.0;
  for (size_t j = 0; j < 8; ++j) {
    f1 += p1[j];
    f2 += p2[j];
  }
  stats.s1 += f1;
  stats.s2 += f2;
  stats.count += static_cast<double>(v.size());
  const double mean = stats.s1 / stats.count;
  const double var = std::max(0.0, stats.s2 / stats.count - mean * mean);
  const double inv_std = 1.0 / std::sqrt(var + ops::kNormEps);
  for (size_t n = 0; n < v.size(); ++n) {
    v[n] = ((v[n] - shift) - mean) * inv_std * gamma[n] + beta[n];
  }
}

void StreamingSeparator::ProcessFrame(StreamState& state,
                                      std::span<const double> frame,
                                      std::vector<std::vector<double>>& out) const {
  const ModelConfig& cfg = config_;
  const size_t n_filters = cfg.n_filters, len = cfg.filter_len;
  const size_t h = cfg.block_channels, taps = cfg.kernel;
  const size_t hop_len = cfg.hop();

  std::vector<double> encoded(n_filters, 0.0);
  for (size_t n = 0; n < n_filters; ++n) {
    const double* u = encoder_.data() + n * len;
    double acc = 0.0;
    for (size_t p = 0; p < len; ++p) acc += u[p] * frame[p];
    encoded[n] = cfg.encoder == EncoderKind::kRelu && acc < 0.0 ? 0.0 : acc;
  }

  std::vector<double> normed = encoded;
  NormalizeFrame(state.norms_[0], normed, input_gamma_, input_beta_);
  std::vector<double> residual(cfg.bottleneck);
  MatVec(bottleneck_w_, bottleneck_b_, normed, residual);

  std::vector<double> skip_sum(cfg.skip_channels, 0.0);
  std::vector<double> hidden(h), conv(h), skip_res(cfg.skip_channels + cfg.bottleneck);
  std::vector<const double*> taps_rows;
  for (size_t k = 0; k < blocks_.size(); ++k) {
    const Block& blk = blocks_[k];
    MatVec(blk.in_w, blk.in_b, residual, hidden);
    PreluInPlace(hidden, blk.in_alpha);
    NormalizeFrame(state.norms_[1 + 2 * k], hidden, blk.in_gamma, blk.in_beta);

    // Causal dilated depthwise conv over [history..., current].
    const size_t depth = state.history_depth_[k];
    const size_t dil = blk.dilation;
    std::vector<double>& ring = state.history_[k];
    const size_t pos = static_cast<size_t>(state.history_pos_[k]);
    // Row p of `taps` is the frame (taps-1-p)*dil back in time; the current
    // frame is not yet in the ring. The oldest slot is `pos`.
    taps_rows.resize(taps);
    for (size_t p = 0; p < taps; ++p) {
      const size_t lag = (taps - 1 - p) * dil;
      taps_rows[p] = lag == 0 ? hidden.data() : ring.data() + ((pos + depth - lag) % depth) * h;
    }
    for (size_t c = 0; c < h; ++c) {
      const float* w = blk.dw_w.data() + c * taps;
      double acc = 0.0;
      for (size_t p = 0; p < taps; ++p) acc += static_cast<double>(w[p]) * taps_rows[p][c];
      conv[c] = acc;
    }
    if (depth > 0) {
      std::copy(hidden.begin(), hidden.end(), ring.begin() + pos * h);
      state.history_pos_[k] = static_cast<int64_t>((pos + 1) % depth);
    }
    PreluInPlace(conv, blk.dw_alpha);
    NormalizeFrame(state.norms_[2 + 2 * k], conv, blk.dw_gamma, blk.dw_beta);
    const size_t sc = skip_sum.size();
    MatVec(blk.out_w, blk.out_b, conv, std::span<double>(skip_res.data(), blk.out_b.size()));
    for (size_t i = 0; i < sc; ++i) skip_sum[i] += skip_res[i];
    if (k + 1 == blocks_.size()) break;
    const double* res = skip_res.data() + sc;
    for (size_t i = 0; i < residual.size(); ++i) residual[i] += res[i];
  }

  PreluInPlace(skip_sum, mask_alpha_);
  const size_t sources = cfg.sources;
  std::vector<double> logits(sources * n_filters);
  MatVec(mask_w_, mask_b_, skip_sum, logits);
  if (cfg.mask == MaskKind::kSigmoid) {
    for (double& v : logits) {
      if (v >= 0.0) {
        v = 1.0 / (1.0 + std::exp(-v));
      } else {
        const double e = std::exp(v);
        v = e / (1.0 + e);
      }
    }
  } else {
    for (size_t n = 0; n < n_filters; ++n) {
      double peak = logits[n];
      for (size_t c = 1; c < sources; ++c) peak = std::max(peak, logits[c * n_filters + n]);
      double total = 0.0;
      for (size_t c = 0; c < sources; ++c) {
        double& v = logits[c * n_filters + n];
        v = std::exp(v - peak);
        total += v;
      }
      for (size_t c = 0; c < sources; ++c) logits[c * n_filters + n] /= total;
    }
  }

  std::vector<double> segment(len);
  for (size_t c = 0; c < sources; ++c) {
    std::fill(segment.begin(), segment.end(), 0.0);
    const double* mask = logits.data() + c * n_filters;
    for (size_t n = 0; n < n_filters; ++n) {
      const double d = encoded[n] * mask[n];
      const double* v = decoder_.data() + n * len;
      for (size_t p = 0; p < len; ++p) segment[p] += d * v[p];
    }
    std::vector<double>& tail = state.tails_[c];
    for (size_t i = 0; i < hop_len; ++i) out[c].push_back(tail[i] + segment[i]);
    std::copy(segment.begin() + hop_len, segment.end(), tail.begin());
  }
  ++state.frames_;
}

std::vector<std::vector<double>> StreamingSeparator::Push(
    StreamState& state, std::span<const double> samples) const {
  if (state.terminal_) throw StateError("push after flush");
  std::vector<std::vector<double>> out(config_.sources);
  const size_t hop_len = hop();
  std::vector<double> frame(config_.filter_len);
  for (double x : samples) {
    state.pending_.push_back(x);
    ++state.received_;
    if (state.pending_.size() < hop_len) continue;
    if (state.have_prev_hop_) {
      std::copy(state.prev_hop_.begin(), state.prev_hop_.end(), frame.begin());
      std::copy(state.pending_.begin(), state.pending_.end(),
                frame.begin() + hop_len);
      ProcessFrame(state, frame, out);
    }
    state.prev_hop_.swap(state.pending_);
    state.pending_.clear();
    state.have_prev_hop_ = true;
  }
  return out;
}

std::vector<std::vector<double>> StreamingSeparator::Flush(StreamState& state) const {
  if (state.terminal_) throw StateError("stream already flushed");
  std::vector<std::vector<double>> out(config_.sources);
  if (state.received_ == 0) {
    state.terminal_ = true;
    return out;
  }
  const size_t hop_len = hop();
  if (!state.pending_.empty()) {
    std::vector<double> pad(hop_len - state.pending_.size(), 0.0);
    auto more = Push(state, pad);
    for (size_t c = 0; c < out.size(); ++c) {
      out[c].insert(out[c].end(), more[c].begin(), more[c].end());
    }
  }
  if (state.frames_ == 0) {
    // Input shorter than one window: pad a second hop.
    std::vector<double> pad(hop_len, 0.0);
    auto more = Push(state, pad);
    for (size_t c = 0; c < out.size(); ++c) {
      out[c].insert(out[c].end(), more[c].begin(), more[c].end());
    }
  }
  for (size_t c = 0; c < out.size(); ++c) {
    out[c].insert(out[c].end(), state.tails_[c].begin(), state.tails_[c].end());
    std::fill(state.tails_[c].begin(), state.tails_[c].end(), 0.0);
  }
  state.terminal_ = true;
  return out;
}

BenchReport BenchTimePerFrame(const StreamingSeparator& separator,
                              double seconds, int trials, uint64_t seed) {
  if (!(seconds > 0.0) || trials < 1) {
    throw ConfigError("bench needs positive duration and at least one trial");
  }
  const ModelConfig& cfg = separator.config();
  const int hop_len = separator.hop();
  const int64_t total = static_cast<int64_t>(seconds * cfg.sample_rate);
  const int64_t hops = total / hop_len;
  constexpr int64_t kWarmupFrames = 20;
  if (hops < kWarmupFrames + 4) {
    throw ConfigError("bench duration too short for warmup");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> audio(hops * hop_len);
  for (double& x : audio) {
    x = (static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5) * 0.2;
  }

  BenchReport report;
  report.hop_ms = 1000.0 * hop_len / cfg.sample_rate;
  std::vector<double> all;
  for (int trial = 0; trial < trials; ++trial) {
    StreamState state = separator.InitStream();
    double trial_sum = 0.0;
    int64_t trial_frames = 0;
    for (int64_t k = 0; k < hops; ++k) {
      std::span<const double> chunk(audio.data() + k * hop_len, hop_len);
      const auto t0 = std::chrono::steady_clock::now();
      auto out = separator.Push(state, chunk);
      const auto t1 = std::chrono::steady_clock::now();
      if (k < kWarmupFrames || out[0].empty()) continue;
      const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
      all.push_back(ms);
      trial_sum += ms;
      ++trial_frames;
    }
    report.trial_mean_ms.push_back(trial_sum / static_cast<double>(trial_frames));
  }
  double sum = 0.0;
  for (double v : all) sum += v;
  report.frames_measured = static_cast<int64_t>(all.size());
  report.mean_tpf_ms = sum / static_cast<double>(all.size());
  double var = 0.0;
  for (double v : all) var += (v - report.mean_tpf_ms) * (v - report.mean_tpf_ms);
  report.stddev_tpf_ms = std::sqrt(var / static_cast<double>(all.size()));
  std::sort(all.begin(), all.end());
  report.p95_tpf_ms = all[static_cast<size_t>(0.95 * (all.size() - 1))];
  report.real_time = report.mean_tpf_ms < report.hop_ms;
  return report;
}

}  // namespace ctn
