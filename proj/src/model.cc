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

#include "ctn/model.h"

#include <cmath>
#include <random>

#include "ctn/errors.h"
#include "ctn/ops.h"

namespace ctn {

std::string ToString(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::kLinear: return "linear";
    case EncoderKind::kRelu: return "relu";
    case EncoderKind::kPinv: return "pinv";
  }
  return "?";
}

std::string ToString(MaskKind kind) {
  return kind == MaskKind::kSigmoid ? "sigmoid" : "softmax";
}

std::string ToString(NormKind kind) {
  return kind == NormKind::kGlobal ? "gLN" : "cLN";
}

EncoderKind ParseEncoderKind(const std::string& name) {
  if (name == "linear") return EncoderKind::kLinear;
  if (name == "relu") return EncoderKind::kRelu;
  if (name == "pinv") return EncoderKind::kPinv;
  throw ConfigError("unknown encoder nonlinearity '" + name +
                    "' (expected linear, relu or pinv)");
}

MaskKind ParseMaskKind(const std::string& name) {
  if (name == "sigmoid") return MaskKind::kSigmoid;
  if (name == "softmax") return MaskKind::kSoftmax;
  throw ConfigError("unknown mask nonlinearity '" + name +
                    "' (expected sigmoid or softmax)");
}

NormKind ParseNormKind(const std::string& name) {
  if (name == "gLN" || name == "gln") return NormKind::kGlobal;
  if (name == "cLN" || name == "cln") return NormKind::kCumulative;
  throw ConfigError("unknown normalization '" + name + "' (expected gLN or cLN)");
}

void ModelConfig::Validate() const {
  auto positive = [](int v, const char* key) {
    if (v <= 0) {
      throw ConfigError(std::string(key) + " must be positive, got " +
                        std::to_string(v));
    }
  };
  positive(n_filters, "n_filters");
  positive(filter_len, "filter_len");
  positive(bottleneck, "bottleneck");
  positive(skip_channels, "skip_channels");
  positive(block_channels, "block_channels");
  positive(kernel, "kernel");
  positive(blocks_per_repeat, "blocks_per_repeat");
  positive(repeats, "repeats");
  positive(sources, "sources");
  positive(sample_rate, "sample_rate");
  if (filter_len % 2 != 0) {
    throw ConfigError("filter_len must be even (decoder stride is L/2), got " +
                      std::to_string(filter_len));
  }
  if (blocks_per_repeat > 30) {
    throw ConfigError("blocks_per_repeat too large for 2^(X-1) dilation");
  }
  if (causal && norm != NormKind::kCumulative) {
    throw ConfigError("causal model requires cLN normalization");
  }
  if (!causal && norm != NormKind::kGlobal) {
    throw ConfigError("non-causal model requires gLN normalization");
  }
  if (encoder == EncoderKind::kPinv && mask != MaskKind::kSoftmax) {
    throw ConfigError("pinv encoder requires softmax masks");
  }
  if (encoder == EncoderKind::kPinv && n_filters < filter_len) {
    throw ConfigError("pinv encoder requires n_filters >= filter_len");
  }
}

ModelConfig ModelConfig::Best() { return ModelConfig{}; }

ModelConfig ModelConfig::BestCausal() {
  ModelConfig c;
  c.causal = true;
  c.norm = NormKind::kCumulative;
  return c;
}

std::vector<NamedTensor> ModelParams::Named() const {
  std::vector<NamedTensor> out;
  if (encoder.defined()) out.push_back({"encoder.weight", encoder});
  out.push_back({"decoder.weight", decoder});
  out.push_back({"input_norm.gamma", input_norm_gamma});
  out.push_back({"input_norm.beta", input_norm_beta});
  out.push_back({"bottleneck.weight", bottleneck_weight});
  out.push_back({"bottleneck.bias", bottleneck_bias});
  for (size_t i = 0; i < blocks.size(); ++i) {
    const BlockParams& b = blocks[i];
    const std::string p = "blocks." + std::to_string(i) + ".";
    out.push_back({p + "in.weight", b.in_weight});
    out.push_back({p + "in.bias", b.in_bias});
    out.push_back({p + "in.prelu", b.in_prelu});
    out.push_back({p + "in.norm.gamma", b.in_norm_gamma});
    out.push_back({p + "in.norm.beta", b.in_norm_beta});
    out.push_back({p + "dw.weight", b.dw_weight});
    out.push_back({p + "dw.prelu", b.dw_prelu});
    out.push_back({p + "dw.norm.gamma", b.dw_norm_gamma});
    out.push_back({p + "dw.norm.beta", b.dw_norm_beta});
    out.push_back({p + "res.weight", b.res_weight});
    out.push_back({p + "res.bias", b.res_bias});
    out.push_back({p + "skip.weight", b.skip_weight});
    out.push_back({p + "skip.bias", b.skip_bias});
  }
  out.push_back({"mask.prelu", mask_prelu});
  out.push_back({"mask.weight", mask_weight});
  out.push_back({"mask.bias", mask_bias});
  return out;
}

int64_t ModelParams::NumScalars() const {
  int64_t n = 0;
  for (const auto& nt : Named()) n += nt.tensor.size();
  return n;
}

ModelParams ModelParams::Clone() const {
  ModelParams c;
  c.config = config;
  auto clone = [](const Tensor& t) { return t.defined() ? t.Clone() : Tensor(); };
  c.encoder = clone(encoder);
  c.decoder = clone(decoder);
  c.input_norm_gamma = clone(input_norm_gamma);
  c.input_norm_beta = clone(input_norm_beta);
  c.bottleneck_weight = clone(bottleneck_weight);
  c.bottleneck_bias = clone(bottleneck_bias);
  for (const BlockParams& b : blocks) {
    BlockParams n;
    n.dilation = b.dilation;
    n.in_weight = clone(b.in_weight);
    n.in_bias = clone(b.in_bias);
    n.in_prelu = clone(b.in_prelu);
    n.in_norm_gamma = clone(b.in_norm_gamma);
    n.in_norm_beta = clone(b.in_norm_beta);
    n.dw_weight = clone(b.dw_weight);
    n.dw_prelu = clone(b.dw_prelu);
    n.dw_norm_gamma = clone(b.dw_norm_gamma);
    n.dw_norm_beta = clone(b.dw_norm_beta);
    n.res_weight = clone(b.res_weight);
    n.res_bias = clone(b.res_bias);
    n.skip_weight = clone(b.skip_weight);
    n.skip_bias = clone(b.skip_bias);
    c.blocks.push_back(std::move(n));
  }
  c.mask_prelu = clone(mask_prelu);
  c.mask_weight = clone(mask_weight);
  c.mask_bias = clone(mask_bias);
  return c;
}

void ModelParams::SetRequiresGrad(bool value) const {
  for (const auto& nt : Named()) {
    Tensor t = nt.tensor;
    t.set_requires_grad(value);
  }
}

namespace {

class Initializer {
 public:
  explicit Initializer(uint64_t seed) : rng_(seed) {}

  // uniform(-a, a) with a = sqrt(1 / fan_in), rounded to float32.
  Tensor Uniform(Shape shape, int64_t fan_in) {
    const double a = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::vector<double> v(NumElements(shape));
    for (double& x : v) {
      // 53 random bits -> [0, 1); independent of the standard library's
      // distribution implementation.
      const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
      x = static_cast<double>(static_cast<float>((2.0 * u - 1.0) * a));
    }
    return Tensor(std::move(shape), std::move(v));
  }

  static Tensor Constant(Shape shape, double value) {
    return Tensor(shape, std::vector<double>(NumElements(shape), value));
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

ModelParams BuildModel(const ModelConfig& config, uint64_t seed) {
  config.Validate();
  const int64_t n = config.n_filters, l = config.filter_len;
  const int64_t b = config.bottleneck, h = config.block_channels;
  const int64_t sc = config.skip_channels, p = config.kernel;
  const int64_t c = config.sources;
  Initializer init(seed);
  ModelParams m;
  m.config = config;
  if (config.encoder != EncoderKind::kPinv) {
    m.encoder = init.Uniform({n, 1, l}, l);
  }
  m.decoder = init.Uniform({n, 1, l}, n);
  m.input_norm_gamma = Initializer::Constant({n, 1}, 1.0);
  m.input_norm_beta = Initializer::Constant({n, 1}, 0.0);
  m.bottleneck_weight = init.Uniform({b, n, 1}, n);
  m.bottleneck_bias = init.Uniform({b}, n);
  for (int r = 0; r < config.repeats; ++r) {
    for (int x = 0; x < config.blocks_per_repeat; ++x) {
      BlockParams blk;
      blk.dilation = 1 << x;
      blk.in_weight = init.Uniform({h, b, 1}, b);
      blk.in_bias = init.Uniform({h}, b);
      blk.in_prelu = Initializer::Constant({1}, 0.25);
      blk.in_norm_gamma = Initializer::Constant({h, 1}, 1.0);
      blk.in_norm_beta = Initializer::Constant({h, 1}, 0.0);
      blk.dw_weight = init.Uniform({h, 1, p}, p);
      blk.dw_prelu = Initializer::Constant({1}, 0.25);
      blk.dw_norm_gamma = Initializer::Constant({h, 1}, 1.0);
      blk.dw_norm_beta = Initializer::Constant({h, 1}, 0.0);
      blk.res_weight = init.Uniform({b, h, 1}, h);
      blk.res_bias = init.Uniform({b}, h);
      blk.skip_weight = init.Uniform({sc, h, 1}, h);
      blk.skip_bias = init.Uniform({sc}, h);
      m.blocks.push_back(std::move(blk));
    }
  }
  m.mask_prelu = Initializer::Constant({1}, 0.25);
  m.mask_weight = init.Uniform({c * n, sc, 1}, sc);
  m.mask_bias = init.Uniform({c * n}, sc);
  return m;
}

int64_t ParamCount(const ModelConfig& config) {
  config.Validate();
  const int64_t n = config.n_filters, l = config.filter_len;
  const int64_t b = config.bottleneck, h = config.block_channels;
  const int64_t sc = config.skip_channels, p = config.kernel;
  const int64_t c = config.sources;
  const int64_t codec = (config.encoder == EncoderKind::kPinv ? 1 : 2) * n * l;
  const int64_t input_norm = 2 * n;
  const int64_t bottleneck = b * n + b;
  const int64_t block = (b * h + h) + 1 + 2 * h  // 1x1-conv, PReLU, norm
                        + h * p + 1 + 2 * h      // D-conv, PReLU, norm
                        + (h * b + b)            // residual path
                        + (h * sc + sc);         // skip path
  const int64_t mask = 1 + sc * c * n + c * n;
  return codec + input_norm + bottleneck + config.num_blocks() * block + mask;
}

int64_t StandardConvParamCount(int64_t in_channels, int64_t out_channels,
                               int64_t kernel) {
  return in_channels * out_channels * kernel;
}

int64_t SeparableConvParamCount(int64_t in_channels, int64_t out_channels,
                                int64_t kernel) {
  return in_channels * kernel + in_channels * out_channels;
}

int64_t ReceptiveFieldFrames(const ModelConfig& config) {
  return 1 + static_cast<int64_t>(config.repeats) * (config.kernel - 1) *
                 ((int64_t{1} << config.blocks_per_repeat) - 1);
}

double ReceptiveFieldSeconds(const ModelConfig& config) {
  const int64_t frames = ReceptiveFieldFrames(config);
  const int64_t samples = (frames - 1) * config.hop() + config.filter_len;
  return static_cast<double>(samples) / config.sample_rate;
}

int64_t NumFrames(const ModelConfig& config, int64_t samples) {
  if (samples < config.filter_len) {
    throw ShapeError("input of " + std::to_string(samples) +
                     " samples is shorter than one window (L=" +
                     std::to_string(config.filter_len) + ")");
  }
  return (samples - config.filter_len) / config.hop() + 1;
}

int64_t PaddedLength(const ModelConfig& config, int64_t samples) {
  const int64_t hop = config.hop();
  const int64_t hops = (samples + hop - 1) / hop;
  return std::max<int64_t>(config.filter_len, hops * hop);
}

Tensor Encode(const ModelParams& params, const Tensor& waveform) {
  const ModelConfig& cfg = params.config;
  if (waveform.rank() != 2 || waveform.dim(0) != 1) {
    throw ShapeError("encode: waveform must be [1 x T], got " +
                     ShapeString(waveform.shape()));
  }
  NumFrames(cfg, waveform.dim(1));  // length check
  ops::Conv1dOptions opt;
  opt.stride = cfg.hop();
  switch (cfg.encoder) {
    case EncoderKind::kLinear:
      return ops::Conv1d(waveform, params.encoder, Tensor(), opt);
    case EncoderKind::kRelu:
      return ops::Relu(ops::Conv1d(waveform, params.encoder, Tensor(), opt));
    case EncoderKind::kPinv:
      return ops::Conv1d(waveform, ops::PseudoInverseKernel(params.decoder),
                         Tensor(), opt);
  }
  throw ConfigError("unknown encoder kind");
}

namespace {

Tensor Normalize(const ModelConfig& cfg, const Tensor& x, const Tensor& gamma,
                 const Tensor& beta) {
  return cfg.norm == NormKind::kCumulative
             ? ops::CumulativeLayerNorm(x, gamma, beta)
             : ops::GlobalLayerNorm(x, gamma, beta);
}

}  // namespace

Tensor SeparateMasks(const ModelParams& params, const Tensor& encoded) {
  const ModelConfig& cfg = params.config;
  if (encoded.rank() != 2 || encoded.dim(0) != cfg.n_filters) {
    throw ShapeError("separate_masks: expected [" +
                     std::to_string(cfg.n_filters) + " x F], got " +
                     ShapeString(encoded.shape()));
  }
  const int64_t frames = encoded.dim(1);
  Tensor y = Normalize(cfg, encoded, params.input_norm_gamma,
                       params.input_norm_beta);
  y = ops::Conv1d(y, params.bottleneck_weight, params.bottleneck_bias);
  std::vector<Tensor> skips;
  skips.reserve(params.blocks.size());
  for (const BlockParams& blk : params.blocks) {
    Tensor h = ops::Conv1d(y, blk.in_weight, blk.in_bias);
    h = ops::Prelu(h, blk.in_prelu);
    h = Normalize(cfg, h, blk.in_norm_gamma, blk.in_norm_beta);
    ops::Conv1dOptions dw;
    dw.dilation = blk.dilation;
    dw.groups = cfg.block_channels;
    const int pad = (cfg.kernel - 1) * blk.dilation;
    if (cfg.causal) {
      dw.pad_left = pad;
    } else {
      dw.pad_left = pad / 2;
      dw.pad_right = pad - pad / 2;
    }
    h = ops::Conv1d(h, blk.dw_weight, Tensor(), dw);
    h = ops::Prelu(h, blk.dw_prelu);
    h = Normalize(cfg, h, blk.dw_norm_gamma, blk.dw_norm_beta);
    skips.push_back(ops::Conv1d(h, blk.skip_weight, blk.skip_bias));
    y = ops::Add(y, ops::Conv1d(h, blk.res_weight, blk.res_bias));
  }
  Tensor s = ops::Prelu(ops::AddN(skips), params.mask_prelu);
  Tensor logits = ops::Conv1d(s, params.mask_weight, params.mask_bias);
  logits = ops::Reshape(logits, {cfg.sources, cfg.n_filters, frames});
  return cfg.mask == MaskKind::kSigmoid ? ops::Sigmoid(logits)
                                        : ops::SoftmaxOverSources(logits);
}

Tensor Decode(const ModelParams& params, const Tensor& masked) {
  return ops::TransposedConv1d(masked, params.decoder, params.config.hop());
}

SeparationTrace SeparateTrace(const ModelParams& params, const Tensor& mixture) {
  const ModelConfig& cfg = params.config;
  if (mixture.rank() != 2 || mixture.dim(0) != 1 || mixture.dim(1) < 1) {
    throw ShapeError("separate: mixture must be [1 x T] with T >= 1, got " +
                     ShapeString(mixture.shape()));
  }
  const int64_t len = mixture.dim(1);
  const int64_t padded_len = PaddedLength(cfg, len);
  Tensor padded = mixture;
  if (padded_len != len) {
    std::vector<double> v(padded_len, 0.0);
    std::copy(mixture.data().begin(), mixture.data().end(), v.begin());
    padded = Tensor(Shape{1, padded_len}, std::move(v));
  }
  SeparationTrace trace;
  trace.encoded = Encode(params, padded);
  trace.masks = SeparateMasks(params, trace.encoded);
  for (int i = 0; i < cfg.sources; ++i) {
    Tensor d = ops::Mul(trace.encoded, ops::Select(trace.masks, i));
    Tensor out = Decode(params, d);
    trace.padded.push_back(out);
    trace.sources.push_back(padded_len == len ? out
                                              : ops::SliceColumns(out, 0, len));
  }
  return trace;
}

std::vector<Tensor> Separate(const ModelParams& params, const Tensor& mixture) {
  return SeparateTrace(params, mixture).sources;
}

std::vector<AudioClip> Forward(const ModelParams& params,
                               const AudioClip& mixture) {
  if (mixture.sample_rate != params.config.sample_rate) {
    throw DataError("mixture sample rate " + std::to_string(mixture.sample_rate) +
                    " Hz does not match model rate " +
                    std::to_string(params.config.sample_rate) + " Hz");
  }
  if (mixture.samples.empty()) throw DataError("empty mixture");
  Tensor x(Shape{1, static_cast<int64_t>(mixture.samples.size())},
           mixture.samples);
  std::vector<AudioClip> out;
  for (const Tensor& s : Separate(params, x)) {
    out.push_back(AudioClip{{s.data().begin(), s.data().end()},
                            mixture.sample_rate});
  }
  return out;
}

}  // namespace ctn
