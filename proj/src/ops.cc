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

#include "ctn/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ctn/errors.h"

namespace ctn::ops {

namespace {

void Require(bool cond, const std::string& message) {
  if (!cond) throw ShapeError(message);
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  Require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                      ShapeString(a.shape()) + " vs " +
                                      ShapeString(b.shape()));
}

// Number of outputs t in [0, count) with 0 <= t * stride + offset < extent,
// returned as the half-open range [lo, hi).
std::pair<int64_t, int64_t> ValidRange(int64_t count, int64_t stride,
                                       int64_t offset, int64_t extent) {
  int64_t lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  int64_t last = extent - 1 - offset;
  if (last < 0) return {0, 0};
  int64_t hi = std::min(count, last / stride + 1);
  return {lo, std::max(lo, hi)};
}

void CheckPerChannel(const Tensor& param, int64_t channels, const char* what) {
  Require(param.size() == channels,
          std::string(what) + " must hold one value per channel (" +
              std::to_string(channels) + "), got " +
              ShapeString(param.shape()));
}

}  // namespace

Tensor Conv1d(const Tensor& input, const Tensor& kernel, const Tensor& bias,
              const Conv1dOptions& opt) {
  Require(input.rank() == 2, "conv1d: input must be [Cin x T], got " +
                                 ShapeString(input.shape()));
  Require(kernel.rank() == 3, "conv1d: kernel must be [Cout x Cin/g x P], got " +
                                  ShapeString(kernel.shape()));
  if (opt.stride <= 0 || opt.dilation <= 0 || opt.groups <= 0) {
    throw ShapeError("conv1d: stride, dilation and groups must be positive");
  }
  Require(opt.pad_left >= 0 && opt.pad_right >= 0,
          "conv1d: padding must be non-negative");
  const int64_t cin = input.dim(0), len = input.dim(1);
  const int64_t cout = kernel.dim(0), cin_g = kernel.dim(1), taps = kernel.dim(2);
  const int64_t groups = opt.groups;
  Require(cin % groups == 0 && cout % groups == 0,
          "conv1d: channels " + std::to_string(cin) + "->" +
              std::to_string(cout) + " not divisible by groups " +
              std::to_string(groups));
  Require(cin_g == cin / groups,
          "conv1d: kernel " + ShapeString(kernel.shape()) +
              " does not match input channels " + std::to_string(cin) +
              " with groups " + std::to_string(groups));
  Require(taps >= 1, "conv1d: kernel size must be positive");
  const int64_t span = (taps - 1) * opt.dilation + 1;
  const int64_t padded = len + opt.pad_left + opt.pad_right;
  Require(padded >= span, "conv1d: padded length " + std::to_string(padded) +
                              " shorter than kernel span " +
                              std::to_string(span));
  if (bias.defined()) CheckPerChannel(bias, cout, "conv1d bias");

  const int64_t out_len = (padded - span) / opt.stride + 1;
  const int64_t cout_g = cout / groups;
  const int64_t stride = opt.stride;
  Tensor out(Shape{cout, out_len});
  {
    auto y = out.mutable_data();
    auto x = input.data();
    auto k = kernel.data();
    for (int64_t o = 0; o < cout; ++o) {
      double* yr = y.data() + o * out_len;
      if (bias.defined()) std::fill(yr, yr + out_len, bias.data()[o]);
      const int64_t g = o / cout_g;
      for (int64_t c = 0; c < cin_g; ++c) {
        const double* xr = x.data() + (g * cin_g + c) * len;
        for (int64_t p = 0; p < taps; ++p) {
          const double w = k[(o * cin_g + c) * taps + p];
          const int64_t offset = p * opt.dilation - opt.pad_left;
          auto [lo, hi] = ValidRange(out_len, stride, offset, len);
          if (stride == 1) {
            const double* xs = xr + offset;
            for (int64_t t = lo; t < hi; ++t) yr[t] += w * xs[t];
          } else {
            for (int64_t t = lo; t < hi; ++t) yr[t] += w * xr[t * stride + offset];
          }
        }
      }
    }
  }

  RecordOp({&input, &kernel, &bias}, out,
           [=](std::span<const double> gy) mutable {
             auto x = input.data();
             auto k = kernel.data();
             const bool need_x = input.requires_grad();
             const bool need_k = kernel.requires_grad();
             std::span<double> gx, gk;
             if (need_x) gx = input.mutable_grad();
             if (need_k) gk = kernel.mutable_grad();
             if (bias.defined() && bias.requires_grad()) {
               auto gb = bias.mutable_grad();
               for (int64_t o = 0; o < cout; ++o) {
                 double s = 0.0;
                 const double* gr = gy.data() + o * out_len;
                 for (int64_t t = 0; t < out_len; ++t) s += gr[t];
                 gb[o] += s;
               }
             }
             if (!need_x && !need_k) return;
             for (int64_t o = 0; o < cout; ++o) {
               const double* gr = gy.data() + o * out_len;
               const int64_t g = o / cout_g;
               for (int64_t c = 0; c < cin_g; ++c) {
                 const int64_t row = (g * cin_g + c) * len;
                 for (int64_t p = 0; p < taps; ++p) {
                   const int64_t ki = (o * cin_g + c) * taps + p;
                   const int64_t offset = p * opt.dilation - opt.pad_left;
                   auto [lo, hi] = ValidRange(out_len, stride, offset, len);
                   if (need_x) {
                     const double w = k[ki];
                     double* gxr = gx.data() + row;
                     for (int64_t t = lo; t < hi; ++t) {
                       gxr[t * stride + offset] += w * gr[t];
                     }
                   }
                   if (need_k) {
                     const double* xr = x.data() + row;
                     double s = 0.0;
                     for (int64_t t = lo; t < hi; ++t) {
                       s += gr[t] * xr[t * stride + offset];
                     }
                     gk[ki] += s;
                   }
                 }
               }
             }
           });
  return out;
}

Tensor TransposedConv1d(const Tensor& input, const Tensor& kernel, int stride) {
  Require(input.rank() == 2, "transposed_conv1d: input must be [Cin x T], got " +
                                 ShapeString(input.shape()));
  Require(kernel.rank() == 3,
          "transposed_conv1d: kernel must be [Cin x Cout x P], got " +
              ShapeString(kernel.shape()));
  if (stride <= 0) throw ShapeError("transposed_conv1d: stride must be positive");
  const int64_t cin = input.dim(0), len = input.dim(1);
  Require(len > 0 && cin > 0, "transposed_conv1d: empty input");
  Require(kernel.dim(0) == cin, "transposed_conv1d: kernel " +
                                    ShapeString(kernel.shape()) +
                                    " does not match input channels " +
                                    std::to_string(cin));
  const int64_t cout = kernel.dim(1), taps = kernel.dim(2);
  Require(stride <= taps, "transposed_conv1d: stride " + std::to_string(stride) +
                              " exceeds kernel size " + std::to_string(taps));
  const int64_t out_len = (len - 1) * stride + taps;
  Tensor out(Shape{cout, out_len});
  {
    auto y = out.mutable_data();
    auto x = input.data();
    auto k = kernel.data();
    for (int64_t o = 0; o < cout; ++o) {
      double* yr = y.data() + o * out_len;
      for (int64_t c = 0; c < cin; ++c) {
        const double* kr = k.data() + (c * cout + o) * taps;
        const double* xr = x.data() + c * len;
        for (int64_t t = 0; t < len; ++t) {
          const double v = xr[t];
          double* seg = yr + t * stride;
          for (int64_t p = 0; p < taps; ++p) seg[p] += v * kr[p];
        }
      }
    }
  }
  RecordOp({&input, &kernel}, out, [=](std::span<const double> gy) mutable {
    auto x = input.data();
    auto k = kernel.data();
    const bool need_x = input.requires_grad();
    const bool need_k = kernel.requires_grad();
    std::span<double> gx, gk;
    if (need_x) gx = input.mutable_grad();
    if (need_k) gk = kernel.mutable_grad();
    for (int64_t o = 0; o < cout; ++o) {
      const double* gr = gy.data() + o * out_len;
      for (int64_t c = 0; c < cin; ++c) {
        const double* kr = k.data() + (c * cout + o) * taps;
        const double* xr = x.data() + c * len;
        for (int64_t t = 0; t < len; ++t) {
          const double* seg = gr + t * stride;
          if (need_x) {
            double s = 0.0;
            for (int64_t p = 0; p < taps; ++p) s += kr[p] * seg[p];
            gx[c * len + t] += s;
          }
          if (need_k) {
            double* gkr = gk.data() + (c * cout + o) * taps;
            const double v = xr[t];
            for (int64_t p = 0; p < taps; ++p) gkr[p] += v * seg[p];
          }
        }
      }
    }
  });
  return out;
}

namespace {
thread_local ActivationPatternRecorder* active_recorder = nullptr;
}  // namespace

ActivationPatternRecorder::ActivationPatternRecorder() : previous_(active_recorder) {
  active_recorder = this;
}

ActivationPatternRecorder::~ActivationPatternRecorder() { active_recorder = previous_; }

void ActivationPatternRecorder::Note(std::span<const double> x, bool strict) {
  if (active_recorder == nullptr) return;
  auto& p = active_recorder->pattern_;
  for (double v : x) p.push_back(strict ? v > 0.0 : v >= 0.0);
}

Tensor Prelu(const Tensor& x, const Tensor& alpha) {
  ActivationPatternRecorder::Note(x.data(), /*strict=*/false);
  const int64_t n = x.size();
  int64_t channels = 1;
  if (alpha.size() != 1) {
    Require(x.rank() >= 1 && alpha.size() == x.dim(0),
            "prelu: alpha " + ShapeString(alpha.shape()) +
                " must be a scalar or per-channel for input " +
                ShapeString(x.shape()));
    channels = alpha.size();
  }
  const int64_t per_channel = channels > 0 ? n / channels : 0;
  Tensor out(x.shape());
  {
    auto xv = x.data();
    auto a = alpha.data();
    auto y = out.mutable_data();
    for (int64_t i = 0; i < n; ++i) {
      const double v = xv[i];
      y[i] = v >= 0.0 ? v : a[channels == 1 ? 0 : i / per_channel] * v;
    }
  }
  RecordOp({&x, &alpha}, out, [=](std::span<const double> gy) mutable {
    auto xv = x.data();
    auto a = alpha.data();
    if (x.requires_grad()) {
      auto gx = x.mutable_grad();
      for (int64_t i = 0; i < n; ++i) {
        gx[i] += xv[i] >= 0.0 ? gy[i]
                              : a[channels == 1 ? 0 : i / per_channel] * gy[i];
      }
    }
    if (alpha.requires_grad()) {
      auto ga = alpha.mutable_grad();
      for (int64_t i = 0; i < n; ++i) {
        if (xv[i] < 0.0) ga[channels == 1 ? 0 : i / per_channel] += gy[i] * xv[i];
      }
    }
  });
  return out;
}

Tensor Relu(const Tensor& x) {
  ActivationPatternRecorder::Note(x.data(), /*strict=*/true);
  Tensor out(x.shape());
  auto xv = x.data();
  auto y = out.mutable_data();
  for (int64_t i = 0; i < x.size(); ++i) y[i] = xv[i] > 0.0 ? xv[i] : 0.0;
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto xv = x.data();
    auto gx = x.mutable_grad();
    for (size_t i = 0; i < gy.size(); ++i) {
      if (xv[i] > 0.0) gx[i] += gy[i];
    }
  });
  return out;
}

Tensor Sigmoid(const Tensor& x) {
  Tensor out(x.shape());
  auto xv = x.data();
  auto y = out.mutable_data();
  for (int64_t i = 0; i < x.size(); ++i) {
    const double v = xv[i];
    if (v >= 0.0) {
      y[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y[i] = e / (1.0 + e);
    }
  }
  Tensor saved = out;
  RecordOp({&x}, out, [x, saved](std::span<const double> gy) mutable {
    auto y = saved.data();
    auto gx = x.mutable_grad();
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * y[i] * (1.0 - y[i]);
  });
  return out;
}

Tensor SoftmaxOverSources(const Tensor& x) {
  Require(x.rank() >= 1 && x.dim(0) >= 1,
          "softmax: input needs a leading source axis, got " +
              ShapeString(x.shape()));
  const int64_t sources = x.dim(0);
  const int64_t inner = x.size() / sources;
  Tensor out(x.shape());
  auto xv = x.data();
  auto y = out.mutable_data();
  for (int64_t m = 0; m < inner; ++m) {
    double peak = xv[m];
    for (int64_t c = 1; c < sources; ++c) peak = std::max(peak, xv[c * inner + m]);
    double total = 0.0;
    for (int64_t c = 0; c < sources; ++c) {
      const double e = std::exp(xv[c * inner + m] - peak);
      y[c * inner + m] = e;
      total += e;
    }
    for (int64_t c = 0; c < sources; ++c) y[c * inner + m] /= total;
  }
  Tensor saved = out;
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto y = saved.data();
    auto gx = x.mutable_grad();
    for (int64_t m = 0; m < inner; ++m) {
      double dot = 0.0;
      for (int64_t c = 0; c < sources; ++c) dot += y[c * inner + m] * gy[c * inner + m];
      for (int64_t c = 0; c < sources; ++c) {
        const int64_t i = c * inner + m;
        gx[i] += y[i] * (gy[i] - dot);
      }
    }
  });
  return out;
}

Tensor Activate(Activation kind, const Tensor& x) {
  switch (kind) {
    case Activation::kSigmoid:
      return Sigmoid(x);
    case Activation::kSoftmaxOverSources:
      return SoftmaxOverSources(x);
    case Activation::kRelu:
      return Relu(x);
  }
  throw ShapeError("unknown activation");
}

namespace {

// Shared implementation of gLN (one statistics window spanning all frames)
// and cLN (prefix windows). Entries are shifted by F[0][0] before summing so
// that constant input yields an exactly zero centered term.
Tensor LayerNorm(const Tensor& features, const Tensor& gamma,
                 const Tensor& beta, double eps, bool cumulative) {
  const char* name = cumulative ? "cumulative_layer_norm" : "global_layer_norm";
  Require(features.rank() == 2 && features.dim(0) >= 1 && features.dim(1) >= 1,
          std::string(name) + ": features must be non-empty [N x T], got " +
              ShapeString(features.shape()));
  const int64_t chans = features.dim(0), frames = features.dim(1);
  CheckPerChannel(gamma, chans, "layer norm gamma");
  CheckPerChannel(beta, chans, "layer norm beta");

  auto f = features.data();
  const double shift = f[0];
  // One (mean, inv_std) pair per statistics window.
  const int64_t windows = cumulative ? frames : 1;
  std::vector<double> mean(windows), inv_std(windows);
  {
    double s1 = 0.0, s2 = 0.0;
    if (cumulative) {
      for (int64_t t = 0; t < frames; ++t) {
        for (int64_t n = 0; n < chans; ++n) {
          const double v = f[n * frames + t] - shift;
          s1 += v;
          s2 += v * v;
        }
        const double count = static_cast<double>(chans * (t + 1));
        const double m = s1 / count;
        const double var = std::max(0.0, s2 / count - m * m);
        mean[t] = m;
        inv_std[t] = 1.0 / std::sqrt(var + eps);
      }
    } else {
      for (int64_t i = 0; i < chans * frames; ++i) {
        const double v = f[i] - shift;
        s1 += v;
        s2 += v * v;
      }
      const double count = static_cast<double>(chans * frames);
      const double m = s1 / count;
      const double var = std::max(0.0, s2 / count - m * m);
      mean[0] = m;
      inv_std[0] = 1.0 / std::sqrt(var + eps);
    }
  }

  Tensor out(features.shape());
  auto y = out.mutable_data();
  auto g = gamma.data();
  auto b = beta.data();
  for (int64_t n = 0; n < chans; ++n) {
    for (int64_t t = 0; t < frames; ++t) {
      const int64_t w = cumulative ? t : 0;
      const int64_t i = n * frames + t;
      y[i] = ((f[i] - shift) - mean[w]) * inv_std[w] * g[n] + b[n];
    }
  }

  RecordOp({&features, &gamma, &beta}, out,
           [=](std::span<const double> gy) mutable {
             auto f = features.data();
             auto g = gamma.data();
             if (gamma.requires_grad() || beta.requires_grad()) {
               std::span<double> gg, gb;
               if (gamma.requires_grad()) gg = gamma.mutable_grad();
               if (beta.requires_grad()) gb = beta.mutable_grad();
               for (int64_t n = 0; n < chans; ++n) {
                 double sg = 0.0, sb = 0.0;
                 for (int64_t t = 0; t < frames; ++t) {
                   const int64_t w = cumulative ? t : 0;
                   const int64_t i = n * frames + t;
                   sg += gy[i] * ((f[i] - shift) - mean[w]) * inv_std[w];
                   sb += gy[i];
                 }
                 if (!gg.empty()) gg[n] += sg;
                 if (!gb.empty()) gb[n] += sb;
               }
             }
             if (!features.requires_grad()) return;
             // Per window: gradients w.r.t. the shifted sums S1 and S2.
             std::vector<double> d_s1(windows, 0.0), d_s2(windows, 0.0);
             std::vector<double> sum_g(windows, 0.0), sum_gc(windows, 0.0);
             for (int64_t n = 0; n < chans; ++n) {
               for (int64_t t = 0; t < frames; ++t) {
                 const int64_t w = cumulative ? t : 0;
                 const int64_t i = n * frames + t;
                 const double gn = gy[i] * g[n];
                 sum_g[w] += gn;
                 sum_gc[w] += gn * ((f[i] - shift) - mean[w]);
               }
             }
             for (int64_t w = 0; w < windows; ++w) {
               const double count =
                   static_cast<double>(chans * (cumulative ? w + 1 : frames));
               const double is = inv_std[w];
               const double d_mean = -is * sum_g[w];
               const double d_var = -0.5 * is * is * is * sum_gc[w];
               d_s1[w] = (d_mean - 2.0 * mean[w] * d_var) / count;
               d_s2[w] = d_var / count;
             }
             // Frame t contributes to every window k >= t.
             if (cumulative) {
               for (int64_t w = windows - 2; w >= 0; --w) {
                 d_s1[w] += d_s1[w + 1];
                 d_s2[w] += d_s2[w + 1];
               }
             }
             auto gf = features.mutable_grad();
             for (int64_t n = 0; n < chans; ++n) {
               for (int64_t t = 0; t < frames; ++t) {
                 const int64_t w = cumulative ? t : 0;
                 const int64_t i = n * frames + t;
                 gf[i] += gy[i] * g[n] * inv_std[w] + d_s1[w] +
                          2.0 * (f[i] - shift) * d_s2[w];
               }
             }
           });
  return out;
}

}  // namespace

Tensor GlobalLayerNorm(const Tensor& features, const Tensor& gamma,
                       const Tensor& beta, double eps) {
  return LayerNorm(features, gamma, beta, eps, /*cumulative=*/false);
}

Tensor CumulativeLayerNorm(const Tensor& features, const Tensor& gamma,
                           const Tensor& beta, double eps) {
  return LayerNorm(features, gamma, beta, eps, /*cumulative=*/true);
}

Tensor Add(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "add");
  Tensor out(a.shape());
  auto y = out.mutable_data();
  auto av = a.data();
  auto bv = b.data();
  for (int64_t i = 0; i < a.size(); ++i) y[i] = av[i] + bv[i];
  RecordOp({&a, &b}, out, [=](std::span<const double> gy) mutable {
    for (const Tensor* t : {&a, &b}) {
      if (!t->requires_grad()) continue;
      auto gt = t->mutable_grad();
      for (size_t i = 0; i < gy.size(); ++i) gt[i] += gy[i];
    }
  });
  return out;
}

Tensor Mul(const Tensor& a, const Tensor& b) {
  RequireSameShape(a, b, "mul");
  Tensor out(a.shape());
  auto y = out.mutable_data();
  auto av = a.data();
  auto bv = b.data();
  for (int64_t i = 0; i < a.size(); ++i) y[i] = av[i] * bv[i];
  RecordOp({&a, &b}, out, [=](std::span<const double> gy) mutable {
    if (a.requires_grad()) {
      auto ga = a.mutable_grad();
      auto bv = b.data();
      for (size_t i = 0; i < gy.size(); ++i) ga[i] += gy[i] * bv[i];
    }
    if (b.requires_grad()) {
      auto gb = b.mutable_grad();
      auto av = a.data();
      for (size_t i = 0; i < gy.size(); ++i) gb[i] += gy[i] * av[i];
    }
  });
  return out;
}

Tensor Scale(const Tensor& x, double factor) {
  Tensor out(x.shape());
  auto y = out.mutable_data();
  auto xv = x.data();
  for (int64_t i = 0; i < x.size(); ++i) y[i] = xv[i] * factor;
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto gx = x.mutable_grad();
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * factor;
  });
  return out;
}

Tensor AddN(const std::vector<Tensor>& terms) {
  Require(!terms.empty(), "add_n: no terms");
  for (const Tensor& t : terms) RequireSameShape(terms[0], t, "add_n");
  Tensor out(terms[0].shape());
  auto y = out.mutable_data();
  for (const Tensor& t : terms) {
    auto v = t.data();
    for (int64_t i = 0; i < out.size(); ++i) y[i] += v[i];
  }
  Tape* tape = nullptr;
  for (const Tensor& t : terms) {
    if (Tape* tp = Tape::ForInputs({&t})) tape = tp;
  }
  if (tape != nullptr) {
    tape->Record(out, [terms](std::span<const double> gy) mutable {
      for (const Tensor& t : terms) {
        if (!t.requires_grad()) continue;
        auto gt = t.mutable_grad();
        for (size_t i = 0; i < gy.size(); ++i) gt[i] += gy[i];
      }
    });
  }
  return out;
}

Tensor Sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.data()) s += v;
  Tensor out = Tensor::Scalar(s);
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto gx = x.mutable_grad();
    for (double& g : gx) g += gy[0];
  });
  return out;
}

Tensor Reshape(const Tensor& x, Shape shape) {
  Require(NumElements(shape) == x.size(),
          "reshape: cannot view " + ShapeString(x.shape()) + " as " +
              ShapeString(shape));
  auto v = x.data();
  Tensor out(std::move(shape), std::vector<double>(v.begin(), v.end()));
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto gx = x.mutable_grad();
    for (size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
  });
  return out;
}

Tensor Select(const Tensor& x, int64_t index) {
  Require(x.rank() >= 1 && index >= 0 && index < x.dim(0),
          "select: index " + std::to_string(index) + " out of range for " +
              ShapeString(x.shape()));
  Shape rest(x.shape().begin() + 1, x.shape().end());
  const int64_t inner = NumElements(rest);
  auto v = x.data().subspan(index * inner, inner);
  Tensor out(std::move(rest), std::vector<double>(v.begin(), v.end()));
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto gx = x.mutable_grad().subspan(index * inner, inner);
    for (int64_t i = 0; i < inner; ++i) gx[i] += gy[i];
  });
  return out;
}

Tensor SliceColumns(const Tensor& x, int64_t start, int64_t length) {
  Require(x.rank() == 2, "slice: input must be [R x T], got " +
                             ShapeString(x.shape()));
  const int64_t rows = x.dim(0), cols = x.dim(1);
  Require(start >= 0 && length >= 0 && start + length <= cols,
          "slice: columns [" + std::to_string(start) + ", " +
              std::to_string(start + length) + ") out of range for " +
              ShapeString(x.shape()));
  Tensor out(Shape{rows, length});
  auto y = out.mutable_data();
  auto v = x.data();
  for (int64_t r = 0; r < rows; ++r) {
    std::copy_n(v.data() + r * cols + start, length, y.data() + r * length);
  }
  RecordOp({&x}, out, [=](std::span<const double> gy) mutable {
    auto gx = x.mutable_grad();
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t c = 0; c < length; ++c) {
        gx[r * cols + start + c] += gy[r * length + c];
      }
    }
  });
  return out;
}

namespace {

// Inverse of a symmetric positive definite [n x n] matrix by Gauss-Jordan
// elimination with partial pivoting.
std::vector<double> Invert(std::vector<double> a, int64_t n) {
  std::vector<double> inv(n * n, 0.0);
  for (int64_t i = 0; i < n; ++i) inv[i * n + i] = 1.0;
  for (int64_t col = 0; col < n; ++col) {
    int64_t pivot = col;
    for (int64_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) {
      throw NumericError("pseudo-inverse: basis Gram matrix is singular");
    }
    if (pivot != col) {
      for (int64_t c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
        std::swap(inv[col * n + c], inv[pivot * n + c]);
      }
    }
    const double d = 1.0 / a[col * n + col];
    for (int64_t c = 0; c < n; ++c) {
      a[col * n + c] *= d;
      inv[col * n + c] *= d;
    }
    for (int64_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a[r * n + col];
      if (factor == 0.0) continue;
      for (int64_t c = 0; c < n; ++c) {
        a[r * n + c] -= factor * a[col * n + c];
        inv[r * n + c] -= factor * inv[col * n + c];
      }
    }
  }
  return inv;
}

}  // namespace

Tensor PseudoInverseKernel(const Tensor& basis) {
  Require(basis.rank() == 3 && basis.dim(1) == 1,
          "pseudo-inverse: basis must be [N x 1 x L], got " +
              ShapeString(basis.shape()));
  const int64_t rows = basis.dim(0), len = basis.dim(2);
  Require(rows >= len, "pseudo-inverse: needs N >= L (N=" +
                           std::to_string(rows) + ", L=" +
                           std::to_string(len) + ")");
  auto v = basis.data();
  std::vector<double> gram(len * len, 0.0);
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t i = 0; i < len; ++i) {
      for (int64_t j = 0; j < len; ++j) {
        gram[i * len + j] += v[r * len + i] * v[r * len + j];
      }
    }
  }
  std::vector<double> inv = Invert(gram, len);
  Tensor out(basis.shape());
  auto k = out.mutable_data();
  for (int64_t r = 0; r < rows; ++r) {
    for (int64_t j = 0; j < len; ++j) {
      double s = 0.0;
      for (int64_t i = 0; i < len; ++i) s += v[r * len + i] * inv[i * len + j];
      k[r * len + j] = s;
    }
  }
  RecordOp({&basis}, out, [=](std::span<const double> gk) mutable {
    auto v = basis.data();
    auto gv = basis.mutable_grad();
    // K = V A with A = G^{-1}, G = V^T V.
    // dV += gK A;  dA = V^T gK;  dG = -A dA A;  dV += V (dG + dG^T).
    std::vector<double> d_a(len * len, 0.0);
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < len; ++j) s += gk[r * len + j] * inv[i * len + j];
        gv[r * len + i] += s;
        for (int64_t j = 0; j < len; ++j) d_a[i * len + j] += v[r * len + i] * gk[r * len + j];
      }
    }
    std::vector<double> tmp(len * len, 0.0), d_g(len * len, 0.0);
    for (int64_t i = 0; i < len; ++i)
      for (int64_t j = 0; j < len; ++j) {
        double s = 0.0;
        for (int64_t m = 0; m < len; ++m) s += inv[i * len + m] * d_a[m * len + j];
        tmp[i * len + j] = s;
      }
    for (int64_t i = 0; i < len; ++i)
      for (int64_t j = 0; j < len; ++j) {
        double s = 0.0;
        for (int64_t m = 0; m < len; ++m) s += tmp[i * len + m] * inv[m * len + j];
        d_g[i * len + j] = -s;
      }
    for (int64_t r = 0; r < rows; ++r) {
      for (int64_t i = 0; i < len; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < len; ++j) {
          s += v[r * len + j] * (d_g[j * len + i] + d_g[i * len + j]);
        }
        gv[r * len + i] += s;
      }
    }
  });
  return out;
}

}  // namespace ctn::ops
