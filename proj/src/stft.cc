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

#include "ctn/stft.h"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "ctn/errors.h"

namespace ctn {

namespace {

// FFTW planning is not thread-safe; execution of distinct plans is.
std::mutex g_plan_mutex;

class RealFft {
 public:
  explicit RealFft(int n) : n_(n) {
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
    std::lock_guard<std::mutex> lock(g_plan_mutex);
    forward_ = fftw_plan_dft_r2c_1d(n, in_, out_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(n, out_, in_, FFTW_ESTIMATE);
  }
  ~RealFft() {
    {
      std::lock_guard<std::mutex> lock(g_plan_mutex);
      fftw_destroy_plan(forward_);
      fftw_destroy_plan(inverse_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* real() { return in_; }
  std::complex<double>* spectrum() {
    return reinterpret_cast<std::complex<double>*>(out_);
  }
  void Forward() { fftw_execute(forward_); }
  // Unnormalized: result is n times the inverse DFT.
  void Inverse() { fftw_execute(inverse_); }

 private:
  int n_;
  double* in_;
  fftw_complex* out_;
  fftw_plan forward_;
  fftw_plan inverse_;
};

}  // namespace

std::vector<double> HannWindow(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / n);
  }
  return w;
}

std::vector<std::complex<double>> Rfft(std::span<const double> x, int n_fft) {
  if (n_fft < 2) throw ShapeError("rfft: size must be >= 2");
  RealFft fft(n_fft);
  for (int i = 0; i < n_fft; ++i) {
    fft.real()[i] = i < static_cast<int>(x.size()) ? x[i] : 0.0;
  }
  fft.Forward();
  return {fft.spectrum(), fft.spectrum() + n_fft / 2 + 1};
}

Spectrogram Stft(std::span<const double> signal, const StftConfig& config) {
  const int win = config.window, hop = config.hop;
  if (win < 2 || hop < 1 || hop > win) throw ShapeError("stft: bad window/hop");
  const int64_t len = static_cast<int64_t>(signal.size());
  if (len < win) {
    throw ShapeError("stft: signal of " + std::to_string(len) +
                     " samples shorter than the window (" + std::to_string(win) + ")");
  }
  const int64_t pad = win - hop;
  int64_t padded = len + 2 * pad;
  const int64_t frames = (padded - win + hop - 1) / hop + 1;
  padded = (frames - 1) * hop + win;
  std::vector<double> x(padded, 0.0);
  std::copy(signal.begin(), signal.end(), x.begin() + pad);

  const std::vector<double> window = HannWindow(win);
  Spectrogram spec;
  spec.config = config;
  spec.num_frames = frames;
  spec.num_bins = win / 2 + 1;
  spec.signal_length = len;
  spec.bins.resize(frames * spec.num_bins);
  RealFft fft(win);
  for (int64_t f = 0; f < frames; ++f) {
    for (int i = 0; i < win; ++i) fft.real()[i] = x[f * hop + i] * window[i];
    fft.Forward();
    std::copy_n(fft.spectrum(), spec.num_bins, spec.bins.begin() + f * spec.num_bins);
  }
  return spec;
}

std::vector<double> Istft(const Spectrogram& spec) {
  const int win = spec.config.window, hop = spec.config.hop;
  const int64_t pad = win - hop;
  const int64_t padded = (spec.num_frames - 1) * hop + win;
  std::vector<double> y(padded, 0.0), norm(padded, 0.0);
  const std::vector<double> window = HannWindow(win);
  RealFft fft(win);
  for (int64_t f = 0; f < spec.num_frames; ++f) {
    std::copy_n(spec.bins.begin() + f * spec.num_bins, spec.num_bins, fft.spectrum());
    fft.Inverse();
    for (int i = 0; i < win; ++i) {
      y[f * hop + i] += fft.real()[i] / win * window[i];
      norm[f * hop + i] += window[i] * window[i];
    }
  }
  std::vector<double> out(spec.signal_length);
  for (int64_t i = 0; i < spec.signal_length; ++i) {
    const double n = norm[i + pad];
    out[i] = n > 1e-12 ? y[i + pad] / n : 0.0;
  }
  return out;
}

}  // namespace ctn
