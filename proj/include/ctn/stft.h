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

#ifndef CTN_STFT_H_
#define CTN_STFT_H_

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

namespace ctn {

// 32 ms window / 8 ms hop at 8 kHz.
struct StftConfig {
  int window = 256;
  int hop = 64;
};

// Frame-major complex spectrogram: bins(frame, bin), num_bins = window/2+1.
struct Spectrogram {
  StftConfig config;
  int64_t num_frames = 0;
  int num_bins = 0;
  int64_t signal_length = 0;  // original samples, restored by Istft
  std::vector<std::complex<double>> bins;

  std::complex<double>& at(int64_t frame, int bin) {
    return bins[frame * num_bins + bin];
  }
  const std::complex<double>& at(int64_t frame, int bin) const {
    return bins[frame * num_bins + bin];
  }
};

// Periodic Hann window of length n.
std::vector<double> HannWindow(int n);

// Real FFT of `x` zero-padded (or truncated) to `n_fft` points.
std::vector<std::complex<double>> Rfft(std::span<const double> x, int n_fft);

// Hann-windowed STFT. The signal is padded with window-hop zeros at both
// ends (and at the tail up to a whole frame) so that every input sample is
// covered by the same number of frames. Requires length >= window.
Spectrogram Stft(std::span<const double> signal, const StftConfig& config = {});

// Weighted overlap-add inverse with squared-window normalization; returns
// `spec.signal_length` samples.
std::vector<double> Istft(const Spectrogram& spec);

}  // namespace ctn

#endif  // CTN_STFT_H_
