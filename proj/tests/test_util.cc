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

#include "test_util.h"

#include <atomic>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "ctn/audio.h"
#include "ctn/ops.h"

namespace ctn::testing {

Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double lo, double hi) {
  return Tensor(shape, RandomVector(static_cast<size_t>(NumElements(shape)), rng, lo, hi));
}

std::vector<double> RandomVector(size_t n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

GradCheckResult GradCheck(const std::function<Tensor()>& f,
                          const std::vector<Tensor>& inputs, double step,
                          int64_t max_elements,
                          const std::function<std::vector<int>()>& signature) {
  struct Eval {
    double value;
    std::vector<bool> pattern;
    std::vector<int> signature;
  };
  auto evaluate = [&]() {
    ops::ActivationPatternRecorder recorder;
    const double value = f().item();
    return Eval{value, recorder.pattern(), signature ? signature() : std::vector<int>()};
  };
  const Eval base = evaluate();
  for (const Tensor& t : inputs) {
    const_cast<Tensor&>(t).set_requires_grad(true);
    t.ClearGrad();
  }
  {
    Tape tape;
    Tape::Scope scope(tape);
    const Tensor out = f();
    tape.Backward(out);
  }
  GradCheckResult result;
  double pooled_diff2 = 0.0, pooled_a2 = 0.0, pooled_n2 = 0.0;
  for (size_t k = 0; k < inputs.size(); ++k) {
    Tensor x = inputs[k];
    std::vector<double> analytic(x.size(), 0.0);
    if (x.has_grad()) analytic.assign(x.grad().begin(), x.grad().end());
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    const int64_t stride =
        max_elements > 0 && x.size() > max_elements ? x.size() / max_elements : 1;
    for (int64_t i = 0; i < x.size(); i += stride) {
      const double saved = x.data()[i];
      x.mutable_data()[i] = saved + step;
      const Eval up = evaluate();
      x.mutable_data()[i] = saved - step;
      const Eval down = evaluate();
      x.mutable_data()[i] = saved;
      if (up.pattern != base.pattern || down.pattern != base.pattern ||
          up.signature != base.signature || down.signature != base.signature) {
        ++result.skipped_kinks;
        continue;
      }
      ++result.checked;
      const double numeric = (up.value - down.value) / (2.0 * step);
      diff2 += (analytic[i] - numeric) * (analytic[i] - numeric);
      a2 += analytic[i] * analytic[i];
      n2 += numeric * numeric;
    }
    pooled_diff2 += diff2;
    pooled_a2 += a2;
    pooled_n2 += n2;
    const double rel =
        std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    if (rel >= result.max_rel_error) {
      result.max_rel_error = rel;
      result.worst = "input " + std::to_string(k);
    }
  }
  result.pooled_rel_error =
      std::sqrt(pooled_diff2) /
      std::max({std::sqrt(pooled_a2), std::sqrt(pooled_n2), 1e-12});
  return result;
}

ModelConfig MicroConfig(bool causal) {
  ModelConfig c;
  c.n_filters = 64;
  c.filter_len = 16;
  c.bottleneck = 32;
  c.skip_channels = 32;
  c.block_channels = 64;
  c.kernel = 3;
  c.blocks_per_repeat = 6;
  c.repeats = 2;
  c.sources = 2;
  c.causal = causal;
  c.norm = causal ? NormKind::kCumulative : NormKind::kGlobal;
  return c;
}

std::vector<double> SyntheticVoice(std::mt19937_64& rng, int64_t samples, int sample_rate) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double f0 = 90.0 + 220.0 * u(rng);
  const double glide = (u(rng) - 0.5) * 0.4;  // relative pitch change over the clip
  const double syllable_hz = 2.0 + 4.0 * u(rng);
  const double env_phase = u(rng) * 2.0 * std::numbers::pi;
  double amps[6];
  for (double& a : amps) a = 0.2 + 0.8 * u(rng);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x(samples);
  double phase = 0.0;
  for (int64_t t = 0; t < samples; ++t) {
    const double time = static_cast<double>(t) / sample_rate;
    const double progress = static_cast<double>(t) / std::max<int64_t>(1, samples);
    phase += 2.0 * std::numbers::pi * f0 * (1.0 + glide * progress) / sample_rate;
    double v = 0.0;
    for (int h = 0; h < 6; ++h) v += amps[h] / (h + 1) * std::sin((h + 1) * phase);
    const double env = 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * syllable_hz * time +
                                            env_phase);
    x[t] = 0.25 * env * v + noise(rng);
  }
  return x;
}

void WriteSyntheticPools(const std::string& root, int speakers, int files, double seconds,
                         uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int64_t n = static_cast<int64_t>(seconds * 8000);
  for (int s = 0; s < speakers; ++s) {
    const auto dir = std::filesystem::path(root) / ("spk" + std::to_string(s));
    std::filesystem::create_directories(dir);
    for (int f = 0; f < files; ++f) {
      WriteWav((dir / ("utt" + std::to_string(f) + ".wav")).string(),
               AudioClip{SyntheticVoice(rng, n), 8000}, WavEncoding::kFloat32);
    }
  }
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::string MakeTempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("ctn_" + tag + "_" + std::to_string(rd()) + "_" +
                    std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace ctn::testing
