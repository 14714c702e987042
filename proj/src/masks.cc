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

#include "ctn/masks.h"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ctn/errors.h"

namespace ctn {

std::string ToString(IdealMaskKind kind) {
  switch (kind) {
    case IdealMaskKind::kIbm: return "ibm";
    case IdealMaskKind::kIrm: return "irm";
    case IdealMaskKind::kWfm: return "wfm";
  }
  return "?";
}

IdealMaskKind ParseIdealMaskKind(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "ibm") return IdealMaskKind::kIbm;
  if (lower == "irm") return IdealMaskKind::kIrm;
  if (lower == "wfm") return IdealMaskKind::kWfm;
  throw ConfigError("unknown oracle '" + name + "' (expected ibm, irm or wfm)");
}

IdealMaskResult ApplyIdealMask(IdealMaskKind kind,
                               const std::vector<std::vector<double>>& sources,
                               const StftConfig& config) {
  if (sources.empty()) throw DataError("ideal mask: no sources");
  const size_t len = sources[0].size();
  bool any_energy = false;
  for (const auto& s : sources) {
    if (s.size() != len) throw DataError("ideal mask: sources differ in length");
    for (double v : s) any_energy |= v != 0.0;
  }
  if (!any_energy) throw DataError("ideal mask: all sources are silent");

  const size_t c = sources.size();
  std::vector<double> mixture(len, 0.0);
  for (const auto& s : sources) {
    for (size_t i = 0; i < len; ++i) mixture[i] += s[i];
  }
  std::vector<Spectrogram> specs;
  for (const auto& s : sources) specs.push_back(Stft(s, config));
  const Spectrogram mix_spec = Stft(mixture, config);

  IdealMaskResult r;
  r.num_frames = mix_spec.num_frames;
  r.num_bins = mix_spec.num_bins;
  const size_t cells = mix_spec.bins.size();
  r.masks.assign(c, std::vector<double>(cells, 0.0));
  std::vector<double> mag(c);
  for (size_t k = 0; k < cells; ++k) {
    double total = 0.0;
    for (size_t i = 0; i < c; ++i) {
      mag[i] = std::abs(specs[i].bins[k]);
      if (kind == IdealMaskKind::kWfm) mag[i] *= mag[i];
      total += mag[i];
    }
    if (kind == IdealMaskKind::kIbm) {
      // First maximum wins ties.
      size_t best = 0;
      for (size_t i = 1; i < c; ++i) {
        if (mag[i] > mag[best]) best = i;
      }
      r.masks[best][k] = 1.0;
    } else if (total > 0.0) {
      for (size_t i = 0; i < c; ++i) r.masks[i][k] = mag[i] / total;
    } else {
      for (size_t i = 0; i < c; ++i) r.masks[i][k] = 1.0 / static_cast<double>(c);
    }
  }
  for (size_t i = 0; i < c; ++i) {
    Spectrogram masked = mix_spec;
    for (size_t k = 0; k < cells; ++k) masked.bins[k] *= r.masks[i][k];
    r.separated.push_back(Istft(masked));
  }
  return r;
}

bool CheckMaskInvariants(IdealMaskKind kind, const IdealMaskResult& result,
                         double tol, std::string* why) {
  const size_t bins = static_cast<size_t>(result.num_frames) * result.num_bins;
  for (const auto& m : result.masks) {
    if (m.size() != bins) {
      if (why) *why = "mask size does not match the spectrogram";
      return false;
    }
  }
  for (size_t b = 0; b < bins; ++b) {
    double sum = 0.0;
    int ones = 0;
    for (const auto& m : result.masks) {
      sum += m[b];
      if (kind == IdealMaskKind::kIbm) {
        if (m[b] == 1.0) {
          ++ones;
        } else if (m[b] != 0.0) {
          ones = -1000;
        }
      }
    }
    const bool ok = kind == IdealMaskKind::kIbm ? ones == 1 : std::abs(sum - 1.0) <= tol;
    if (!ok) {
      if (why) {
        *why = "frame " + std::to_string(b / result.num_bins) + " bin " +
               std::to_string(b % result.num_bins) + " violates the " +
               ToString(kind) + " invariant";
      }
      return false;
    }
  }
  return true;
}

}  // namespace ctn
