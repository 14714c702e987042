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

#include "ctn/metrics.h"

#include <cmath>

#include "ctn/errors.h"
#include "ctn/objective.h"

namespace ctn {

double SimpleSdr(std::span<const double> estimate,
                 std::span<const double> reference) {
  if (estimate.size() != reference.size() || estimate.size() < 2) {
    throw DataError("sdr: signals must have equal length >= 2");
  }
  const size_t n = estimate.size();
  double me = 0.0, mr = 0.0;
  for (size_t i = 0; i < n; ++i) {
    me += estimate[i];
    mr += reference[i];
  }
  me /= static_cast<double>(n);
  mr /= static_cast<double>(n);
  double sig = 0.0, err = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = reference[i] - mr;
    const double e = (estimate[i] - me) - r;
    sig += r * r;
    err += e * e;
  }
  if (!(sig > 0.0)) throw DataError("sdr: reference has zero power");
  const double v = 10.0 * std::log10(sig / (err + kSiSnrTiny));
  return v < kSiSnrCapDb ? v : kSiSnrCapDb;
}

SeparationScore ScoreSeparation(std::span<const double> mixture,
                                const std::vector<std::vector<double>>& references,
                                const std::vector<std::vector<double>>& estimates) {
  const size_t c = references.size();
  if (c == 0 || estimates.size() != c) {
    throw DataError("score: need matching non-empty estimate/reference lists");
  }
  for (size_t i = 0; i < c; ++i) {
    if (references[i].size() != mixture.size() ||
        estimates[i].size() != mixture.size()) {
      throw DataError("score: length mismatch between mixture (" +
                      std::to_string(mixture.size()) + ") and source " +
                      std::to_string(i));
    }
  }
  std::vector<std::vector<double>> scores(c, std::vector<double>(c));
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) scores[i][j] = SiSnr(estimates[i], references[j]);
  }
  SeparationScore s;
  s.perm = BestAssignment(scores).perm;
  for (size_t i = 0; i < c; ++i) {
    const auto& ref = references[s.perm[i]];
    s.si_snr.push_back(scores[i][s.perm[i]]);
    s.si_snr_mixture.push_back(SiSnr(mixture, ref));
    s.sdr.push_back(SimpleSdr(estimates[i], ref));
    s.sdr_mixture.push_back(SimpleSdr(mixture, ref));
    s.si_snri += s.si_snr.back() - s.si_snr_mixture.back();
    s.sdri += s.sdr.back() - s.sdr_mixture.back();
  }
  s.si_snri /= static_cast<double>(c);
  s.sdri /= static_cast<double>(c);
  return s;
}

}  // namespace ctn
