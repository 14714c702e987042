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

#include "ctn/objective.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ctn/errors.h"
#include "ctn/ops.h"

namespace ctn {

namespace {

struct Projection {
  double value_db;
  bool capped;
  // Zero-meaned inputs and the decomposition estimate = target + noise.
  std::vector<double> target, noise;
  double target_power, noise_power;
};

Projection Project(std::span<const double> est, std::span<const double> ref) {
  if (est.size() != ref.size()) {
    throw DataError("si_snr: length mismatch (" + std::to_string(est.size()) +
                    " vs " + std::to_string(ref.size()) + ")");
  }
  const size_t n = est.size();
  if (n < 2) throw DataError("si_snr: signals need at least 2 samples");
  double mean_e = 0.0, mean_r = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_e += est[i];
    mean_r += ref[i];
  }
  mean_e /= static_cast<double>(n);
  mean_r /= static_cast<double>(n);
  double dot = 0.0, ref_power = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double r = ref[i] - mean_r;
    dot += (est[i] - mean_e) * r;
    ref_power += r * r;
  }
  if (!(ref_power > 0.0)) {
    throw DataError("si_snr: reference has zero power after mean removal");
  }
  Projection p;
  p.target.resize(n);
  p.noise.resize(n);
  const double scale = dot / ref_power;
  p.target_power = 0.0;
  p.noise_power = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = scale * (ref[i] - mean_r);
    const double e = (est[i] - mean_e) - t;
    p.target[i] = t;
    p.noise[i] = e;
    p.target_power += t * t;
    p.noise_power += e * e;
  }
  const double raw =
      p.target_power > 0.0
          ? 10.0 * std::log10(p.target_power / (p.noise_power + kSiSnrTiny))
          : -kSiSnrCapDb;
  p.capped = !(std::abs(raw) < kSiSnrCapDb);
  p.value_db = std::clamp(raw, -kSiSnrCapDb, kSiSnrCapDb);
  return p;
}

}  // namespace

double SiSnr(std::span<const double> estimate, std::span<const double> reference) {
  return Project(estimate, reference).value_db;
}

Tensor SiSnrOp(const Tensor& estimate, const Tensor& reference) {
  if (estimate.shape() != reference.shape()) {
    throw ShapeError("si_snr: shape mismatch " + ShapeString(estimate.shape()) +
                     " vs " + ShapeString(reference.shape()));
  }
  auto proj = std::make_shared<Projection>(
      Project(estimate.data(), reference.data()));
  Tensor out = Tensor::Scalar(proj->value_db);
  RecordOp({&estimate}, out, [estimate, proj](std::span<const double> gy) {
    if (proj->capped) return;
    // d/d(est0) of 10 log10(|t|^2 / (|e|^2 + tiny)) with t the projection
    // of est0 onto ref0: (10 / ln 10) (2 t / |t|^2 - 2 e / (|e|^2 + tiny)).
    // Both terms are zero-mean, so centering adds nothing.
    const double k = 10.0 / std::log(10.0) * gy[0];
    const double a = 2.0 / proj->target_power;
    const double b = 2.0 / (proj->noise_power + kSiSnrTiny);
    auto g = estimate.mutable_grad();
    for (size_t i = 0; i < g.size(); ++i) {
      g[i] += k * (a * proj->target[i] - b * proj->noise[i]);
    }
  });
  return out;
}

Assignment BestAssignment(const std::vector<std::vector<double>>& scores) {
  const size_t c = scores.size();
  for (const auto& row : scores) {
    if (row.size() != c) throw ShapeError("assignment: score matrix not square");
  }
  std::vector<int> perm(c);
  std::iota(perm.begin(), perm.end(), 0);
  Assignment best;
  bool first = true;
  do {
    double total = 0.0;
    for (size_t i = 0; i < c; ++i) total += scores[i][perm[i]];
    const double mean = c ? total / static_cast<double>(c) : 0.0;
    if (first || mean > best.mean_si_snr) {
      best.perm = perm;
      best.mean_si_snr = mean;
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

PitLoss UpitLoss(const std::vector<Tensor>& estimates,
                 const std::vector<Tensor>& references) {
  const size_t c = estimates.size();
  if (c == 0 || references.size() != c) {
    throw ShapeError("upit: need the same non-zero number of estimates and "
                     "references");
  }
  if (c > static_cast<size_t>(kMaxPitSources)) {
    throw ShapeError("upit: at most " + std::to_string(kMaxPitSources) +
                     " sources supported");
  }
  std::vector<std::vector<double>> scores(c, std::vector<double>(c));
  for (size_t i = 0; i < c; ++i) {
    for (size_t j = 0; j < c; ++j) {
      if (estimates[i].size() != references[j].size()) {
        throw DataError("upit: estimate " + std::to_string(i) + " and reference " +
                        std::to_string(j) + " differ in length");
      }
      scores[i][j] = SiSnr(estimates[i].data(), references[j].data());
    }
  }
  PitLoss result;
  result.assignment = BestAssignment(scores);
  std::vector<Tensor> terms;
  for (size_t i = 0; i < c; ++i) {
    terms.push_back(SiSnrOp(estimates[i], references[result.assignment.perm[i]]));
  }
  result.loss = ops::Scale(ops::AddN(terms), -1.0 / static_cast<double>(c));
  return result;
}

}  // namespace ctn
