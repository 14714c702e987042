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

#include "ctn/basis.h"

#include <cmath>
#include <cstdio>
#include <limits>

#include "ctn/errors.h"
#include "ctn/ops.h"
#include "ctn/stft.h"
#include "file_util.h"

namespace ctn {

std::vector<int> UpgmaOrderFromDistances(
    const std::vector<std::vector<double>>& distances) {
  const size_t n = distances.size();
  if (n == 0) return {};
  for (const auto& row : distances) {
    if (row.size() != n) throw ShapeError("distance matrix must be square");
  }
  // Cluster ids: leaves 0..n-1, merges n, n+1, ... Live clusters are kept
  // in creation order so the first minimum found is the oldest pair.
  std::vector<std::vector<int>> members(n);
  std::vector<size_t> sizes(n, 1);
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  std::vector<size_t> live(n);
  for (size_t i = 0; i < n; ++i) {
    members[i] = {static_cast<int>(i)};
    live[i] = i;
    for (size_t j = 0; j < n; ++j) d[i][j] = distances[i][j];
  }
  while (live.size() > 1) {
    size_t best_a = 0, best_b = 1;
    double best = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < live.size(); ++a) {
      for (size_t b = a + 1; b < live.size(); ++b) {
        const double v = d[live[a]][live[b]];
        if (v < best) {
          best = v;
          best_a = a;
          best_b = b;
        }
      }
    }
    const size_t ca = live[best_a], cb = live[best_b];
    const size_t id = members.size();
    std::vector<int> merged = members[ca];
    merged.insert(merged.end(), members[cb].begin(), members[cb].end());
    members.push_back(std::move(merged));
    sizes.push_back(sizes[ca] + sizes[cb]);
    for (auto& row : d) row.push_back(0.0);
    d.emplace_back(id + 1, 0.0);
    const double wa = static_cast<double>(sizes[ca]);
    const double wb = static_cast<double>(sizes[cb]);
    for (size_t k : live) {
      if (k == ca || k == cb) continue;
      const double v = (wa * d[ca][k] + wb * d[cb][k]) / (wa + wb);
      d[id][k] = v;
      d[k][id] = v;
    }
    live.erase(live.begin() + best_b);
    live.erase(live.begin() + best_a);
    live.push_back(id);
  }
  return members[live[0]];
}

std::vector<int> UpgmaOrder(const std::vector<std::vector<double>>& rows) {
  const size_t n = rows.size();
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    if (rows[i].size() != rows[0].size()) {
      throw ShapeError("UPGMA rows must share one length");
    }
    for (size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (size_t k = 0; k < rows[i].size(); ++k) {
        const double diff = rows[i][k] - rows[j][k];
        s += diff * diff;
      }
      d[i][j] = d[j][i] = std::sqrt(s);
    }
  }
  return UpgmaOrderFromDistances(d);
}

std::vector<std::vector<double>> BasisRows(const Tensor& kernel) {
  if (kernel.rank() != 3 || kernel.dim(1) != 1) {
    throw ShapeError("basis kernel must be [N x 1 x L], got " +
                     ShapeString(kernel.shape()));
  }
  const int64_t n = kernel.dim(0), l = kernel.dim(2);
  std::vector<std::vector<double>> rows(n);
  for (int64_t i = 0; i < n; ++i) {
    rows[i].assign(kernel.data().begin() + i * l, kernel.data().begin() + (i + 1) * l);
  }
  return rows;
}

namespace {

std::vector<int> WriteBasisCsv(const std::string& path, const Tensor& kernel) {
  const auto rows = BasisRows(kernel);
  const std::vector<int> order = UpgmaOrder(rows);
  const size_t l = rows.empty() ? 0 : rows[0].size();
  std::string out;
  for (size_t k = 0; k < l; ++k) out += (k ? ",w" : "w") + std::to_string(k);
  for (int k = 0; k <= kBasisFftSize / 2; ++k) out += ",mag" + std::to_string(k);
  out += '\n';
  char buf[32];
  for (int idx : order) {
    const auto& row = rows[idx];
    for (size_t k = 0; k < l; ++k) {
      std::snprintf(buf, sizeof(buf), "%s%.9g", k ? "," : "", row[k]);
      out += buf;
    }
    for (const auto& c : Rfft(row, kBasisFftSize)) {
      std::snprintf(buf, sizeof(buf), ",%.9g", std::abs(c));
      out += buf;
    }
    out += '\n';
  }
  internal::WriteFileAtomic(path, out);
  return order;
}

}  // namespace

BasisExport ExportBasis(const ModelParams& params, const std::string& prefix) {
  BasisExport result;
  const Tensor encoder = params.config.encoder == EncoderKind::kPinv
                             ? ops::PseudoInverseKernel(params.decoder.Detach())
                             : params.encoder;
  result.encoder_order = WriteBasisCsv(prefix + ".encoder.csv", encoder);
  result.decoder_order = WriteBasisCsv(prefix + ".decoder.csv", params.decoder);
  std::string order = "row,encoder_index,decoder_index\n";
  for (size_t i = 0; i < result.encoder_order.size(); ++i) {
    order += std::to_string(i) + "," + std::to_string(result.encoder_order[i]) +
             "," + std::to_string(result.decoder_order[i]) + "\n";
  }
  internal::WriteFileAtomic(prefix + ".order.csv", order);
  return result;
}

}  // namespace ctn
