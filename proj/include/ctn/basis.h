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

#ifndef CTN_BASIS_H_
#define CTN_BASIS_H_

#include <string>
#include <vector>

#include "ctn/model.h"

namespace ctn {

// Leaf order of average-linkage (UPGMA) agglomerative clustering under
// Euclidean distance. At each step the closest pair of live clusters is
// merged (ties: the pair created first); the merged cluster lists the
// older cluster's leaves before the newer one's.
std::vector<int> UpgmaOrder(const std::vector<std::vector<double>>& rows);

// Same, from a precomputed symmetric distance matrix.
std::vector<int> UpgmaOrderFromDistances(
    const std::vector<std::vector<double>>& distances);

inline constexpr int kBasisFftSize = 256;

struct BasisExport {
  std::vector<int> encoder_order;
  std::vector<int> decoder_order;
};

// Rows of a [N x 1 x L] kernel as N vectors of length L.
std::vector<std::vector<double>> BasisRows(const Tensor& kernel);

// Writes <prefix>.encoder.csv and <prefix>.decoder.csv with N rows each in
// UPGMA leaf order, plus <prefix>.order.csv mapping each output row to
// its original basis index. Columns: w0..w{L-1}, then mag0..mag128 (the
// magnitude of the 256-point zero-padded FFT of the row). The pinv
// encoder is exported as its effective analysis kernel.
BasisExport ExportBasis(const ModelParams& params, const std::string& prefix);

}  // namespace ctn

#endif  // CTN_BASIS_H_
