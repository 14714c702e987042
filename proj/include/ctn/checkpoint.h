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

#ifndef CTN_CHECKPOINT_H_
#define CTN_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <string_view>

#include "ctn/model.h"

namespace ctn {

inline constexpr uint32_t kCheckpointVersion = 1;

// Binary layout, all integers little-endian:
//   "CTN1" | u32 version | u32 config length | config JSON (UTF-8)
//   | u32 tensor count | per tensor: u32 name length, name, u32 rank,
//     u64 extents[rank], f32 values[prod(extents)]
//   | u64 FNV-1a checksum of every byte after the magic.
std::string SerializeCheckpoint(const ModelParams& params);
// Raises DataError on a bad magic, version, checksum, truncation, or a
// tensor table that does not match the configuration's parameter set.
ModelParams DeserializeCheckpoint(std::string_view bytes);

// Atomic write via a temporary file and rename.
void SaveCheckpoint(const std::string& path, const ModelParams& params);
ModelParams LoadCheckpoint(const std::string& path);

uint64_t Fnv1a64(std::string_view bytes);

}  // namespace ctn

#endif  // CTN_CHECKPOINT_H_
