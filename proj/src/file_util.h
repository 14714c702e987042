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

#ifndef CTN_SRC_FILE_UTIL_H_
#define CTN_SRC_FILE_UTIL_H_

#include <string>
#include <string_view>

namespace ctn::internal {

// Writes `bytes` to a sibling temp file and renames it over `path`.
void WriteFileAtomic(const std::string& path, std::string_view bytes);

std::string ReadFileBytes(const std::string& path);

}  // namespace ctn::internal

#endif  // CTN_SRC_FILE_UTIL_H_
