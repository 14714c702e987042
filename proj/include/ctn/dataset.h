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

#ifndef CTN_DATASET_H_
#define CTN_DATASET_H_

#include <string>
#include <vector>

#include "ctn/audio.h"

namespace ctn {

// One manifest line: mixture path followed by C reference paths, separated
// by tabs. Lines starting with '#' are header comments.
struct ManifestEntry {
  std::string mixture;
  std::vector<std::string> references;
};

struct Manifest {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<ManifestEntry> entries;
  // Directory that relative paths are resolved against.
  std::string base_dir;
};

Manifest ReadManifest(const std::string& path);
void WriteManifest(const std::string& path, const Manifest& manifest);
// Resolves a manifest path against `manifest.base_dir`.
std::string ResolvePath(const Manifest& manifest, const std::string& path);

struct Example {
  std::string id;
  AudioClip mixture;
  std::vector<AudioClip> references;
};

// Loads every entry. Raises DataError on unreadable audio, mismatched
// sample rates, or (when `sources` > 0) a wrong reference count.
std::vector<Example> LoadExamples(const Manifest& manifest, int sources = 0);

}  // namespace ctn

#endif  // CTN_DATASET_H_
