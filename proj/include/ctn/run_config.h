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

#ifndef CTN_RUN_CONFIG_H_
#define CTN_RUN_CONFIG_H_

#include <string>

#include "ctn/model.h"
#include "ctn/trainer.h"

namespace ctn {

struct RunPaths {
  std::string train_manifest;
  std::string valid_manifest;
  std::string out;
};

// A run configuration document:
//   {"model": {"n_filters": 512, ...}, "train": {"epochs": 100, ...},
//    "paths": {"train_manifest": "...", "valid_manifest": "...", "out": "..."}}
// Every section and key is optional; missing keys keep their defaults.
// Unknown keys and ill-typed values raise ConfigError naming the key.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  RunPaths paths;
};

RunConfig ParseRunConfig(const std::string& json_text);
RunConfig LoadRunConfig(const std::string& path);

// Canonical JSON of a model configuration (sorted keys, no whitespace).
std::string ModelConfigToJson(const ModelConfig& config);
// Strict inverse: every key must be present and known; the result is
// validated.
ModelConfig ModelConfigFromJson(const std::string& json_text);

}  // namespace ctn

#endif  // CTN_RUN_CONFIG_H_
