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

#include "ctn/run_config.h"

#include <functional>
#include <map>

#include "ctn/errors.h"
#include "file_util.h"
#include "json.hpp"

namespace ctn {

namespace {

using Json = nlohmann::json;
using Setter = std::function<void(const Json&)>;

template <typename T>
T Get(const Json& v, const std::string& key) {
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError("");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError("");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_integer() && !v.is_number_unsigned() && v.get<int64_t>() < 0) {
          throw ConfigError("");
        }
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError("");
    } else {
      if (!v.is_string()) throw ConfigError("");
    }
    return v.get<T>();
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' has an invalid value: " + v.dump());
  }
}

void Apply(const Json& section, const std::string& prefix,
           const std::map<std::string, Setter>& setters, bool require_all) {
  if (!section.is_object()) throw ConfigError("config section '" + prefix + "' must be an object");
  for (auto it = section.begin(); it != section.end(); ++it) {
    auto s = setters.find(it.key());
    if (s == setters.end()) {
      throw ConfigError("unknown config key '" + prefix + it.key() + "'");
    }
    s->second(it.value());
  }
  if (require_all) {
    for (const auto& [key, unused] : setters) {
      if (!section.contains(key)) throw ConfigError("missing config key '" + prefix + key + "'");
    }
  }
}

std::map<std::string, Setter> ModelSetters(ModelConfig& m, const std::string& p) {
  auto i = [&p](int& field, const char* key) {
    return Setter([&field, key, &p](const Json& v) { field = Get<int>(v, p + key); });
  };
  return {
      {"n_filters", i(m.n_filters, "n_filters")},
      {"filter_len", i(m.filter_len, "filter_len")},
      {"bottleneck", i(m.bottleneck, "bottleneck")},
      {"skip_channels", i(m.skip_channels, "skip_channels")},
      {"block_channels", i(m.block_channels, "block_channels")},
      {"kernel", i(m.kernel, "kernel")},
      {"blocks_per_repeat", i(m.blocks_per_repeat, "blocks_per_repeat")},
      {"repeats", i(m.repeats, "repeats")},
      {"sources", i(m.sources, "sources")},
      {"sample_rate", i(m.sample_rate, "sample_rate")},
      {"causal", [&m, &p](const Json& v) { m.causal = Get<bool>(v, p + "causal"); }},
      {"encoder", [&m, &p](const Json& v) {
         m.encoder = ParseEncoderKind(Get<std::string>(v, p + "encoder"));
       }},
      {"mask", [&m, &p](const Json& v) {
         m.mask = ParseMaskKind(Get<std::string>(v, p + "mask"));
       }},
      {"norm", [&m, &p](const Json& v) {
         m.norm = ParseNormKind(Get<std::string>(v, p + "norm"));
       }},
  };
}

Json Parse(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("malformed config JSON: ") + e.what());
  }
}

}  // namespace

RunConfig ParseRunConfig(const std::string& json_text) {
  const Json doc = Parse(json_text);
  if (!doc.is_object()) throw ConfigError("run config must be a JSON object");
  RunConfig rc;
  const std::string mp = "model.", tp = "train.", pp = "paths.";
  TrainConfig& t = rc.train;
  RunPaths& paths = rc.paths;
  std::map<std::string, Setter> train = {
      {"epochs", [&](const Json& v) { t.epochs = Get<int>(v, tp + "epochs"); }},
      {"segment_seconds",
       [&](const Json& v) { t.segment_seconds = Get<double>(v, tp + "segment_seconds"); }},
      {"lr_initial", [&](const Json& v) { t.lr_initial = Get<double>(v, tp + "lr_initial"); }},
      {"lr_halve_patience",
       [&](const Json& v) { t.lr_halve_patience = Get<int>(v, tp + "lr_halve_patience"); }},
      {"clip_norm", [&](const Json& v) { t.clip_norm = Get<double>(v, tp + "clip_norm"); }},
      {"batch_size", [&](const Json& v) { t.batch_size = Get<int>(v, tp + "batch_size"); }},
      {"seed", [&](const Json& v) { t.seed = Get<uint64_t>(v, tp + "seed"); }},
      {"max_steps", [&](const Json& v) { t.max_steps = Get<int64_t>(v, tp + "max_steps"); }},
      {"target_train_si_snri",
       [&](const Json& v) {
         t.target_train_si_snri = Get<double>(v, tp + "target_train_si_snri");
       }},
  };
  std::map<std::string, Setter> path_setters = {
      {"train_manifest",
       [&](const Json& v) { paths.train_manifest = Get<std::string>(v, pp + "train_manifest"); }},
      {"valid_manifest",
       [&](const Json& v) { paths.valid_manifest = Get<std::string>(v, pp + "valid_manifest"); }},
      {"out", [&](const Json& v) { paths.out = Get<std::string>(v, pp + "out"); }},
  };
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() == "model") {
      Apply(it.value(), mp, ModelSetters(rc.model, mp), false);
    } else if (it.key() == "train") {
      Apply(it.value(), tp, train, false);
    } else if (it.key() == "paths") {
      Apply(it.value(), pp, path_setters, false);
    } else {
      throw ConfigError("unknown config key '" + it.key() + "'");
    }
  }
  rc.model.Validate();
  rc.train.Validate();
  return rc;
}

RunConfig LoadRunConfig(const std::string& path) {
  std::string text;
  try {
    text = internal::ReadFileBytes(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return ParseRunConfig(text);
}

std::string ModelConfigToJson(const ModelConfig& c) {
  Json j = {
      {"n_filters", c.n_filters},
      {"filter_len", c.filter_len},
      {"bottleneck", c.bottleneck},
      {"skip_channels", c.skip_channels},
      {"block_channels", c.block_channels},
      {"kernel", c.kernel},
      {"blocks_per_repeat", c.blocks_per_repeat},
      {"repeats", c.repeats},
      {"sources", c.sources},
      {"causal", c.causal},
      {"encoder", ToString(c.encoder)},
      {"mask", ToString(c.mask)},
      {"norm", ToString(c.norm)},
      {"sample_rate", c.sample_rate},
  };
  return j.dump();
}

ModelConfig ModelConfigFromJson(const std::string& json_text) {
  ModelConfig c;
  Apply(Parse(json_text), "", ModelSetters(c, ""), true);
  c.Validate();
  return c;
}

}  // namespace ctn
