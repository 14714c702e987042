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

#include "ctn/mixtures.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <random>

#include "ctn/errors.h"

namespace fs = std::filesystem;

namespace ctn {

namespace {

std::vector<std::string> WavFiles(const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".wav") {
      files.push_back(e.path().string());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

double Power(const std::vector<double>& x) {
  double p = 0.0;
  for (double v : x) p += v * v;
  return p / static_cast<double>(x.size());
}

std::string Numbered(const std::string& stem, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s_%05d.wav", stem.c_str(), index);
  return buf;
}

}  // namespace

std::vector<std::string> ListSourcePools(const std::string& root) {
  if (!fs::is_directory(root)) {
    throw DataError("source root '" + root + "' is not a directory");
  }
  std::vector<std::string> pools;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory() && !WavFiles(e.path()).empty()) {
      pools.push_back(e.path().string());
    }
  }
  std::sort(pools.begin(), pools.end());
  return pools;
}

Manifest SynthesizeMixtures(const std::vector<std::string>& source_pools,
                            const std::string& out_dir, const MixOptions& options) {
  const int c = options.sources;
  if (c < 1) throw ConfigError("sources must be positive");
  if (options.count < 1) throw ConfigError("count must be positive");
  if (options.snr_min_db > options.snr_max_db) {
    throw ConfigError("snr_min must not exceed snr_max");
  }
  std::vector<std::vector<std::string>> pools;
  for (const auto& p : source_pools) {
    auto files = WavFiles(p);
    if (!files.empty()) pools.push_back(std::move(files));
  }
  if (static_cast<int>(pools.size()) < c) {
    throw DataError("need at least " + std::to_string(c) +
                    " source pools with audio, found " +
                    std::to_string(pools.size()));
  }

  fs::create_directories(fs::path(out_dir) / "mix");
  for (int j = 0; j < c; ++j) {
    fs::create_directories(fs::path(out_dir) / ("s" + std::to_string(j + 1)));
  }

  std::map<std::string, AudioClip> cache;
  auto load = [&](const std::string& path) -> const AudioClip& {
    auto it = cache.find(path);
    if (it == cache.end()) {
      AudioClip clip = ReadWav(path);
      if (clip.sample_rate != options.sample_rate) {
        throw DataError("'" + path + "' is at " + std::to_string(clip.sample_rate) +
                        " Hz, expected " + std::to_string(options.sample_rate) +
                        " Hz (resampling is not supported)");
      }
      it = cache.emplace(path, std::move(clip)).first;
    }
    return it->second;
  };

  std::mt19937_64 rng(options.seed);
  auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  Manifest manifest;
  char header[256];
  std::snprintf(header, sizeof(header),
                " mixtures=%d sources=%d snr_db=[%g,%g] seed=%llu; source 1 at "
                "reference level, sources 2..C scaled relative to source 1",
                options.count, c, options.snr_min_db, options.snr_max_db,
                static_cast<unsigned long long>(options.seed));
  manifest.comments.push_back(header);
  manifest.base_dir = out_dir;

  constexpr double kGrid = 0x1.0p24;
  for (int m = 0; m < options.count; ++m) {
    // C distinct pools by partial Fisher-Yates.
    std::vector<size_t> idx(pools.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (int j = 0; j < c; ++j) {
      const size_t k = j + rng() % (idx.size() - j);
      std::swap(idx[j], idx[k]);
    }
    std::vector<std::vector<double>> src;
    size_t len = SIZE_MAX;
    for (int j = 0; j < c; ++j) {
      const auto& files = pools[idx[j]];
      const AudioClip& clip = load(files[rng() % files.size()]);
      src.push_back(clip.samples);
      len = std::min(len, clip.samples.size());
    }
    for (auto& s : src) s.resize(len);
    const double p0 = Power(src[0]);
    if (!(p0 > 0.0)) throw DataError("selected source file is silent");
    for (int j = 1; j < c; ++j) {
      const double snr = options.snr_min_db +
                         uniform() * (options.snr_max_db - options.snr_min_db);
      const double pj = Power(src[j]);
      if (!(pj > 0.0)) throw DataError("selected source file is silent");
      const double gain = std::sqrt(p0 / (pj * std::pow(10.0, snr / 10.0)));
      for (double& v : src[j]) v *= gain;
    }
    double peak = 0.0;
    for (size_t i = 0; i < len; ++i) {
      double sum = 0.0;
      for (int j = 0; j < c; ++j) sum += src[j][i];
      peak = std::max(peak, std::abs(sum));
    }
    const double norm = peak > 0.9 ? 0.9 / peak : 1.0;
    std::vector<double> mixture(len, 0.0);
    for (auto& s : src) {
      for (size_t i = 0; i < len; ++i) {
        s[i] = std::round(s[i] * norm * kGrid) / kGrid;
        mixture[i] += s[i];
      }
    }
    ManifestEntry entry;
    entry.mixture = (fs::path("mix") / Numbered("mix", m)).string();
    WriteWav(ResolvePath(manifest, entry.mixture),
             AudioClip{mixture, options.sample_rate}, WavEncoding::kFloat32);
    for (int j = 0; j < c; ++j) {
      entry.references.push_back(
          (fs::path("s" + std::to_string(j + 1)) / Numbered("s" + std::to_string(j + 1), m))
              .string());
      WriteWav(ResolvePath(manifest, entry.references.back()),
               AudioClip{src[j], options.sample_rate}, WavEncoding::kFloat32);
    }
    manifest.entries.push_back(std::move(entry));
  }
  WriteManifest((fs::path(out_dir) / "mixtures.tsv").string(), manifest);
  return manifest;
}

}  // namespace ctn
