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

#include "ctn/dataset.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ctn/errors.h"
#include "file_util.h"

namespace ctn {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, '\t')) out.push_back(field);
  return out;
}

}  // namespace

Manifest ReadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path + "'");
  Manifest m;
  m.base_dir = std::filesystem::path(path).parent_path().string();
  std::string line;
  int line_no = 0;
  size_t refs = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      m.comments.push_back(line.substr(1));
      continue;
    }
    auto fields = SplitTabs(line);
    if (fields.size() < 2) {
      throw DataError(path + ":" + std::to_string(line_no) +
                      ": expected a mixture path and reference paths");
    }
    if (refs == 0) refs = fields.size() - 1;
    if (fields.size() - 1 != refs) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected " +
                      std::to_string(refs) + " reference paths, got " +
                      std::to_string(fields.size() - 1));
    }
    m.entries.push_back(
        ManifestEntry{fields[0], {fields.begin() + 1, fields.end()}});
  }
  return m;
}

void WriteManifest(const std::string& path, const Manifest& manifest) {
  std::ostringstream os;
  for (const auto& c : manifest.comments) os << '#' << c << '\n';
  for (const auto& e : manifest.entries) {
    os << e.mixture;
    for (const auto& r : e.references) os << '\t' << r;
    os << '\n';
  }
  internal::WriteFileAtomic(path, os.str());
}

std::string ResolvePath(const Manifest& manifest, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute() || manifest.base_dir.empty()) return path;
  return (std::filesystem::path(manifest.base_dir) / p).string();
}

std::vector<Example> LoadExamples(const Manifest& manifest, int sources) {
  std::vector<Example> out;
  for (const auto& e : manifest.entries) {
    if (sources > 0 && static_cast<int>(e.references.size()) != sources) {
      throw DataError("manifest entry '" + e.mixture + "' lists " +
                      std::to_string(e.references.size()) +
                      " references, model expects " + std::to_string(sources));
    }
    Example ex;
    ex.id = e.mixture;
    ex.mixture = ReadWav(ResolvePath(manifest, e.mixture));
    for (const auto& r : e.references) {
      ex.references.push_back(ReadWav(ResolvePath(manifest, r)));
      if (ex.references.back().sample_rate != ex.mixture.sample_rate) {
        throw DataError("reference '" + r + "' sample rate differs from mixture");
      }
    }
    out.push_back(std::move(ex));
  }
  return out;
}

}  // namespace ctn
