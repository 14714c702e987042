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

#include "ctn/checkpoint.h"

#include <bit>
#include <cmath>
#include <cstring>

#include "ctn/errors.h"
#include "ctn/run_config.h"
#include "file_util.h"

namespace ctn {

namespace {

constexpr char kMagic[4] = {'C', 'T', 'N', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void Put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T Get() {
    T v;
    std::memcpy(&v, Take(sizeof(T)).data(), sizeof(T));
    return v;
  }

  std::string_view Take(size_t n) {
    if (n > bytes_.size() - pos_) throw DataError("checkpoint is truncated");
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  size_t pos_ = 0;
};

}  // namespace

uint64_t Fnv1a64(std::string_view bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string SerializeCheckpoint(const ModelParams& params) {
  std::string out(kMagic, 4);
  Put<uint32_t>(out, kCheckpointVersion);
  const std::string config = ModelConfigToJson(params.config);
  Put<uint32_t>(out, static_cast<uint32_t>(config.size()));
  out += config;
  const auto named = params.Named();
  Put<uint32_t>(out, static_cast<uint32_t>(named.size()));
  for (const auto& [name, t] : named) {
    Put<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out += name;
    Put<uint32_t>(out, static_cast<uint32_t>(t.rank()));
    for (int64_t d : t.shape()) Put<uint64_t>(out, static_cast<uint64_t>(d));
    for (double v : t.data()) {
      const float f = static_cast<float>(v);
      if (!std::isfinite(f)) throw NumericError("parameter '" + name + "' is not finite");
      Put<float>(out, f);
    }
  }
  Put<uint64_t>(out, Fnv1a64(std::string_view(out).substr(4)));
  return out;
}

ModelParams DeserializeCheckpoint(std::string_view bytes) {
  if (bytes.size() < 4 + 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError("not a checkpoint (bad magic)");
  }
  const std::string_view body = bytes.substr(4, bytes.size() - 12);
  uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (Fnv1a64(body) != stored) throw DataError("checkpoint checksum mismatch (corrupt file)");

  Reader r(body);
  const uint32_t version = r.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  const uint32_t config_len = r.Get<uint32_t>();
  ModelConfig config;
  try {
    config = ModelConfigFromJson(std::string(r.Take(config_len)));
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint config: ") + e.what());
  }
  ModelParams params = BuildModel(config, 0);
  auto named = params.Named();
  const uint32_t count = r.Get<uint32_t>();
  if (count != named.size()) {
    throw DataError("checkpoint holds " + std::to_string(count) + " tensors, expected " +
                    std::to_string(named.size()));
  }
  int64_t scalars = 0;
  for (auto& [name, t] : named) {
    const uint32_t name_len = r.Get<uint32_t>();
    const std::string_view got = r.Take(name_len);
    if (got != name) {
      throw DataError("checkpoint tensor '" + std::string(got) + "' where '" + name +
                      "' was expected");
    }
    const uint32_t rank = r.Get<uint32_t>();
    Shape shape;
    for (uint32_t k = 0; k < rank; ++k) shape.push_back(static_cast<int64_t>(r.Get<uint64_t>()));
    if (shape != t.shape()) {
      throw DataError("tensor '" + name + "' has shape " + ShapeString(shape) +
                      ", expected " + ShapeString(t.shape()));
    }
    double* dst = t.mutable_data().data();
    for (int64_t i = 0; i < t.size(); ++i) dst[i] = r.Get<float>();
    scalars += t.size();
  }
  if (r.remaining() != 0) throw DataError("trailing bytes after the tensor table");
  if (scalars != ParamCount(config)) throw DataError("checkpoint scalar count mismatch");
  return params;
}

void SaveCheckpoint(const std::string& path, const ModelParams& params) {
  internal::WriteFileAtomic(path, SerializeCheckpoint(params));
}

ModelParams LoadCheckpoint(const std::string& path) {
  return DeserializeCheckpoint(internal::ReadFileBytes(path));
}

}  // namespace ctn
