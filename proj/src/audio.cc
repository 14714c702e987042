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

#include "ctn/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "ctn/errors.h"
#include "file_util.h"

namespace ctn {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t ReadU32(const std::string& b, size_t at) {
  return static_cast<uint32_t>(static_cast<uint8_t>(b[at])) |
         static_cast<uint32_t>(static_cast<uint8_t>(b[at + 1])) << 8 |
         static_cast<uint32_t>(static_cast<uint8_t>(b[at + 2])) << 16 |
         static_cast<uint32_t>(static_cast<uint8_t>(b[at + 3])) << 24;
}

uint16_t ReadU16(const std::string& b, size_t at) {
  return static_cast<uint16_t>(static_cast<uint8_t>(b[at]) |
                               static_cast<uint8_t>(b[at + 1]) << 8);
}

void PutU32(std::string& b, uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void PutU16(std::string& b, uint16_t v) {
  b.push_back(static_cast<char>(v & 0xFF));
  b.push_back(static_cast<char>(v >> 8));
}

}  // namespace

AudioClip ReadWav(const std::string& path) {
  const std::string b = internal::ReadFileBytes(path);
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("'" + path + "': " + why);
  };
  if (b.size() < 12) throw fail("empty or truncated WAV file");
  if (b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  bool have_fmt = false;
  size_t data_at = 0, data_len = 0;
  bool have_data = false;
  size_t at = 12;
  while (at + 8 <= b.size()) {
    const std::string id = b.substr(at, 4);
    const size_t len = ReadU32(b, at + 4);
    const size_t body = at + 8;
    if (id == "fmt ") {
      if (len < 16 || body + len > b.size()) throw fail("bad fmt chunk");
      format = ReadU16(b, body);
      channels = ReadU16(b, body + 2);
      rate = ReadU32(b, body + 4);
      bits = ReadU16(b, body + 14);
      if (format == kFormatExtensible) {
        if (len < 26) throw fail("bad extensible fmt chunk");
        format = ReadU16(b, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      data_at = body;
      data_len = std::min(len, b.size() - body);
      have_data = true;
      break;
    }
    at = body + len + (len & 1);
  }
  if (!have_fmt || !have_data) throw fail("missing fmt or data chunk");
  if (channels != 1) {
    throw fail("expected mono audio, found " + std::to_string(channels) +
               " channels");
  }
  if (rate == 0) throw fail("zero sample rate");
  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  if (format == kFormatPcm && bits == 16) {
    const size_t n = data_len / 2;
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const auto v = static_cast<int16_t>(ReadU16(b, data_at + 2 * i));
      clip.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const size_t n = data_len / 4;
    clip.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const uint32_t u = ReadU32(b, data_at + 4 * i);
      float f;
      std::memcpy(&f, &u, sizeof(f));
      if (!std::isfinite(f)) throw fail("non-finite sample");
      clip.samples[i] = f;
    }
  } else {
    throw fail("unsupported codec (format " + std::to_string(format) + ", " +
               std::to_string(bits) + " bits); need 16-bit PCM or 32-bit float");
  }
  if (clip.samples.empty()) throw fail("no samples");
  return clip;
}

void WriteWav(const std::string& path, const AudioClip& clip,
              WavEncoding encoding) {
  if (clip.sample_rate <= 0) throw DataError("cannot write clip without a sample rate");
  const bool pcm = encoding == WavEncoding::kPcm16;
  const uint16_t bits = pcm ? 16 : 32;
  const uint32_t data_len = static_cast<uint32_t>(clip.samples.size() * (bits / 8));
  std::string b;
  b.reserve(44 + data_len);
  b += "RIFF";
  PutU32(b, 36 + data_len);
  b += "WAVEfmt ";
  PutU32(b, 16);
  PutU16(b, pcm ? kFormatPcm : kFormatFloat);
  PutU16(b, 1);
  PutU32(b, static_cast<uint32_t>(clip.sample_rate));
  PutU32(b, static_cast<uint32_t>(clip.sample_rate) * (bits / 8));
  PutU16(b, bits / 8);
  PutU16(b, bits);
  b += "data";
  PutU32(b, data_len);
  for (double x : clip.samples) {
    if (!std::isfinite(x)) throw NumericError("non-finite sample in '" + path + "'");
    if (pcm) {
      const double q = std::round(std::clamp(x, -1.0, 1.0) * 32768.0);
      PutU16(b, static_cast<uint16_t>(static_cast<int16_t>(
                    std::clamp(q, -32768.0, 32767.0))));
    } else {
      const float f = static_cast<float>(x);
      uint32_t u;
      std::memcpy(&u, &f, sizeof(u));
      PutU32(b, u);
    }
  }
  internal::WriteFileAtomic(path, b);
}

}  // namespace ctn
