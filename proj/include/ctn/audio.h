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

#ifndef CTN_AUDIO_H_
#define CTN_AUDIO_H_

#include <string>
#include <vector>

namespace ctn {

// Mono waveform with samples nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

enum class WavEncoding { kPcm16, kFloat32 };

// Reads a mono 16-bit PCM or 32-bit float WAV file. Multichannel files and
// other codecs raise DataError. No resampling is performed.
AudioClip ReadWav(const std::string& path);

// Writes atomically (temp file + rename). PCM16 output is clipped to
// [-1, 1] and rounded to the nearest step.
void WriteWav(const std::string& path, const AudioClip& clip,
              WavEncoding encoding = WavEncoding::kPcm16);

}  // namespace ctn

#endif  // CTN_AUDIO_H_
