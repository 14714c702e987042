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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "ctn/errors.h"
#include "ctn/model.h"
#include "ctn/streaming.h"
#include "test_util.h"

namespace ctn {
namespace {

using testing::MicroConfig;
using testing::RandomVector;

using Outputs = std::vector<std::vector<double>>;

void Append(Outputs& all, const Outputs& more) {
  all.resize(more.size());
  for (size_t c = 0; c < more.size(); ++c) all[c].insert(all[c].end(), more[c].begin(), more[c].end());
}

Outputs StreamAll(const StreamingSeparator& sep, const std::vector<double>& x, size_t chunk) {
  StreamState st = sep.InitStream();
  Outputs out(sep.config().sources);
  for (size_t i = 0; i < x.size(); i += chunk) {
    const size_t n = std::min(chunk, x.size() - i);
    Append(out, sep.Push(st, std::span<const double>(x).subspan(i, n)));
  }
  Append(out, sep.Flush(st));
  return out;
}

class StreamingTest : public ::testing::Test {
 protected:
  StreamingTest() : params_(BuildModel(MicroConfig(true), 21)), sep_(params_) {}
  ModelParams params_;
  StreamingSeparator sep_;
};

TEST_F(StreamingTest, FreshStateIsZero) {
  const StreamState st = sep_.InitStream();
  EXPECT_EQ(st.frames_processed(), 0);
  EXPECT_EQ(st.samples_received(), 0);
  EXPECT_FALSE(st.terminal());
  for (size_t b = 0; b < params_.blocks.size(); ++b) {
    const auto h = st.BlockHistory(b);
    EXPECT_EQ(h.size(), static_cast<size_t>(2 * params_.blocks[b].dilation * 64));
    for (double v : h) ASSERT_EQ(v, 0.0);
  }
  for (size_t site = 0; site < 1 + 2 * params_.blocks.size(); ++site) {
    EXPECT_EQ(st.NormMean(site), 0.0);
    EXPECT_EQ(st.NormVariance(site), 0.0);
  }
  EXPECT_TRUE(sep_.InitStream() == st);
}

TEST_F(StreamingTest, ReinitAfterSilenceReplaysFreshOutput) {
  std::mt19937_64 rng(1);
  const auto x = RandomVector(160, rng);
  StreamState fresh = sep_.InitStream();
  const Outputs expected = sep_.Push(fresh, x);
  StreamState used = sep_.InitStream();
  sep_.Push(used, std::vector<double>(240, 0.0));
  EXPECT_FALSE(used == sep_.InitStream());
  used = sep_.InitStream();
  EXPECT_EQ(sep_.Push(used, x), expected);
}

TEST_F(StreamingTest, SubHopEmitsNothing) {
  StreamState st = sep_.InitStream();
  const Outputs out = sep_.Push(st, std::vector<double>(sep_.hop() - 1, 0.1));
  ASSERT_EQ(out.size(), 2u);
  for (const auto& o : out) EXPECT_TRUE(o.empty());
  EXPECT_EQ(st.frames_processed(), 0);
  EXPECT_EQ(st.samples_received(), sep_.hop() - 1);
}

TEST_F(StreamingTest, EmitsWholeHops) {
  std::mt19937_64 rng(2);
  StreamState st = sep_.InitStream();
  for (int i = 0; i < 20; ++i) {
    const Outputs out = sep_.Push(st, RandomVector(1 + rng() % 37, rng));
    for (const auto& o : out) EXPECT_EQ(o.size() % sep_.hop(), 0u);
  }
}

TEST_F(StreamingTest, SampleBySampleMatchesOffline) {
  std::mt19937_64 rng(3);
  for (int64_t t : {3, 16, 17, 203, 800}) {
    const auto x = RandomVector(t, rng, -0.5, 0.5);
    const Outputs streamed = StreamAll(sep_, x, 1);
    const SeparationTrace offline = SeparateTrace(params_, Tensor({1, t}, x));
    ASSERT_EQ(streamed.size(), 2u);
    for (size_t c = 0; c < 2; ++c) {
      ASSERT_EQ(static_cast<int64_t>(streamed[c].size()), PaddedLength(params_.config, t));
      const auto ref = offline.padded[c].data();
      ASSERT_EQ(streamed[c].size(), ref.size());
      for (size_t i = 0; i < ref.size(); ++i) ASSERT_NEAR(streamed[c][i], ref[i], 1e-4);
    }
  }
}

TEST_F(StreamingTest, ChunkingDoesNotChangeOutput) {
  std::mt19937_64 rng(4);
  const auto x = RandomVector(517, rng);
  const Outputs one = StreamAll(sep_, x, 1);
  for (size_t chunk : {7u, 8u, 64u, 1000u}) EXPECT_EQ(StreamAll(sep_, x, chunk), one) << chunk;
}

TEST_F(StreamingTest, InterleavedStreamsAreIndependent) {
  std::mt19937_64 rng(5);
  const auto a = RandomVector(400, rng), b = RandomVector(400, rng);
  StreamState sa = sep_.InitStream(), sb = sep_.InitStream();
  Outputs oa(2), ob(2);
  for (size_t i = 0; i < 400; i += 13) {
    const size_t n = std::min<size_t>(13, 400 - i);
    Append(oa, sep_.Push(sa, std::span<const double>(a).subspan(i, n)));
    Append(ob, sep_.Push(sb, std::span<const double>(b).subspan(i, n)));
  }
  Append(oa, sep_.Flush(sa));
  Append(ob, sep_.Flush(sb));
  EXPECT_EQ(oa, StreamAll(sep_, a, 400));
  EXPECT_EQ(ob, StreamAll(sep_, b, 400));
}

TEST_F(StreamingTest, FlushOnEmptyStream) {
  StreamState st = sep_.InitStream();
  const Outputs out = sep_.Flush(st);
  ASSERT_EQ(out.size(), 2u);
  for (const auto& o : out) EXPECT_TRUE(o.empty());
  EXPECT_TRUE(st.terminal());
}

TEST_F(StreamingTest, PushAfterFlushFails) {
  StreamState st = sep_.InitStream();
  sep_.Push(st, std::vector<double>(20, 0.1));
  sep_.Flush(st);
  EXPECT_THROW(sep_.Push(st, std::vector<double>(8, 0.1)), StateError);
  EXPECT_THROW(sep_.Flush(st), StateError);
}

TEST_F(StreamingTest, NormStatisticsMatchEncoderOutput) {
  std::mt19937_64 rng(6);
  const int64_t t = 400;
  const auto x = RandomVector(t, rng, -0.5, 0.5);
  StreamState st = sep_.InitStream();
  sep_.Push(st, x);
  const Tensor w = Encode(params_, Tensor({1, t}, x));
  const int64_t n = w.dim(0), frames = w.dim(1);
  ASSERT_EQ(st.frames_processed(), frames);
  double mean = 0.0, sq = 0.0;
  for (double v : w.data()) mean += v;
  mean /= static_cast<double>(n * frames);
  for (double v : w.data()) sq += (v - mean) * (v - mean);
  EXPECT_NEAR(st.NormMean(0), mean, 1e-9);
  EXPECT_NEAR(st.NormVariance(0), sq / static_cast<double>(n * frames), 1e-9);
}

TEST_F(StreamingTest, HistoryHoldsRecentFrames) {
  std::mt19937_64 rng(7);
  StreamState st = sep_.InitStream();
  sep_.Push(st, RandomVector(800, rng));
  // The last block has the deepest history; after 99 frames it is full.
  const auto h = st.BlockHistory(params_.blocks.size() - 1);
  EXPECT_GT(std::count_if(h.begin(), h.end(), [](double v) { return v != 0.0; }), 0);
}

TEST(StreamingConfigTest, RejectsNonCausal) {
  EXPECT_THROW(StreamingSeparator(BuildModel(MicroConfig(false), 1)), ConfigError);
}

TEST(StreamingConfigTest, AllEncodersStream) {
  std::mt19937_64 rng(8);
  for (auto enc : {EncoderKind::kRelu, EncoderKind::kPinv}) {
    ModelConfig c = MicroConfig(true);
    c.encoder = enc;
    c.mask = MaskKind::kSoftmax;
    const ModelParams p = BuildModel(c, 2);
    const auto x = RandomVector(120, rng);
    const Outputs s = StreamAll(StreamingSeparator(p), x, 5);
    const SeparationTrace off = SeparateTrace(p, Tensor({1, 120}, x));
    for (size_t k = 0; k < 2; ++k) {
      for (size_t i = 0; i < s[k].size(); ++i) ASSERT_NEAR(s[k][i], off.padded[k].data()[i], 1e-4);
    }
  }
}

TEST(BenchTest, ReportContract) {
  const StreamingSeparator sep(BuildModel(MicroConfig(true), 3));
  const BenchReport r = BenchTimePerFrame(sep, 1.0, 3);
  EXPECT_DOUBLE_EQ(r.hop_ms, 1.0);
  EXPECT_EQ(r.trial_mean_ms.size(), 3u);
  EXPECT_GT(r.frames_measured, 0);
  EXPECT_GT(r.mean_tpf_ms, 0.0);
  EXPECT_GE(r.p95_tpf_ms, 0.0);
  EXPECT_EQ(r.real_time, r.mean_tpf_ms < r.hop_ms);
  EXPECT_THROW(BenchTimePerFrame(sep, 0.0, 1), ConfigError);
  EXPECT_THROW(BenchTimePerFrame(sep, 1.0, 0), ConfigError);
}

// Frame cost is data independent, so after warmup the spread is small on
// an idle machine. A run hit by a scheduler hiccup is measured again, at
// most three times in all.
TEST(BenchTest, FrameTimesAreStable) {
  ModelConfig c = MicroConfig(true);
  c.n_filters = 256;
  c.block_channels = 256;
  c.bottleneck = 128;
  c.skip_channels = 128;
  const StreamingSeparator sep(BuildModel(c, 4));
  BenchReport r;
  for (int attempt = 0; attempt < 3; ++attempt) {
    r = BenchTimePerFrame(sep, 2.0, 1);
    if (r.stddev_tpf_ms < 0.5 * r.mean_tpf_ms) break;
  }
  EXPECT_LT(r.stddev_tpf_ms, 0.5 * r.mean_tpf_ms)
      << "mean " << r.mean_tpf_ms << " ms, stddev " << r.stddev_tpf_ms << " ms";
}

}  // namespace
}  // namespace ctn
