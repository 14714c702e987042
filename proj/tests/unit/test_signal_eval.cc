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
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "ctn/audio.h"
#include "ctn/basis.h"
#include "ctn/dataset.h"
#include "ctn/errors.h"
#include "ctn/evaluation.h"
#include "ctn/masks.h"
#include "ctn/metrics.h"
#include "ctn/mixtures.h"
#include "ctn/model.h"
#include "ctn/objective.h"
#include "ctn/stft.h"
#include "test_util.h"

namespace ctn {
namespace {

namespace fs = std::filesystem;
using testing::MakeTempDir;
using testing::RandomVector;
using testing::ReadFile;

class TempDir {
 public:
  explicit TempDir(const std::string& tag) : path_(MakeTempDir(tag)) {}
  ~TempDir() { fs::remove_all(path_); }
  std::string operator/(const std::string& name) const { return path_ + "/" + name; }
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::vector<double> Tone(double hz, int64_t n, double amp = 0.5, double phase = 0.0) {
  std::vector<double> v(n);
  for (int64_t i = 0; i < n; ++i) v[i] = amp * std::sin(2 * std::numbers::pi * hz * i / 8000.0 + phase);
  return v;
}

double Power(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// ---------------------------------------------------------------- audio

TEST(WavTest, Pcm16RampRoundTrip) {
  TempDir dir("wav");
  AudioClip clip;
  clip.sample_rate = 8000;
  for (int i = 0; i < 1000; ++i) clip.samples.push_back(-1.0 + 2.0 * i / 999.0);
  WriteWav(dir / "ramp.wav", clip);
  const AudioClip back = ReadWav(dir / "ramp.wav");
  EXPECT_EQ(back.sample_rate, 8000);
  ASSERT_EQ(back.samples.size(), clip.samples.size());
  for (size_t i = 0; i < clip.samples.size(); ++i) {
    EXPECT_LE(std::abs(back.samples[i] - clip.samples[i]), 1.0 / 32768);
  }
}

TEST(WavTest, Float32IsExactForFloatValues) {
  TempDir dir("wav");
  std::mt19937_64 rng(1);
  AudioClip clip{RandomVector(300, rng), 16000};
  for (double& v : clip.samples) v = static_cast<float>(v);
  WriteWav(dir / "f.wav", clip, WavEncoding::kFloat32);
  const AudioClip back = ReadWav(dir / "f.wav");
  EXPECT_EQ(back.samples, clip.samples);
  EXPECT_EQ(back.sample_rate, 16000);
}

TEST(WavTest, KeepsForeignSampleRate) {
  TempDir dir("wav");
  WriteWav(dir / "cd.wav", AudioClip{std::vector<double>(441, 0.25), 44100});
  const AudioClip back = ReadWav(dir / "cd.wav");
  EXPECT_EQ(back.sample_rate, 44100);
  EXPECT_EQ(back.samples.size(), 441u);
}

TEST(WavTest, Errors) {
  TempDir dir("wav");
  std::ofstream(dir / "empty.wav").close();
  EXPECT_THROW(ReadWav(dir / "empty.wav"), DataError);
  EXPECT_THROW(ReadWav(dir / "missing.wav"), DataError);
  std::ofstream(dir / "text.wav") << "this is not a riff file at all";
  EXPECT_THROW(ReadWav(dir / "text.wav"), DataError);
  // Two-channel PCM16: rewrite the channel count of a valid mono file.
  WriteWav(dir / "mono.wav", AudioClip{std::vector<double>(8, 0.1), 8000});
  std::string bytes = ReadFile(dir / "mono.wav");
  bytes[22] = 2;
  std::ofstream(dir / "stereo.wav", std::ios::binary) << bytes;
  EXPECT_THROW(ReadWav(dir / "stereo.wav"), DataError);
}

// ---------------------------------------------------------------- manifest

TEST(ManifestTest, RoundTrip) {
  TempDir dir("manifest");
  Manifest m;
  m.comments = {" generated"};
  m.entries = {{"mix/a.wav", {"s1/a.wav", "s2/a.wav"}}, {"mix/b.wav", {"s1/b.wav", "s2/b.wav"}}};
  WriteManifest(dir / "m.tsv", m);
  const Manifest back = ReadManifest(dir / "m.tsv");
  EXPECT_EQ(back.comments, m.comments);
  ASSERT_EQ(back.entries.size(), 2u);
  EXPECT_EQ(back.entries[1].mixture, "mix/b.wav");
  EXPECT_EQ(back.entries[1].references, m.entries[1].references);
  EXPECT_EQ(fs::path(ResolvePath(back, "mix/b.wav")), fs::path(dir / "mix/b.wav"));
}

// ---------------------------------------------------------------- mixtures

TEST(MixturesTest, ZeroDbGivesEqualPowerAndExactSums) {
  TempDir dir("mix");
  testing::WriteSyntheticPools(dir / "pools", 3, 2, 0.5, 7);
  MixOptions o;
  o.count = 4;
  o.snr_min_db = o.snr_max_db = 0.0;
  const Manifest m = SynthesizeMixtures(ListSourcePools(dir / "pools"), dir / "out", o);
  ASSERT_EQ(m.entries.size(), 4u);
  for (const Example& ex : LoadExamples(m, 2)) {
    const double p0 = Power(ex.references[0].samples), p1 = Power(ex.references[1].samples);
    EXPECT_NEAR(p0 / p1, 1.0, 1e-6) << ex.id;
    for (size_t i = 0; i < ex.mixture.samples.size(); ++i) {
      ASSERT_EQ(ex.mixture.samples[i], ex.references[0].samples[i] + ex.references[1].samples[i]);
    }
    double peak = 0.0;
    for (double v : ex.mixture.samples) peak = std::max(peak, std::abs(v));
    EXPECT_LE(peak, 0.9 + 1e-6);
  }
}

TEST(MixturesTest, SnrRangeIsRespected) {
  TempDir dir("mix");
  testing::WriteSyntheticPools(dir / "pools", 4, 1, 0.3, 8);
  MixOptions o;
  o.count = 6;
  o.sources = 3;
  o.snr_min_db = -2.0;
  o.snr_max_db = 4.0;
  const Manifest m = SynthesizeMixtures(ListSourcePools(dir / "pools"), dir / "out", o);
  for (const Example& ex : LoadExamples(m, 3)) {
    for (int j = 1; j < 3; ++j) {
      const double db = 10 * std::log10(Power(ex.references[0].samples) /
                                        Power(ex.references[j].samples));
      EXPECT_GE(db, -2.0 - 1e-4);
      EXPECT_LE(db, 4.0 + 1e-4);
    }
  }
}

TEST(MixturesTest, SameSeedSameBytes) {
  TempDir dir("mix");
  testing::WriteSyntheticPools(dir / "pools", 3, 3, 0.3, 9);
  MixOptions o;
  o.count = 5;
  o.seed = 17;
  const auto pools = ListSourcePools(dir / "pools");
  SynthesizeMixtures(pools, dir / "a", o);
  SynthesizeMixtures(pools, dir / "b", o);
  EXPECT_EQ(ReadFile(dir / "a/mixtures.tsv"), ReadFile(dir / "b/mixtures.tsv"));
  EXPECT_EQ(ReadFile(dir / "a/mix/mix_00003.wav"), ReadFile(dir / "b/mix/mix_00003.wav"));
  o.seed = 18;
  SynthesizeMixtures(pools, dir / "c", o);
  EXPECT_NE(ReadFile(dir / "a/mix/mix_00003.wav"), ReadFile(dir / "c/mix/mix_00003.wav"));
}

TEST(MixturesTest, NeedsEnoughPools) {
  TempDir dir("mix");
  testing::WriteSyntheticPools(dir / "pools", 1, 2, 0.2, 10);
  const auto pools = ListSourcePools(dir / "pools");
  EXPECT_EQ(pools.size(), 1u);
  EXPECT_THROW(SynthesizeMixtures(pools, dir / "out", MixOptions{}), DataError);
}

// ---------------------------------------------------------------- STFT

TEST(StftTest, HannIsPeriodic) {
  const auto w = HannWindow(256);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[128], 1.0, 1e-15);
  EXPECT_NEAR(w[64], 0.5, 1e-15);
  EXPECT_NEAR(w[1], w[255], 1e-15);
}

TEST(StftTest, RoundTrip) {
  std::mt19937_64 rng(2);
  for (int64_t n : {256, 1000, 4001}) {
    const auto x = RandomVector(n, rng);
    const Spectrogram s = Stft(x);
    EXPECT_EQ(s.num_bins, 129);
    const auto y = Istft(s);
    ASSERT_EQ(y.size(), x.size());
    for (int64_t i = 0; i < n; ++i) ASSERT_NEAR(y[i], x[i], 1e-6);
  }
}

TEST(StftTest, ToneLandsInBin32) {
  const Spectrogram s = Stft(Tone(1000.0, 4000));
  for (int64_t f = 4; f < s.num_frames - 4; ++f) {
    double total = 0.0, near = 0.0;
    int best = 0;
    for (int k = 0; k < s.num_bins; ++k) {
      const double e = std::norm(s.at(f, k));
      total += e;
      if (std::abs(k - 32) <= 1) near += e;
      if (e > std::norm(s.at(f, best))) best = k;
    }
    EXPECT_EQ(best, 32);
    EXPECT_GT(near / total, 0.99);
  }
}

TEST(StftTest, Parseval) {
  std::mt19937_64 rng(3);
  const auto x = RandomVector(1500, rng);
  const Spectrogram s = Stft(x);
  const auto w = HannWindow(256);
  const int64_t pad = 256 - 64;
  for (int64_t f = 0; f < s.num_frames; ++f) {
    double time = 0.0;
    for (int j = 0; j < 256; ++j) {
      const int64_t i = f * 64 + j - pad;
      if (i >= 0 && i < 1500) time += (w[j] * x[i]) * (w[j] * x[i]);
    }
    double freq = std::norm(s.at(f, 0)) + std::norm(s.at(f, 128));
    for (int k = 1; k < 128; ++k) freq += 2.0 * std::norm(s.at(f, k));
    EXPECT_NEAR(freq / 256.0, time, 1e-5 * std::max(1.0, time)) << "frame " << f;
  }
}

TEST(StftTest, RejectsShortSignal) {
  EXPECT_ANY_THROW(Stft(std::vector<double>(100, 0.0)));
}

// ---------------------------------------------------------------- masks

std::vector<std::vector<double>> TwoVoices(uint64_t seed, int64_t n) {
  std::mt19937_64 rng(seed);
  return {testing::SyntheticVoice(rng, n), testing::SyntheticVoice(rng, n)};
}

TEST(MaskTest, UnitSumAndBinaryStructure) {
  const auto src = TwoVoices(4, 3000);
  for (auto kind : {IdealMaskKind::kIrm, IdealMaskKind::kWfm}) {
    const IdealMaskResult r = ApplyIdealMask(kind, src);
    std::string why;
    EXPECT_TRUE(CheckMaskInvariants(kind, r, 1e-12, &why)) << why;
    const int64_t bins = r.num_frames * r.num_bins;
    for (int64_t i = 0; i < bins; ++i) ASSERT_NEAR(r.masks[0][i] + r.masks[1][i], 1.0, 1e-12);
  }
  const IdealMaskResult ibm = ApplyIdealMask(IdealMaskKind::kIbm, src);
  EXPECT_TRUE(CheckMaskInvariants(IdealMaskKind::kIbm, ibm));
  for (int64_t i = 0; i < ibm.num_frames * ibm.num_bins; ++i) {
    const double a = ibm.masks[0][i], b = ibm.masks[1][i];
    ASSERT_TRUE((a == 0.0 || a == 1.0) && a + b == 1.0);
  }
}

TEST(MaskTest, InvariantCheckCatchesDamage) {
  IdealMaskResult r = ApplyIdealMask(IdealMaskKind::kIrm, TwoVoices(5, 1000));
  r.masks[0][17] += 1e-6;
  std::string why;
  EXPECT_FALSE(CheckMaskInvariants(IdealMaskKind::kIrm, r, 1e-12, &why));
  EXPECT_FALSE(why.empty());
}

TEST(MaskTest, SilentBinsSplitEvenly) {
  auto src = TwoVoices(6, 2000);
  for (auto& s : src) std::fill(s.begin(), s.begin() + 800, 0.0);
  const IdealMaskResult irm = ApplyIdealMask(IdealMaskKind::kIrm, src);
  EXPECT_EQ(irm.masks[0][0], 0.5);
  const IdealMaskResult ibm = ApplyIdealMask(IdealMaskKind::kIbm, src);
  EXPECT_EQ(ibm.masks[0][0], 1.0);
  EXPECT_EQ(ibm.masks[1][0], 0.0);
}

TEST(MaskTest, DisjointTonesSeparateWithIbm) {
  const std::vector<std::vector<double>> src{Tone(500.0, 8000, 0.4), Tone(2000.0, 8000, 0.4, 1.0)};
  std::vector<double> mix(8000);
  for (int i = 0; i < 8000; ++i) mix[i] = src[0][i] + src[1][i];
  const IdealMaskResult r = ApplyIdealMask(IdealMaskKind::kIbm, src);
  const SeparationScore score = ScoreSeparation(mix, src, r.separated);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GE(score.si_snr[i] - score.si_snr_mixture[i], 20.0) << "source " << i;
  }
}

TEST(MaskTest, WienerBeatsRatioMaskOnAverage) {
  double irm = 0.0, wfm = 0.0;
  for (uint64_t seed = 0; seed < 6; ++seed) {
    const auto src = TwoVoices(100 + seed, 4000);
    std::vector<double> mix(4000);
    for (int i = 0; i < 4000; ++i) mix[i] = src[0][i] + src[1][i];
    irm += ScoreSeparation(mix, src, ApplyIdealMask(IdealMaskKind::kIrm, src).separated).si_snri;
    wfm += ScoreSeparation(mix, src, ApplyIdealMask(IdealMaskKind::kWfm, src).separated).si_snri;
  }
  EXPECT_GE(wfm, irm);
}

TEST(MaskTest, Errors) {
  EXPECT_THROW(ApplyIdealMask(IdealMaskKind::kIrm, {std::vector<double>(500, 0.0),
                                                    std::vector<double>(500, 0.0)}),
               DataError);
  EXPECT_THROW(ApplyIdealMask(IdealMaskKind::kIrm, {std::vector<double>(500, 0.1),
                                                    std::vector<double>(400, 0.1)}),
               DataError);
  EXPECT_EQ(ParseIdealMaskKind("WFM"), IdealMaskKind::kWfm);
  EXPECT_EQ(ToString(IdealMaskKind::kIbm), "ibm");
  EXPECT_THROW(ParseIdealMaskKind("oracle"), ConfigError);
}

// ---------------------------------------------------------------- metrics

TEST(MetricsTest, MixtureAsEstimateImprovesNothing) {
  const auto src = TwoVoices(7, 1000);
  std::vector<double> mix(1000);
  for (int i = 0; i < 1000; ++i) mix[i] = src[0][i] + src[1][i];
  const SeparationScore s = ScoreSeparation(mix, src, {mix, mix});
  EXPECT_EQ(s.si_snri, 0.0);
  EXPECT_EQ(s.sdri, 0.0);
}

TEST(MetricsTest, ReferenceAsEstimateReachesCap) {
  const auto src = TwoVoices(8, 1000);
  std::vector<double> mix(1000);
  for (int i = 0; i < 1000; ++i) mix[i] = src[0][i] + src[1][i];
  const SeparationScore s = ScoreSeparation(mix, src, {src[1], src[0]});
  EXPECT_EQ(s.perm, (std::vector<int>{1, 0}));
  const double expected =
      kSiSnrCapDb - (SiSnr(mix, src[0]) + SiSnr(mix, src[1])) / 2.0;
  EXPECT_NEAR(s.si_snri, expected, 1e-12);
}

TEST(MetricsTest, SimpleSdrByHand) {
  // Zero-meaned s = [-1, 0, 1], e = [-4/3, -1/3, 5/3]; error [-1/3, -1/3, 2/3].
  const std::vector<double> s{1, 2, 3}, e{1, 2, 4};
  EXPECT_NEAR(SimpleSdr(e, s), 10 * std::log10(2.0 / (6.0 / 9.0)), 1e-8);
  EXPECT_EQ(SimpleSdr(s, s), kSiSnrCapDb);
  // Unlike SI-SNR, SDR penalizes gain.
  EXPECT_LT(SimpleSdr(std::vector<double>{2, 4, 6}, s), 10.0);
}

TEST(MetricsTest, LengthMismatch) {
  const std::vector<double> a(10, 0.1), b(9, 0.1);
  EXPECT_THROW(ScoreSeparation(a, {a, a}, {a, b}), DataError);
}

// ---------------------------------------------------------------- evaluation

Manifest SmallCorpus(const TempDir& dir, int count) {
  testing::WriteSyntheticPools(dir / "pools", 3, 2, 0.4, 11);
  MixOptions o;
  o.count = count;
  return SynthesizeMixtures(ListSourcePools(dir / "pools"), dir / "set", o);
}

TEST(EvaluationTest, SkipsBrokenUtterances) {
  TempDir dir("eval");
  Manifest m = SmallCorpus(dir, 3);
  m.entries.insert(m.entries.begin() + 1, {"mix/missing.wav", {"s1/x.wav", "s2/x.wav"}});
  const EvaluationReport r = Evaluate(m, OracleSeparator(IdealMaskKind::kIrm));
  EXPECT_EQ(r.evaluated, 3);
  EXPECT_EQ(r.skipped, 1);
  ASSERT_EQ(r.utterances.size(), 4u);
  EXPECT_FALSE(r.utterances[1].ok);
  EXPECT_FALSE(r.utterances[1].message.empty());
  EXPECT_GT(r.mean_si_snri, 5.0);
}

TEST(EvaluationTest, ReportIsByteStableAndThreadIndependent) {
  TempDir dir("eval");
  const Manifest m = SmallCorpus(dir, 5);
  const auto sep = OracleSeparator(IdealMaskKind::kWfm);
  WriteEvaluationCsv(dir / "a.csv", Evaluate(m, sep, 1));
  WriteEvaluationCsv(dir / "b.csv", Evaluate(m, sep, 1));
  WriteEvaluationCsv(dir / "c.csv", Evaluate(m, sep, 3));
  const std::string a = ReadFile(dir / "a.csv");
  EXPECT_EQ(a, ReadFile(dir / "b.csv"));
  EXPECT_EQ(a, ReadFile(dir / "c.csv"));
  EXPECT_EQ(a.substr(0, a.find('\n')), "utterance,status,si_snri_db,sdri_db");
  EXPECT_NE(a.find("\nmean,evaluated=5;skipped=0,"), std::string::npos);
}

TEST(EvaluationTest, ModelSeparatorScores) {
  TempDir dir("eval");
  const Manifest m = SmallCorpus(dir, 2);
  ModelConfig c = testing::MicroConfig(false);
  const ModelParams p = BuildModel(c, 1);
  const EvaluationReport r = Evaluate(m, ModelSeparator(p));
  EXPECT_EQ(r.evaluated, 2);
  EXPECT_TRUE(std::isfinite(r.mean_si_snri));
}

TEST(EvaluationTest, ThreadsFromEnvironment) {
  unsetenv("CTN_THREADS");
  EXPECT_EQ(ThreadsFromEnv(), 1);
  setenv("CTN_THREADS", "3", 1);
  EXPECT_EQ(ThreadsFromEnv(), 3);
  setenv("CTN_THREADS", "two", 1);
  EXPECT_THROW(ThreadsFromEnv(), ConfigError);
  unsetenv("CTN_THREADS");
}

TEST(ShiftTest, RowsAndStatistics) {
  TempDir dir("shift");
  const Manifest m = SmallCorpus(dir, 1);
  const Example ex = LoadExamples(m, 2)[0];
  const auto sep = OracleSeparator(IdealMaskKind::kIrm);
  const ShiftResult r = ShiftExperiment(sep, ex, 64, 8);
  ASSERT_EQ(r.shifts.size(), 9u);
  EXPECT_EQ(r.shifts.back(), 64);
  std::vector<std::vector<double>> refs;
  for (const auto& c : ex.references) refs.push_back(c.samples);
  const SeparationScore plain = ScoreSeparation(ex.mixture.samples, refs, sep(ex.mixture.samples, refs));
  EXPECT_EQ(r.sdri[0], plain.sdri);
  EXPECT_EQ(r.si_snri[0], plain.si_snri);
  double mean = 0.0, var = 0.0;
  for (double v : r.sdri) mean += v / 9.0;
  for (double v : r.sdri) var += (v - mean) * (v - mean) / 9.0;
  EXPECT_NEAR(r.sdri_stddev, std::sqrt(var), 1e-12);
  const ShiftResult again = ShiftExperiment(sep, ex, 64, 8);
  EXPECT_EQ(again.sdri, r.sdri);
  WriteShiftCsv(dir / "s.csv", r);
  const std::string text = ReadFile(dir / "s.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "shift,si_snri_db,sdri_db");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 10);
  EXPECT_THROW(ShiftExperiment(sep, ex, 64, 0), ConfigError);
  EXPECT_THROW(ShiftExperiment(sep, ex, -1, 8), ConfigError);
}

// ---------------------------------------------------------------- basis

TEST(UpgmaTest, ThreePoints) {
  // A-B closest, so A and B merge first and stay adjacent; the leaf C is
  // older than the merged cluster and is listed first.
  EXPECT_EQ(UpgmaOrderFromDistances({{0, 1, 4}, {1, 0, 4}, {4, 4, 0}}),
            (std::vector<int>{2, 0, 1}));
  EXPECT_EQ(UpgmaOrderFromDistances({{0, 4, 4}, {4, 0, 1}, {4, 1, 0}}),
            (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(UpgmaOrderFromDistances({{0, 4, 1}, {4, 0, 4}, {1, 4, 0}}),
            (std::vector<int>{1, 0, 2}));
}

// Naive average linkage: cluster distances are recomputed from leaf pairs
// at every step.
std::vector<int> NaiveUpgma(const std::vector<std::vector<double>>& rows) {
  const size_t n = rows.size();
  auto dist = [&](int a, int b) {
    double s = 0.0;
    for (size_t k = 0; k < rows[a].size(); ++k) s += (rows[a][k] - rows[b][k]) * (rows[a][k] - rows[b][k]);
    return std::sqrt(s);
  };
  std::vector<std::vector<int>> clusters;
  for (size_t i = 0; i < n; ++i) clusters.push_back({static_cast<int>(i)});
  while (clusters.size() > 1) {
    double best = INFINITY;
    size_t bi = 0, bj = 0;
    for (size_t i = 0; i < clusters.size(); ++i) {
      for (size_t j = i + 1; j < clusters.size(); ++j) {
        double s = 0.0;
        for (int a : clusters[i]) {
          for (int b : clusters[j]) s += dist(a, b);
        }
        s /= static_cast<double>(clusters[i].size() * clusters[j].size());
        if (s < best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    }
    std::vector<int> merged = clusters[bi];
    merged.insert(merged.end(), clusters[bj].begin(), clusters[bj].end());
    clusters.erase(clusters.begin() + bj);
    clusters.erase(clusters.begin() + bi);
    clusters.push_back(merged);
  }
  return clusters[0];
}

TEST(UpgmaTest, MatchesNaiveClustering) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 8; ++i) rows.push_back(RandomVector(5, rng));
    EXPECT_EQ(UpgmaOrder(rows), NaiveUpgma(rows)) << "trial " << trial;
  }
}

std::vector<std::vector<std::string>> ReadCsv(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  std::istringstream in(ReadFile(path));
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    out.push_back(cells);
  }
  return out;
}

TEST(BasisExportTest, CsvShapeAndOrder) {
  TempDir dir("basis");
  ModelConfig c = testing::MicroConfig(false);
  const ModelParams p = BuildModel(c, 3);
  const BasisExport e = ExportBasis(p, dir / "b");
  for (const char* which : {"encoder", "decoder"}) {
    const auto csv = ReadCsv(dir / ("b." + std::string(which) + ".csv"));
    ASSERT_EQ(csv.size(), 65u) << which;  // header + N rows
    for (const auto& row : csv) ASSERT_EQ(row.size(), 16u + 129u);
    EXPECT_EQ(csv[0][0], "w0");
    EXPECT_EQ(csv[0][16], "mag0");
  }
  const auto dec = ReadCsv(dir / "b.decoder.csv");
  const auto rows = BasisRows(p.decoder);
  for (int k = 0; k < 64; ++k) {
    const auto& orig = rows[e.decoder_order[k]];
    for (int j = 0; j < 16; ++j) ASSERT_NEAR(std::stod(dec[k + 1][j]), orig[j], 1e-8);
    const auto spec = Rfft(orig, kBasisFftSize);
    ASSERT_NEAR(std::stod(dec[k + 1][16 + 5]), std::abs(spec[5]), 1e-8);
  }
  const auto order = ReadCsv(dir / "b.order.csv");
  ASSERT_EQ(order.size(), 65u);
  EXPECT_EQ(std::stoi(order[3][1]), e.encoder_order[2]);
  EXPECT_EQ(std::stoi(order[3][2]), e.decoder_order[2]);
  std::vector<int> sorted = e.encoder_order;
  std::sort(sorted.begin(), sorted.end());
  for (int k = 0; k < 64; ++k) EXPECT_EQ(sorted[k], k);
}

}  // namespace
}  // namespace ctn
