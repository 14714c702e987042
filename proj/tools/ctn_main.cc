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

// Command-line front end. Exit codes: 0 success, 1 internal error,
// 2 usage or configuration error, 3 data error, 4 numeric failure.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ctn/audio.h"
#include "ctn/basis.h"
#include "ctn/checkpoint.h"
#include "ctn/dataset.h"
#include "ctn/errors.h"
#include "ctn/evaluation.h"
#include "ctn/masks.h"
#include "ctn/mixtures.h"
#include "ctn/model.h"
#include "ctn/run_config.h"
#include "ctn/streaming.h"
#include "ctn/trainer.h"

namespace {

enum ExitCode { kOk = 0, kInternal = 1, kUsage = 2, kData = 3, kNumeric = 4 };

struct TrainArgs {
  std::string config, train_manifest, valid_manifest, out;
  std::optional<uint64_t> seed;
  std::optional<int> epochs;
  std::optional<int64_t> max_steps;
};

int RunTrain(const TrainArgs& a) {
  ctn::RunConfig rc = a.config.empty() ? ctn::RunConfig{} : ctn::LoadRunConfig(a.config);
  if (!a.train_manifest.empty()) rc.paths.train_manifest = a.train_manifest;
  if (!a.valid_manifest.empty()) rc.paths.valid_manifest = a.valid_manifest;
  if (!a.out.empty()) rc.paths.out = a.out;
  if (a.seed) rc.train.seed = *a.seed;
  if (a.epochs) rc.train.epochs = *a.epochs;
  if (a.max_steps) rc.train.max_steps = *a.max_steps;
  rc.model.Validate();
  rc.train.Validate();
  if (rc.paths.train_manifest.empty()) throw ctn::ConfigError("--train-manifest is required");
  if (rc.paths.out.empty()) throw ctn::ConfigError("--out is required");

  const auto train = ctn::LoadExamples(ctn::ReadManifest(rc.paths.train_manifest),
                                       rc.model.sources);
  std::vector<ctn::Example> valid;
  if (!rc.paths.valid_manifest.empty()) {
    valid = ctn::LoadExamples(ctn::ReadManifest(rc.paths.valid_manifest), rc.model.sources);
  }
  ctn::ModelParams params = ctn::BuildModel(rc.model, rc.train.seed);
  const auto report = ctn::Fit(params, train, valid, rc.train, [](const ctn::EpochRecord& e) {
    std::printf("epoch %d lr %.3g loss %.4f train_si_snri %.3f valid_si_snri %.3f steps %lld\n",
                e.epoch, e.lr, e.train_loss, e.train_si_snri, e.valid_si_snri,
                static_cast<long long>(e.steps));
    std::fflush(stdout);
  });
  ctn::SaveCheckpoint(rc.paths.out, report.best_params);
  ctn::WriteTrainReportCsv(rc.paths.out + ".report.csv", report);
  std::printf("best epoch %d, SI-SNRi %.3f dB; wrote %s\n", report.best_epoch,
              report.best_valid_si_snri, rc.paths.out.c_str());
  return kOk;
}

std::vector<std::vector<double>> StreamWhole(const ctn::StreamingSeparator& sep,
                                             const std::vector<double>& x) {
  constexpr size_t kChunk = 4096;
  ctn::StreamState state = sep.InitStream();
  std::vector<std::vector<double>> out(sep.config().sources);
  auto append = [&out](const std::vector<std::vector<double>>& part) {
    for (size_t c = 0; c < out.size(); ++c) {
      out[c].insert(out[c].end(), part[c].begin(), part[c].end());
    }
  };
  for (size_t i = 0; i < x.size(); i += kChunk) {
    const size_t n = std::min(kChunk, x.size() - i);
    append(sep.Push(state, std::span<const double>(x.data() + i, n)));
  }
  append(sep.Flush(state));
  for (auto& o : out) o.resize(x.size());
  return out;
}

int RunSeparate(const std::string& model, const std::string& input,
                const std::string& prefix, bool streaming) {
  const ctn::ModelParams params = ctn::LoadCheckpoint(model);
  const ctn::AudioClip clip = ctn::ReadWav(input);
  if (clip.sample_rate != params.config.sample_rate) {
    throw ctn::DataError("input is at " + std::to_string(clip.sample_rate) +
                         " Hz but the model expects " +
                         std::to_string(params.config.sample_rate) + " Hz");
  }
  std::vector<std::vector<double>> sources;
  if (streaming) {
    sources = StreamWhole(ctn::StreamingSeparator(params), clip.samples);
  } else {
    for (auto& s : ctn::Forward(params, clip)) sources.push_back(std::move(s.samples));
  }
  for (size_t c = 0; c < sources.size(); ++c) {
    const std::string path = prefix + "." + std::to_string(c + 1) + ".wav";
    ctn::WriteWav(path, ctn::AudioClip{sources[c], clip.sample_rate},
                  ctn::WavEncoding::kFloat32);
    std::printf("%s\n", path.c_str());
  }
  return kOk;
}

int RunEvaluate(const std::string& model, const std::string& oracle,
                const std::string& manifest_path, const std::string& report_path) {
  const ctn::Manifest manifest = ctn::ReadManifest(manifest_path);
  ctn::ModelParams params;
  ctn::Separator separator;
  bool masks_ok = true;
  if (!oracle.empty()) {
    const ctn::IdealMaskKind kind = ctn::ParseIdealMaskKind(oracle);
    auto base = ctn::OracleSeparator(kind);
    // Also check the per-bin mask structure on every utterance.
    separator = [kind, &masks_ok](const std::vector<double>&,
                                  const std::vector<std::vector<double>>& refs) {
      ctn::IdealMaskResult r = ctn::ApplyIdealMask(kind, refs);
      std::string why;
      if (!ctn::CheckMaskInvariants(kind, r, 1e-12, &why)) {
        masks_ok = false;
        std::cerr << "mask invariant violated: " << why << "\n";
      }
      return r.separated;
    };
  } else {
    params = ctn::LoadCheckpoint(model);
    separator = ctn::ModelSeparator(params);
  }
  const int threads = oracle.empty() ? ctn::ThreadsFromEnv() : 1;
  const auto report = ctn::Evaluate(manifest, separator, threads);
  if (!report_path.empty()) ctn::WriteEvaluationCsv(report_path, report);
  std::printf("evaluated %d, skipped %d, mean SI-SNRi %.3f dB, mean SDRi %.3f dB\n",
              report.evaluated, report.skipped, report.mean_si_snri, report.mean_sdri);
  if (!oracle.empty()) {
    std::printf("%s mask invariant: %s\n", oracle.c_str(), masks_ok ? "pass" : "FAIL");
    if (!masks_ok) return kNumeric;
  }
  return kOk;
}

int RunBench(const std::string& model, const std::string& config, uint64_t seed,
             double seconds, int trials) {
  ctn::ModelParams params;
  if (!model.empty()) {
    params = ctn::LoadCheckpoint(model);
  } else if (config == "best-causal") {
    params = ctn::BuildModel(ctn::ModelConfig::BestCausal(), seed);
  } else if (!config.empty()) {
    params = ctn::BuildModel(ctn::LoadRunConfig(config).model, seed);
  } else {
    throw ctn::ConfigError("bench needs --model or --config");
  }
  const ctn::StreamingSeparator sep(params);
  const ctn::BenchReport r = ctn::BenchTimePerFrame(sep, seconds, trials, seed);
  std::printf("hop_ms %.3f\n", r.hop_ms);
  std::printf("frames %lld\n", static_cast<long long>(r.frames_measured));
  std::printf("mean_tpf_ms %.4f\n", r.mean_tpf_ms);
  std::printf("p95_tpf_ms %.4f\n", r.p95_tpf_ms);
  std::printf("stddev_tpf_ms %.4f\n", r.stddev_tpf_ms);
  if (r.trial_mean_ms.size() > 1) {
    for (size_t i = 0; i < r.trial_mean_ms.size(); ++i) {
      std::printf("trial %zu mean_tpf_ms %.4f\n", i + 1, r.trial_mean_ms[i]);
    }
  }
  std::printf("verdict %s\n", r.real_time ? "real-time" : "not-real-time");
  return kOk;
}

int RunOracle(const std::string& kind_name, const std::vector<std::string>& refs,
              const std::string& prefix) {
  const ctn::IdealMaskKind kind = ctn::ParseIdealMaskKind(kind_name);
  std::vector<std::vector<double>> sources;
  int rate = 0;
  for (const auto& path : refs) {
    ctn::AudioClip c = ctn::ReadWav(path);
    if (rate != 0 && c.sample_rate != rate) throw ctn::DataError("sample rates differ");
    rate = c.sample_rate;
    sources.push_back(std::move(c.samples));
  }
  const auto result = ctn::ApplyIdealMask(kind, sources);
  std::string why;
  const bool ok = ctn::CheckMaskInvariants(kind, result, 1e-12, &why);
  for (size_t c = 0; c < result.separated.size(); ++c) {
    ctn::WriteWav(prefix + "." + std::to_string(c + 1) + ".wav",
                  ctn::AudioClip{result.separated[c], rate}, ctn::WavEncoding::kFloat32);
  }
  std::printf("%s mask invariant: %s%s\n", kind_name.c_str(), ok ? "pass" : "FAIL ",
              why.c_str());
  return ok ? kOk : kNumeric;
}

int RunMix(const std::string& root, const std::string& out_dir, const ctn::MixOptions& o) {
  const auto manifest = ctn::SynthesizeMixtures(ctn::ListSourcePools(root), out_dir, o);
  std::printf("wrote %zu mixtures to %s/mixtures.tsv\n", manifest.entries.size(),
              out_dir.c_str());
  return kOk;
}

int RunInspect(const std::string& model, const std::string& prefix) {
  const ctn::ModelParams params = ctn::LoadCheckpoint(model);
  ctn::ExportBasis(params, prefix);
  std::printf("%s.encoder.csv\n%s.decoder.csv\n%s.order.csv\n", prefix.c_str(),
              prefix.c_str(), prefix.c_str());
  return kOk;
}

int RunShift(const std::string& model, const std::string& oracle,
             const std::string& manifest_path, size_t index, int64_t max_shift,
             int64_t step, const std::string& report_path) {
  const ctn::Manifest manifest = ctn::ReadManifest(manifest_path);
  if (index >= manifest.entries.size()) throw ctn::ConfigError("--index is out of range");
  ctn::Manifest one = manifest;
  one.entries = {manifest.entries[index]};
  const ctn::Example ex = ctn::LoadExamples(one)[0];
  ctn::ModelParams params;
  ctn::Separator separator;
  if (!oracle.empty()) {
    separator = ctn::OracleSeparator(ctn::ParseIdealMaskKind(oracle));
  } else {
    params = ctn::LoadCheckpoint(model);
    separator = ctn::ModelSeparator(params);
  }
  const auto r = ctn::ShiftExperiment(separator, ex, max_shift, step);
  if (!report_path.empty()) ctn::WriteShiftCsv(report_path, r);
  std::printf("shift,si_snri_db,sdri_db\n");
  for (size_t i = 0; i < r.shifts.size(); ++i) {
    std::printf("%lld,%.6f,%.6f\n", static_cast<long long>(r.shifts[i]), r.si_snri[i],
                r.sdri[i]);
  }
  std::printf("sdri_stddev_db %.6f\n", r.sdri_stddev);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-domain speech separation toolkit"};
  app.require_subcommand(1);
  int code = kOk;

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a model");
  c_train->add_option("--config", train.config, "Run configuration (JSON)");
  c_train->add_option("--train-manifest", train.train_manifest);
  c_train->add_option("--valid-manifest", train.valid_manifest);
  c_train->add_option("--out", train.out, "Checkpoint path");
  c_train->add_option("--seed", train.seed);
  c_train->add_option("--epochs", train.epochs);
  c_train->add_option("--max-steps", train.max_steps);

  std::string model, input, prefix, oracle, manifest, report, config;
  bool streaming = false;
  auto* c_sep = app.add_subcommand("separate", "Separate one mixture");
  c_sep->add_option("--model", model)->required();
  c_sep->add_option("--input", input)->required();
  c_sep->add_option("--out-prefix", prefix)->required();
  c_sep->add_flag("--streaming", streaming, "Use the frame-by-frame causal path");

  auto* c_eval = app.add_subcommand("evaluate", "Score a manifest");
  auto* o_model = c_eval->add_option("--model", model);
  auto* o_oracle = c_eval->add_option("--oracle", oracle, "irm, ibm or wfm");
  o_model->excludes(o_oracle);
  c_eval->add_option("--manifest", manifest)->required();
  c_eval->add_option("--report", report);

  double seconds = 10.0;
  int trials = 1;
  uint64_t seed = 1;
  auto* c_bench = app.add_subcommand("bench", "Time per frame of streaming inference");
  c_bench->add_option("--model", model);
  c_bench->add_option("--config", config, "Run configuration, or 'best-causal'");
  c_bench->add_option("--seed", seed);
  c_bench->add_option("--seconds", seconds);
  c_bench->add_option("--trials", trials);

  std::vector<std::string> refs;
  std::string kind = "irm";
  auto* c_oracle = app.add_subcommand("oracle", "Ideal-mask separation of given sources");
  c_oracle->add_option("--kind", kind, "irm, ibm or wfm");
  c_oracle->add_option("--references", refs)->required();
  c_oracle->add_option("--out-prefix", prefix)->required();

  std::string root, out_dir;
  ctn::MixOptions mix;
  auto* c_mix = app.add_subcommand("mix", "Synthesize mixtures");
  c_mix->add_option("--sources-root", root, "Directory with one subdirectory per speaker")
      ->required();
  c_mix->add_option("--out-dir", out_dir)->required();
  c_mix->add_option("--count", mix.count);
  c_mix->add_option("--sources", mix.sources);
  c_mix->add_option("--snr-min", mix.snr_min_db);
  c_mix->add_option("--snr-max", mix.snr_max_db);
  c_mix->add_option("--seed", mix.seed);
  c_mix->add_option("--sample-rate", mix.sample_rate);

  auto* c_inspect = app.add_subcommand("inspect", "Export encoder/decoder bases");
  c_inspect->add_option("--model", model)->required();
  c_inspect->add_option("--out-prefix", prefix)->required();

  size_t index = 0;
  int64_t max_shift = 64, step = 8;
  auto* c_shift = app.add_subcommand("shift-test", "SDRi versus input shift");
  auto* s_model = c_shift->add_option("--model", model);
  auto* s_oracle = c_shift->add_option("--oracle", oracle);
  s_model->excludes(s_oracle);
  c_shift->add_option("--manifest", manifest)->required();
  c_shift->add_option("--index", index);
  c_shift->add_option("--max-shift", max_shift);
  c_shift->add_option("--step", step);
  c_shift->add_option("--report", report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (c_train->parsed()) {
      code = RunTrain(train);
    } else if (c_sep->parsed()) {
      code = RunSeparate(model, input, prefix, streaming);
    } else if (c_eval->parsed()) {
      if (model.empty() == oracle.empty()) {
        throw ctn::ConfigError("evaluate needs exactly one of --model or --oracle");
      }
      code = RunEvaluate(model, oracle, manifest, report);
    } else if (c_bench->parsed()) {
      code = RunBench(model, config, seed, seconds, trials);
    } else if (c_oracle->parsed()) {
      code = RunOracle(kind, refs, prefix);
    } else if (c_mix->parsed()) {
      code = RunMix(root, out_dir, mix);
    } else if (c_inspect->parsed()) {
      code = RunInspect(model, prefix);
    } else if (c_shift->parsed()) {
      if (model.empty() == oracle.empty()) {
        throw ctn::ConfigError("shift-test needs exactly one of --model or --oracle");
      }
      code = RunShift(model, oracle, manifest, index, max_shift, step, report);
    }
  } catch (const ctn::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ctn::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const ctn::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ctn::ShapeError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInternal;
  }
  return code;
}
