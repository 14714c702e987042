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

#include "ctn/evaluation.h"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <thread>

#include "ctn/errors.h"
#include "ctn/metrics.h"
#include "file_util.h"

namespace ctn {

Separator ModelSeparator(const ModelParams& params) {
  return [&params](const std::vector<double>& mixture,
                   const std::vector<std::vector<double>>&) {
    std::vector<std::vector<double>> out;
    for (auto& clip : Forward(params, AudioClip{mixture, params.config.sample_rate})) {
      out.push_back(std::move(clip.samples));
    }
    return out;
  };
}

Separator OracleSeparator(IdealMaskKind kind) {
  return [kind](const std::vector<double>&,
                const std::vector<std::vector<double>>& references) {
    return ApplyIdealMask(kind, references).separated;
  };
}

int ThreadsFromEnv() {
  const char* v = std::getenv("CTN_THREADS");
  if (v == nullptr || *v == '\0') return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("CTN_THREADS must be a positive integer");
  return static_cast<int>(std::min<long>(n, 256));
}

namespace {

UtteranceResult ScoreOne(const std::string& id, const std::vector<double>& mixture,
                         const std::vector<std::vector<double>>& refs,
                         const Separator& separator) {
  UtteranceResult r;
  r.id = id;
  for (const auto& ref : refs) {
    if (ref.size() != mixture.size()) {
      throw DataError("reference length " + std::to_string(ref.size()) +
                      " differs from mixture length " + std::to_string(mixture.size()));
    }
  }
  const auto estimates = separator(mixture, refs);
  if (estimates.size() != refs.size()) {
    throw DataError("separator returned " + std::to_string(estimates.size()) +
                    " estimates for " + std::to_string(refs.size()) + " references");
  }
  const SeparationScore s = ScoreSeparation(mixture, refs, estimates);
  r.ok = true;
  r.perm = s.perm;
  r.si_snri = s.si_snri;
  r.sdri = s.sdri;
  return r;
}

template <typename Fn>
EvaluationReport RunAll(size_t count, int threads, Fn&& score) {
  EvaluationReport report;
  report.utterances.resize(count);
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < count; i = next++) {
      report.utterances[i] = score(i);
    }
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(count)));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  double si = 0.0, sd = 0.0;
  for (const auto& u : report.utterances) {
    if (u.ok) {
      ++report.evaluated;
      si += u.si_snri;
      sd += u.sdri;
    } else {
      ++report.skipped;
      std::cerr << "warning: skipped " << u.id << ": " << u.message << "\n";
    }
  }
  if (report.evaluated > 0) {
    report.mean_si_snri = si / report.evaluated;
    report.mean_sdri = sd / report.evaluated;
  }
  return report;
}

std::vector<std::vector<double>> Samples(const std::vector<AudioClip>& clips) {
  std::vector<std::vector<double>> out;
  for (const auto& c : clips) out.push_back(c.samples);
  return out;
}

}  // namespace

EvaluationReport Evaluate(const Manifest& manifest, const Separator& separator,
                          int threads) {
  return RunAll(manifest.entries.size(), threads, [&](size_t i) {
    const ManifestEntry& e = manifest.entries[i];
    try {
      Manifest one = manifest;
      one.entries = {e};
      Example ex = std::move(LoadExamples(one)[0]);
      return ScoreOne(e.mixture, ex.mixture.samples, Samples(ex.references), separator);
    } catch (const DataError& err) {
      UtteranceResult r;
      r.id = e.mixture;
      r.message = err.what();
      return r;
    }
  });
}

EvaluationReport EvaluateExamples(const std::vector<Example>& examples,
                                  const Separator& separator, int threads) {
  return RunAll(examples.size(), threads, [&](size_t i) {
    const Example& ex = examples[i];
    try {
      return ScoreOne(ex.id, ex.mixture.samples, Samples(ex.references), separator);
    } catch (const DataError& err) {
      UtteranceResult r;
      r.id = ex.id;
      r.message = err.what();
      return r;
    }
  });
}

void WriteEvaluationCsv(const std::string& path, const EvaluationReport& report) {
  std::string out = "utterance,status,si_snri_db,sdri_db\n";
  char buf[512];
  for (const auto& u : report.utterances) {
    if (u.ok) {
      std::snprintf(buf, sizeof(buf), "%s,ok,%.6f,%.6f\n", u.id.c_str(), u.si_snri,
                    u.sdri);
    } else {
      std::snprintf(buf, sizeof(buf), "%s,skipped,,\n", u.id.c_str());
    }
    out += buf;
  }
  std::snprintf(buf, sizeof(buf), "mean,evaluated=%d;skipped=%d,%.6f,%.6f\n",
                report.evaluated, report.skipped, report.mean_si_snri, report.mean_sdri);
  out += buf;
  internal::WriteFileAtomic(path, out);
}

ShiftResult ShiftExperiment(const Separator& separator, const Example& example,
                            int64_t max_shift, int64_t step) {
  const auto& mix = example.mixture.samples;
  if (step < 1) throw ConfigError("shift step must be positive");
  if (max_shift < 0 || max_shift >= static_cast<int64_t>(mix.size())) {
    throw ConfigError("max_shift must lie in [0, clip length)");
  }
  ShiftResult result;
  for (int64_t s = 0; s <= max_shift; s += step) {
    std::vector<double> m(mix.begin() + s, mix.end());
    std::vector<std::vector<double>> refs;
    for (const auto& r : example.references) {
      if (r.samples.size() != mix.size()) {
        throw DataError("reference length differs from mixture length");
      }
      refs.emplace_back(r.samples.begin() + s, r.samples.end());
    }
    const UtteranceResult u = ScoreOne(example.id, m, refs, separator);
    result.shifts.push_back(s);
    result.si_snri.push_back(u.si_snri);
    result.sdri.push_back(u.sdri);
  }
  double mean = 0.0;
  for (double v : result.sdri) mean += v;
  mean /= static_cast<double>(result.sdri.size());
  double var = 0.0;
  for (double v : result.sdri) var += (v - mean) * (v - mean);
  result.sdri_stddev = std::sqrt(var / static_cast<double>(result.sdri.size()));
  return result;
}

void WriteShiftCsv(const std::string& path, const ShiftResult& result) {
  std::string out = "shift,si_snri_db,sdri_db\n";
  char buf[128];
  for (size_t i = 0; i < result.shifts.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%lld,%.6f,%.6f\n",
                  static_cast<long long>(result.shifts[i]), result.si_snri[i],
                  result.sdri[i]);
    out += buf;
  }
  internal::WriteFileAtomic(path, out);
}

}  // namespace ctn
