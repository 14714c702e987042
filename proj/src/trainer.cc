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

#include "ctn/trainer.h"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "ctn/errors.h"
#include "ctn/metrics.h"
#include "ctn/objective.h"
#include "ctn/ops.h"
#include "ctn/optimizer.h"
#include "file_util.h"

namespace ctn {

void TrainConfig::Validate() const {
  if (epochs <= 0) throw ConfigError("epochs must be positive");
  if (!(segment_seconds > 0.0)) throw ConfigError("segment_seconds must be positive");
  if (!(lr_initial > 0.0)) throw ConfigError("lr_initial must be positive");
  if (lr_halve_patience < 1) throw ConfigError("lr_halve_patience must be >= 1");
  if (!(clip_norm > 0.0)) throw ConfigError("clip_norm must be positive");
  if (batch_size <= 0) throw ConfigError("batch_size must be positive");
  if (max_steps < 0) throw ConfigError("max_steps must be >= 0");
}

std::vector<Segment> CutSegments(const std::vector<Example>& examples,
                                 int64_t segment_samples) {
  if (segment_samples < 2) throw ConfigError("segment length too short");
  std::vector<Segment> out;
  for (const Example& ex : examples) {
    const int64_t len = static_cast<int64_t>(ex.mixture.samples.size());
    for (const auto& r : ex.references) {
      if (static_cast<int64_t>(r.samples.size()) != len) {
        throw DataError("example '" + ex.id +
                        "': reference length differs from mixture");
      }
    }
    for (int64_t start = 0; start + segment_samples <= len;
         start += segment_samples) {
      Segment seg;
      auto cut = [&](const std::vector<double>& v) {
        return std::vector<double>(v.begin() + start,
                                   v.begin() + start + segment_samples);
      };
      seg.mixture = cut(ex.mixture.samples);
      for (const auto& r : ex.references) seg.references.push_back(cut(r.samples));
      out.push_back(std::move(seg));
    }
  }
  return out;
}

double MeanSiSnri(const ModelParams& params, const std::vector<Example>& examples) {
  if (examples.empty()) throw DataError("no examples to evaluate");
  double total = 0.0;
  for (const Example& ex : examples) {
    std::vector<AudioClip> est = Forward(params, ex.mixture);
    std::vector<std::vector<double>> refs, ests;
    for (const auto& r : ex.references) refs.push_back(r.samples);
    for (auto& e : est) ests.push_back(std::move(e.samples));
    total += ScoreSeparation(ex.mixture.samples, refs, ests).si_snri;
  }
  return total / static_cast<double>(examples.size());
}

StepResult TrainStep(ModelParams& params, Adam& adam,
                     const std::vector<const Segment*>& batch, double lr,
                     double clip_norm) {
  const auto named = params.Named();
  for (const auto& p : named) p.tensor.ClearGrad();
  StepResult result;
  const double weight = 1.0 / static_cast<double>(batch.size());
  for (const Segment* seg : batch) {
    const int64_t len = static_cast<int64_t>(seg->mixture.size());
    Tensor mixture(Shape{1, len}, seg->mixture);
    std::vector<Tensor> refs;
    double baseline = 0.0;
    for (const auto& r : seg->references) {
      refs.emplace_back(Shape{1, len}, r);
      baseline += SiSnr(seg->mixture, r);
    }
    baseline /= static_cast<double>(refs.size());
    // One tape per segment keeps peak memory at a single utterance graph;
    // gradients accumulate in the parameters across the batch.
    Tape tape;
    Tape::Scope scope(tape);
    PitLoss pit = UpitLoss(Separate(params, mixture), refs);
    const double value = pit.loss.item();
    if (!std::isfinite(value)) throw NumericError("training loss is not finite");
    result.loss += value * weight;
    result.si_snri.push_back(pit.assignment.mean_si_snr - baseline);
    tape.Backward(ops::Scale(pit.loss, weight));
  }
  ClipGradients(named, clip_norm);
  adam.Step(lr);
  for (const auto& p : named) {
    Tensor t = p.tensor;
    t.RoundToFloat();
    for (double v : t.data()) {
      if (!std::isfinite(v)) {
        throw NumericError("parameter '" + p.name + "' became non-finite");
      }
    }
  }
  return result;
}

TrainReport Fit(ModelParams& params, const std::vector<Example>& train,
                const std::vector<Example>& valid, const TrainConfig& config,
                const std::function<void(const EpochRecord&)>& on_epoch) {
  config.Validate();
  params.config.Validate();
  if (train.empty()) throw DataError("training set is empty");
  const int64_t segment_samples = static_cast<int64_t>(
      std::llround(config.segment_seconds * params.config.sample_rate));
  for (const Example& ex : train) {
    if (ex.mixture.sample_rate != params.config.sample_rate) {
      throw DataError("training example '" + ex.id + "' is not at " +
                      std::to_string(params.config.sample_rate) + " Hz");
    }
    if (static_cast<int>(ex.references.size()) != params.config.sources) {
      throw DataError("training example '" + ex.id + "' has the wrong number "
                      "of references");
    }
  }
  std::vector<Segment> segments = CutSegments(train, segment_samples);
  if (segments.empty()) {
    throw DataError("training set yields no full " +
                    std::to_string(config.segment_seconds) + " s segments");
  }

  params.SetRequiresGrad(true);
  Adam adam(params.Named());
  LrSchedule schedule(config.lr_initial, config.lr_halve_patience);
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(segments.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainReport report;
  report.best_params = params.Clone();
  const auto start = std::chrono::steady_clock::now();
  bool stop = false;
  for (int epoch = 1; epoch <= config.epochs && !stop; ++epoch) {
    // Fisher-Yates with raw engine output keeps the order independent of
    // the standard library's distribution implementations.
    for (size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng() % i]);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = schedule.lr();
    double loss_sum = 0.0, sisnri_sum = 0.0;
    int64_t seen = 0;
    for (size_t b = 0; b < order.size() && !stop; b += config.batch_size) {
      std::vector<const Segment*> batch;
      for (size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) {
        batch.push_back(&segments[order[i]]);
      }
      StepResult step = TrainStep(params, adam, batch, schedule.lr(),
                                  config.clip_norm);
      loss_sum += step.loss * static_cast<double>(batch.size());
      for (double v : step.si_snri) sisnri_sum += v;
      seen += static_cast<int64_t>(batch.size());
      ++report.total_steps;
      if (config.max_steps > 0 && report.total_steps >= config.max_steps) stop = true;
    }
    rec.train_loss = loss_sum / static_cast<double>(seen);
    rec.train_si_snri = sisnri_sum / static_cast<double>(seen);
    rec.valid_si_snri = valid.empty() ? rec.train_si_snri : MeanSiSnri(params, valid);
    rec.steps = report.total_steps;
    rec.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start).count();
    if (schedule.Observe(rec.valid_si_snri)) {
      report.best_epoch = epoch;
      report.best_valid_si_snri = rec.valid_si_snri;
      report.best_params = params.Clone();
    }
    report.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (config.target_train_si_snri &&
        rec.train_si_snri >= *config.target_train_si_snri) {
      stop = true;
    }
  }
  params.SetRequiresGrad(false);
  report.best_params.SetRequiresGrad(false);
  return report;
}

void WriteTrainReportCsv(const std::string& path, const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,lr,train_loss,train_si_snri,valid_si_snri,steps,seconds\n";
  char buf[256];
  for (const auto& e : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.6f,%.6f,%.6f,%lld,%.3f\n",
                  e.epoch, e.lr, e.train_loss, e.train_si_snri, e.valid_si_snri,
                  static_cast<long long>(e.steps), e.seconds);
    os << buf;
  }
  internal::WriteFileAtomic(path, os.str());
}

}  // namespace ctn
