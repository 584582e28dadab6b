// Copyright 2026 The SpikCommander Engine Authors
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

#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "spkc/data.hpp"
#include "spkc/kvdoc.hpp"
#include "spkc/model.hpp"

namespace spkc {

struct TrainConfig {
  double lr = 1e-2;
  double weight_decay = 1e-2;
  std::size_t epochs = 500;
  std::size_t batch_size = 256;
  std::size_t scheduler_t_max = 40;
  std::uint64_t seed = 312;
  // Global-norm clipping threshold; 0 disables clipping.
  double grad_clip = 0.0;
  // Share of the shuffled training data held out when no validation set
  // is supplied.
  double val_fraction = 0.1;

  void validate() const;

  /// "shd", "ssc" or "gsc" epochs, learning rate and weight decay.
  static TrainConfig preset(const std::string& name);
};

void write_train_config(const TrainConfig& cfg, KvDoc& doc);
TrainConfig read_train_config(KvReader& reader);

struct OptimizerState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Decoupled weight decay on parameters flagged for decay, then the Adam
/// update with bias correction. Throws NumericError naming the first
/// parameter with a non-finite gradient (nothing is modified then).
void adamw_step(std::span<Parameter* const> params, OptimizerState& state, double lr,
                double weight_decay);

/// base_lr * (1 + cos(pi * (epoch mod t_max) / t_max)) / 2.
double cosine_lr(std::size_t epoch, double base_lr, std::size_t t_max);

/// Scales all gradients so their joint L2 norm is at most max_norm.
/// Returns the norm before scaling.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

struct EpochMetrics {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double wall_ms = 0.0;
};

/// One JSON object on one line (no trailing newline).
std::string metrics_json(const EpochMetrics& m);

struct EvalResult {
  double loss = 0.0;
  double accuracy = 0.0;
  std::size_t count = 0;
};

/// Eval-mode loss and accuracy over equally long samples.
EvalResult evaluate(SpikCommanderModel& model, std::span<const DenseSample> samples,
                    std::size_t batch_size);

struct TrainOptions {
  AugmentConfig augment;
  // Best-validation checkpoint and JSON-lines metrics; empty paths skip
  // writing.
  std::string checkpoint_path;
  std::string metrics_path;
  // Reload the best-validation weights after the last epoch.
  bool restore_best = true;
  std::function<void(const EpochMetrics&)> on_epoch;
};

struct TrainResult {
  std::vector<EpochMetrics> log;
  std::size_t best_epoch = 0;
  double best_val_acc = -1.0;
};

/// BPTT training with AdamW and cosine annealing. When `validation` is
/// empty the last val_fraction of the seeded shuffle is held out. Throws
/// NumericError when the loss diverges; the last checkpoint written is
/// left in place.
TrainResult train(SpikCommanderModel& model, std::span<const DenseSample> data,
                  const TrainConfig& cfg, const TrainOptions& opts = {},
                  std::span<const DenseSample> validation = {});

}  // namespace spkc
