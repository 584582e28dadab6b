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

#include "spkc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>

#include "json.hpp"
#include "spkc/binio.hpp"
#include "spkc/errors.hpp"

namespace spkc {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("train.lr: must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("train.weight_decay: must be non-negative");
  if (batch_size == 0) throw ConfigError("train.batch_size: must be at least 1");
  if (scheduler_t_max == 0) throw ConfigError("train.scheduler_t_max: must be at least 1");
  if (!(grad_clip >= 0.0)) throw ConfigError("train.grad_clip: must be non-negative");
  if (!(val_fraction >= 0.0 && val_fraction < 1.0)) {
    throw ConfigError("train.val_fraction: must lie in [0, 1)");
  }
}

TrainConfig TrainConfig::preset(const std::string& name) {
  TrainConfig c;
  if (name == "shd") return c;
  if (name == "ssc" || name == "gsc") {
    c.epochs = 300;
    c.lr = name == "ssc" ? 5e-3 : 2e-3;
    c.weight_decay = name == "ssc" ? 1e-2 : 5e-3;
    return c;
  }
  throw ConfigError("train.preset: unknown preset '" + name + "'");
}

void write_train_config(const TrainConfig& c, KvDoc& doc) {
  doc.set("train.lr", format_double(c.lr));
  doc.set("train.weight_decay", format_double(c.weight_decay));
  doc.set("train.epochs", std::to_string(c.epochs));
  doc.set("train.batch_size", std::to_string(c.batch_size));
  doc.set("train.scheduler_t_max", std::to_string(c.scheduler_t_max));
  doc.set("train.seed", std::to_string(c.seed));
  doc.set("train.grad_clip", format_double(c.grad_clip));
  doc.set("train.val_fraction", format_double(c.val_fraction));
}

TrainConfig read_train_config(KvReader& r) {
  TrainConfig c = TrainConfig::preset(r.get_string("train.preset", "shd"));
  c.lr = r.get_double("train.lr", c.lr);
  c.weight_decay = r.get_double("train.weight_decay", c.weight_decay);
  c.epochs = r.get_size("train.epochs", c.epochs);
  c.batch_size = r.get_size("train.batch_size", c.batch_size);
  c.scheduler_t_max = r.get_size("train.scheduler_t_max", c.scheduler_t_max);
  c.seed = r.get_u64("train.seed", c.seed);
  c.grad_clip = r.get_double("train.grad_clip", c.grad_clip);
  c.val_fraction = r.get_double("train.val_fraction", c.val_fraction);
  c.validate();
  return c;
}

void adamw_step(std::span<Parameter* const> params, OptimizerState& st, double lr,
                double weight_decay) {
  for (const auto* p : params) {
    if (p->grad.size() != p->numel()) {
      throw ContractError("gradient of " + p->name + " has the wrong length");
    }
    for (double g : p->grad) {
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p->name);
    }
  }
  if (st.m.empty()) {
    for (const auto* p : params) {
      st.m.emplace_back(p->numel(), 0.0);
      st.v.emplace_back(p->numel(), 0.0);
    }
  }
  if (st.m.size() != params.size()) throw ContractError("optimizer state does not match parameters");
  ++st.step;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto w = p.value.to_vector();
    auto& m = st.m[k];
    auto& v = st.v[k];
    const double decay = p.decay ? 1.0 - lr * weight_decay : 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = p.grad[i];
      w[i] *= decay;
      m[i] = st.beta1 * m[i] + (1.0 - st.beta1) * g;
      v[i] = st.beta2 * v[i] + (1.0 - st.beta2) * g * g;
      w[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + st.eps);
    }
    p.assign(std::move(w));
  }
}

double cosine_lr(std::size_t epoch, double base_lr, std::size_t t_max) {
  if (t_max == 0) throw ConfigError("cosine schedule needs t_max >= 1");
  const double phase = static_cast<double>(epoch % t_max) / static_cast<double>(t_max);
  return base_lr * (1.0 + std::cos(std::numbers::pi * phase)) / 2.0;
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params)
    for (double g : p->grad) sq += g * g;
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (auto* p : params)
      for (double& g : p->grad) g *= s;
  }
  return norm;
}

std::string metrics_json(const EpochMetrics& m) {
  nlohmann::ordered_json j;
  j["epoch"] = m.epoch;
  j["lr"] = m.lr;
  j["train_loss"] = m.train_loss;
  j["train_acc"] = m.train_acc;
  j["val_loss"] = m.val_loss;
  j["val_acc"] = m.val_acc;
  j["wall_ms"] = m.wall_ms;
  return j.dump();
}

namespace {

// Exact in-memory copy of the trainable state.
struct Snapshot {
  std::vector<Tensor> values;
  std::vector<std::vector<double>> means, vars;
  std::vector<bool> ready;

  static Snapshot take(SpikCommanderModel& model) {
    Snapshot s;
    for (auto* p : model.parameters()) s.values.push_back(p->value);
    for (auto* bn : model.norms()) {
      s.means.push_back(bn->running_mean);
      s.vars.push_back(bn->running_var);
      s.ready.push_back(bn->stats_ready);
    }
    return s;
  }

  void restore(SpikCommanderModel& model) const {
    auto params = model.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
    auto norms = model.norms();
    for (std::size_t i = 0; i < norms.size(); ++i) {
      norms[i]->running_mean = means[i];
      norms[i]->running_var = vars[i];
      norms[i]->stats_ready = ready[i];
    }
  }
};

struct BatchStats {
  double loss_sum = 0.0;
  std::size_t correct = 0;
  std::size_t count = 0;
};

void tally(BatchStats& s, double loss, const Classification& c, const Batch& b) {
  s.loss_sum += loss * static_cast<double>(b.labels.size());
  for (std::size_t i = 0; i < b.labels.size(); ++i) s.correct += c.predicted[i] == b.labels[i];
  s.count += b.labels.size();
}

}  // namespace

EvalResult evaluate(SpikCommanderModel& model, std::span<const DenseSample> samples,
                    std::size_t batch_size) {
  if (samples.empty()) return {};
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  const Mode before = model.mode();
  model.set_mode(Mode::kEval);
  BatchStats s;
  std::vector<std::size_t> order;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    order.clear();
    for (std::size_t i = start; i < std::min(samples.size(), start + batch_size); ++i) order.push_back(i);
    const Batch b = make_batch(samples, order);
    const auto c = classify(model.forward(b.x, b.mask), &b.mask);
    tally(s, cross_entropy_loss(c.accumulated, b.labels)[0], c, b);
  }
  if (before != Mode::kEval) model.set_mode(before);
  return {s.loss_sum / s.count, static_cast<double>(s.correct) / s.count, s.count};
}

TrainResult train(SpikCommanderModel& model, std::span<const DenseSample> data,
                  const TrainConfig& cfg, const TrainOptions& opts,
                  std::span<const DenseSample> validation) {
  cfg.validate();
  opts.augment.validate();
  if (data.empty()) throw InputError("training set is empty");
  if (model.folded()) throw ConfigError("cannot train a model whose BN layers were folded");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::size_t> train_idx(data.size());
  std::iota(train_idx.begin(), train_idx.end(), 0);
  std::vector<DenseSample> held_out;
  if (validation.empty() && cfg.val_fraction > 0.0) {
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * data.size()));
    if (n_val > 0 && n_val < data.size()) {
      for (std::size_t i = data.size() - n_val; i < data.size(); ++i) held_out.push_back(data[train_idx[i]]);
      train_idx.resize(data.size() - n_val);
      validation = held_out;
    }
  }
  std::mt19937_64 aug_rng(opts.augment.rng_seed ^ cfg.seed);
  std::mt19937_64 dropout_rng(cfg.seed + 1);

  std::ofstream metrics;
  if (!opts.metrics_path.empty()) {
    metrics.open(opts.metrics_path, std::ios::trunc);
    if (!metrics) throw IoError("cannot write metrics log " + opts.metrics_path);
  }

  const auto params = model.parameters();
  OptimizerState opt;
  TrainResult result;
  Snapshot best;
  bool have_best = false;
  const bool augment = opts.augment.enabled();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const double lr = cosine_lr(epoch, cfg.lr, cfg.scheduler_t_max);
    model.set_mode(Mode::kTrain);
    std::shuffle(train_idx.begin(), train_idx.end(), rng);
    BatchStats stats;
    for (std::size_t start = 0; start < train_idx.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(train_idx.size(), start + cfg.batch_size);
      std::vector<DenseSample> batch_samples;
      for (std::size_t i = start; i < end; ++i) {
        const DenseSample& s = data[train_idx[i]];
        batch_samples.push_back(augment ? augment_dense(s, opts.augment, aug_rng) : s);
      }
      std::vector<std::size_t> order(batch_samples.size());
      std::iota(order.begin(), order.end(), 0);
      const Batch b = make_batch(batch_samples, order);

      for (auto* p : params) p->zero_grad();
      Tape tape;
      ForwardOptions fo;
      fo.tape = &tape;
      fo.rng = &dropout_rng;
      const auto c = classify(model.forward(b.x, b.mask, fo), &b.mask);
      const Tensor loss = cross_entropy_loss(c.accumulated, b.labels);
      if (!std::isfinite(loss[0])) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           " (loss is not finite)");
      }
      tape.backward(loss);
      if (cfg.grad_clip > 0.0) clip_grad_norm(params, cfg.grad_clip);
      adamw_step(params, opt, lr, cfg.weight_decay);
      tally(stats, loss[0], c, b);
    }

    EpochMetrics m;
    m.epoch = epoch;
    m.lr = lr;
    m.train_loss = stats.loss_sum / stats.count;
    m.train_acc = static_cast<double>(stats.correct) / stats.count;
    if (!validation.empty()) {
      const EvalResult v = evaluate(model, validation, cfg.batch_size);
      m.val_loss = v.loss;
      m.val_acc = v.accuracy;
    } else {
      m.val_loss = m.train_loss;
      m.val_acc = m.train_acc;
    }
    if (m.val_acc > result.best_val_acc) {
      result.best_val_acc = m.val_acc;
      result.best_epoch = epoch;
      best = Snapshot::take(model);
      have_best = true;
      if (!opts.checkpoint_path.empty()) save_checkpoint(model, opts.checkpoint_path);
    }
    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (metrics) metrics << metrics_json(m) << '\n' << std::flush;
    if (opts.on_epoch) opts.on_epoch(m);
    result.log.push_back(m);
  }

  if (opts.restore_best && have_best) best.restore(model);
  model.set_mode(Mode::kEval);
  return result;
}

}  // namespace spkc
