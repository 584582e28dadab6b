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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spkc/attention.hpp"
#include "spkc/kvdoc.hpp"
#include "spkc/layers.hpp"
#include "spkc/mask.hpp"

namespace spkc {

enum class InputKind { kSpike, kAnalog };

struct ModelConfig {
  std::size_t blocks = 1;
  std::size_t heads = 8;
  std::size_t hidden = 128;
  std::size_t input_neurons = 140;
  std::size_t window_radius = 20;
  std::size_t time_steps = 100;
  std::size_t expansion = 4;
  std::size_t classes = 20;
  double dropout = 0.1;
  InputKind input_kind = InputKind::kSpike;
  LifParams lif;
  SurrogateParams surrogate;
  std::uint64_t init_seed = 312;

  /// Throws ConfigError for odd expansion * hidden, fewer than two classes,
  /// and anything the attention or neuron configs reject.
  void validate() const;
  AttentionConfig attention() const;

  /// Named presets: "shd-1l-8-128", "ssc-1l-16-256", "ssc-2l-16-256".
  static ModelConfig preset(const std::string& name);
};

/// Writes the config under `model.*` keys.
void write_model_config(const ModelConfig& cfg, KvDoc& doc);
/// Reads `model.*` keys over defaults; the window defaults to round(T/5)
/// when only the time steps are given. Validates the result.
ModelConfig read_model_config(KvReader& reader);

/// Spike embedding: X' = SN(BN(DConv7(PConv(X)))), X'' = SN(BN(Linear(X'))) + X'.
struct SpikingEmbedding {
  SpikingEmbedding() = default;
  SpikingEmbedding(std::string name, std::size_t in, std::size_t hidden, std::mt19937_64& rng);

  std::string name;
  Parameter pconv_weight;  // (N, D)
  Parameter pconv_bias;
  Parameter dconv_kernel;  // (D, 7)
  Parameter dconv_bias;
  BatchNormState bn;
  ProjectionBlock lin;

  /// Output values lie in {0, 1, 2}.
  Tensor forward(const Tensor& x, const ForwardContext& ctx);
  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

/// Inverted-bottleneck MLP with a temporal depthwise filter on half of the
/// expanded channels.
struct ScrMlp {
  ScrMlp() = default;
  ScrMlp(std::string name, std::size_t hidden, std::size_t expansion, std::mt19937_64& rng);

  std::string name;
  ProjectionBlock pre_pc;   // D -> D
  ProjectionBlock pre_lin;  // D -> aD
  DepthwiseBlock dc;        // aD/2 channels, k = 31
  ProjectionBlock post_lin;  // aD -> D
  ProjectionBlock post_pc;   // D -> D

  Tensor forward(const Tensor& x, const ForwardContext& ctx);
  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

/// x + MSTASA(x), then + SCR-MLP.
struct Block {
  Block() = default;
  Block(std::string name, const ModelConfig& cfg, std::mt19937_64& rng);

  Mstasa attention;
  ScrMlp mlp;

  Tensor forward(const Tensor& x, const TemporalMask& mask, const ForwardContext& ctx);
  void parameters(std::vector<Parameter*>& out);
  void norms(std::vector<BatchNormState*>& out);
  void fold();
};

struct ForwardOptions {
  Tape* tape = nullptr;
  // Needed for dropout in train mode.
  std::mt19937_64* rng = nullptr;
  LayerProbe* probe = nullptr;
  SpikeFn spike_fn = SpikeFn::kHeaviside;
};

class SpikCommanderModel {
 public:
  /// Weights drawn from a generator seeded with cfg.init_seed.
  explicit SpikCommanderModel(const ModelConfig& cfg);

  const ModelConfig& config() const noexcept { return cfg_; }

  /// Per-step class scores (T, B, Y). x is (T, B, N): binary for spike
  /// input, real for analog input.
  Tensor forward(const Tensor& x, const TemporalMask& mask, const ForwardOptions& opts = {});

  /// All trainable parameters in declaration order.
  std::vector<Parameter*> parameters();
  std::vector<BatchNormState*> norms();
  std::size_t parameter_count();

  void set_mode(Mode mode);
  Mode mode() const noexcept { return mode_; }
  void init_running_stats();
  /// Absorbs every BN into its preceding layer. Requires eval mode.
  void fold_batchnorm();
  bool folded() const noexcept { return folded_; }

  SpikingEmbedding embedding;
  std::vector<Block> blocks;
  Parameter head_weight;  // (D, Y)
  Parameter head_bias;

 private:
  ModelConfig cfg_;
  Mode mode_ = Mode::kTrain;
  bool folded_ = false;
};

struct Classification {
  Tensor probabilities;  // per-step softmax (T, B, Y)
  Tensor accumulated;    // (B, Y), summed over valid steps
  std::vector<std::size_t> predicted;
};

/// Per-step softmax summed over time; padded steps are skipped when a mask
/// is given. Ties in the prediction go to the lowest class index.
Classification classify(const Tensor& scores, const TemporalMask* mask = nullptr);

std::size_t argmax_lowest(std::span<const double> values);

/// Mean over the batch of -log(yhat[label] / sum(yhat)). Recorded on the
/// tape of `accumulated`.
Tensor cross_entropy_loss(const Tensor& accumulated, std::span<const std::size_t> labels);

/// Checkpoint: "SPKC", u32 version, config text, tensors (name, shape, f32),
/// trailing CRC32 of everything after the version field.
std::vector<char> serialize_checkpoint(SpikCommanderModel& model);
SpikCommanderModel deserialize_checkpoint(const std::vector<char>& bytes);
void save_checkpoint(SpikCommanderModel& model, const std::string& path);
SpikCommanderModel load_checkpoint(const std::string& path);

}  // namespace spkc
