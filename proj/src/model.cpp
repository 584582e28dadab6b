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

#include "spkc/model.hpp"

#include <cmath>

#include "spkc/binio.hpp"
#include "spkc/errors.hpp"
#include "spkc/fold.hpp"
#include "spkc/ops.hpp"

namespace spkc {

namespace {

constexpr std::size_t kSeeKernel = 7;
constexpr std::size_t kScrKernel = 31;
constexpr std::uint32_t kCheckpointVersion = 1;

}  // namespace

void ModelConfig::validate() const {
  if (blocks == 0) throw ConfigError("model.blocks: must be at least 1");
  if (input_neurons == 0) throw ConfigError("model.input_neurons: must be positive");
  if (expansion == 0 || (expansion * hidden) % 2 != 0) {
    throw ConfigError("model.expansion: expansion * hidden must be even, got " +
                      std::to_string(expansion * hidden));
  }
  if (classes < 2) throw ConfigError("model.classes: need at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("model.dropout: must lie in [0, 1)");
  if (heads == 0 || hidden % heads != 0) {
    throw ConfigError("model.heads: hidden " + std::to_string(hidden) +
                      " is not divisible by " + std::to_string(heads) + " heads");
  }
  if (time_steps == 0) throw ConfigError("model.time_steps: must be positive");
  if (window_radius < 1 || window_radius >= time_steps) {
    throw ConfigError("model.window_radius: must lie in [1, time_steps - 1]");
  }
  attention().validate();
  try {
    lif.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.lif: ") + e.what());
  }
  try {
    surrogate.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(std::string("model.surrogate.alpha: ") + e.what());
  }
}

AttentionConfig ModelConfig::attention() const {
  AttentionConfig a;
  a.hidden_d = hidden;
  a.heads_h = heads;
  a.window_radius_w = window_radius;
  a.time_steps_t = time_steps;
  return a;
}

ModelConfig ModelConfig::preset(const std::string& name) {
  ModelConfig c;
  if (name == "shd-1l-8-128") {
    c.expansion = 1;
    c.classes = 20;
  } else if (name == "ssc-1l-16-256" || name == "ssc-2l-16-256") {
    c.blocks = name[4] == '2' ? 2 : 1;
    c.heads = 16;
    c.hidden = 256;
    c.classes = 35;
  } else {
    throw ConfigError("model.preset: unknown preset '" + name + "'");
  }
  return c;
}

void write_model_config(const ModelConfig& c, KvDoc& doc) {
  doc.set("model.blocks", std::to_string(c.blocks));
  doc.set("model.heads", std::to_string(c.heads));
  doc.set("model.hidden", std::to_string(c.hidden));
  doc.set("model.input_neurons", std::to_string(c.input_neurons));
  doc.set("model.window_radius", std::to_string(c.window_radius));
  doc.set("model.time_steps", std::to_string(c.time_steps));
  doc.set("model.expansion", std::to_string(c.expansion));
  doc.set("model.classes", std::to_string(c.classes));
  doc.set("model.dropout", format_double(c.dropout));
  doc.set("model.input_kind", c.input_kind == InputKind::kSpike ? "spike" : "analog");
  doc.set("model.lif.tau", format_double(c.lif.tau));
  doc.set("model.lif.v_th", format_double(c.lif.v_th));
  doc.set("model.lif.v_reset", format_double(c.lif.v_reset));
  doc.set("model.surrogate.alpha", format_double(c.surrogate.alpha));
  doc.set("model.init_seed", std::to_string(c.init_seed));
}

ModelConfig read_model_config(KvReader& r) {
  ModelConfig c;
  if (r.has("model.preset")) c = ModelConfig::preset(r.get_string("model.preset", ""));
  c.blocks = r.get_size("model.blocks", c.blocks);
  c.heads = r.get_size("model.heads", c.heads);
  c.hidden = r.get_size("model.hidden", c.hidden);
  c.input_neurons = r.get_size("model.input_neurons", c.input_neurons);
  c.time_steps = r.get_size("model.time_steps", c.time_steps);
  c.window_radius =
      r.get_size("model.window_radius", r.has("model.time_steps")
                                            ? AttentionConfig::default_window(c.time_steps)
                                            : c.window_radius);
  c.expansion = r.get_size("model.expansion", c.expansion);
  c.classes = r.get_size("model.classes", c.classes);
  c.dropout = r.get_double("model.dropout", c.dropout);
  const std::string kind = r.get_string("model.input_kind", "spike");
  if (kind == "spike") {
    c.input_kind = InputKind::kSpike;
  } else if (kind == "analog") {
    c.input_kind = InputKind::kAnalog;
  } else {
    throw ConfigError("model.input_kind: expected spike or analog, got '" + kind + "'");
  }
  c.lif.tau = r.get_double("model.lif.tau", c.lif.tau);
  c.lif.v_th = r.get_double("model.lif.v_th", c.lif.v_th);
  c.lif.v_reset = r.get_double("model.lif.v_reset", c.lif.v_reset);
  c.surrogate.alpha = r.get_double("model.surrogate.alpha", c.surrogate.alpha);
  c.init_seed = r.get_u64("model.init_seed", c.init_seed);
  c.validate();
  return c;
}

SpikingEmbedding::SpikingEmbedding(std::string n, std::size_t in, std::size_t hidden,
                                   std::mt19937_64& rng)
    : name(std::move(n)),
      pconv_weight(name + ".pconv.weight", uniform_init({in, hidden}, in, rng)),
      pconv_bias(name + ".pconv.bias", Tensor::zeros({hidden}), false),
      dconv_kernel(name + ".dconv.kernel", uniform_init({hidden, kSeeKernel}, kSeeKernel, rng)),
      dconv_bias(name + ".dconv.bias", Tensor::zeros({hidden}), false),
      bn(name + ".bn", hidden),
      lin(name + ".lin", hidden, hidden, ProjectionKind::kLinear, rng) {}

Tensor SpikingEmbedding::forward(const Tensor& x, const ForwardContext& ctx) {
  const std::size_t n = pconv_weight.value.dim(0), d = pconv_weight.value.dim(1);
  if (x.shape().size() != 3 || x.dim(2) != n) {
    throw DimensionError("embedding: expected (T, B, " + std::to_string(n) + ") input, got " +
                         shape_str(x.shape()));
  }
  const std::uint64_t rows = x.numel() / n;
  // PConv and DConv have no nonlinearity between them, so both are charged
  // against the network input.
  ctx.note(name + ".pconv", LayerKind::kPconv, rows * n * d, x, true);
  ctx.note(name + ".dconv", LayerKind::kDconv1d, rows * d * kSeeKernel, x, true);
  Tensor y = conv1d_pointwise(x, ctx.param(pconv_weight), ctx.param(pconv_bias));
  y = conv1d_depthwise(y, ctx.param(dconv_kernel), ctx.param(dconv_bias));
  if (!bn.folded) y = batchnorm(y, bn, ctx.param(bn.gamma), ctx.param(bn.beta));
  Tensor x1 = ctx.spike(ctx.maybe_dropout(y));
  Tensor out = add(lin.forward(x1, ctx), x1);
  if (ctx.probe) ctx.probe->observe("see.residual", out);
  return out;
}

void SpikingEmbedding::parameters(std::vector<Parameter*>& out) {
  out.insert(out.end(), {&pconv_weight, &pconv_bias, &dconv_kernel, &dconv_bias, &bn.gamma,
                         &bn.beta});
  lin.parameters(out);
}

void SpikingEmbedding::norms(std::vector<BatchNormState*>& out) {
  out.push_back(&bn);
  lin.norms(out);
}

void SpikingEmbedding::fold() {
  auto f = fold_bn_depthwise(dconv_kernel.value, dconv_bias.value, bn);
  dconv_kernel.value = f.weight;
  dconv_bias.value = f.bias;
  bn.folded = true;
  lin.fold();
}

ScrMlp::ScrMlp(std::string n, std::size_t hidden, std::size_t expansion, std::mt19937_64& rng)
    : name(std::move(n)) {
  const std::size_t wide = hidden * expansion;
  if (wide % 2 != 0) {
    throw ConfigError("scr-mlp: expanded width " + std::to_string(wide) + " is odd");
  }
  pre_pc = ProjectionBlock(name + ".pre_pc", hidden, hidden, ProjectionKind::kPconv, rng);
  pre_lin = ProjectionBlock(name + ".pre_lin", hidden, wide, ProjectionKind::kLinear, rng);
  dc = DepthwiseBlock(name + ".dc", wide / 2, kScrKernel, rng);
  post_lin = ProjectionBlock(name + ".post_lin", wide, hidden, ProjectionKind::kLinear, rng);
  post_pc = ProjectionBlock(name + ".post_pc", hidden, hidden, ProjectionKind::kPconv, rng);
}

Tensor ScrMlp::forward(const Tensor& x, const ForwardContext& ctx) {
  Tensor h = pre_lin.forward(pre_pc.forward(x, ctx), ctx);
  auto [h1, h2] = split_last(h, h.dim(2) / 2);
  Tensor merged = concat_last(dc.forward(h1, ctx), h2);
  return post_pc.forward(post_lin.forward(merged, ctx), ctx);
}

void ScrMlp::parameters(std::vector<Parameter*>& out) {
  pre_pc.parameters(out);
  pre_lin.parameters(out);
  dc.parameters(out);
  post_lin.parameters(out);
  post_pc.parameters(out);
}

void ScrMlp::norms(std::vector<BatchNormState*>& out) {
  pre_pc.norms(out);
  pre_lin.norms(out);
  dc.norms(out);
  post_lin.norms(out);
  post_pc.norms(out);
}

void ScrMlp::fold() {
  pre_pc.fold();
  pre_lin.fold();
  dc.fold();
  post_lin.fold();
  post_pc.fold();
}

Block::Block(std::string name, const ModelConfig& cfg, std::mt19937_64& rng)
    : attention(name + ".mstasa", cfg.attention(), rng),
      mlp(name + ".scr", cfg.hidden, cfg.expansion, rng) {}

Tensor Block::forward(const Tensor& x, const TemporalMask& mask, const ForwardContext& ctx) {
  Tensor y = add(x, attention.forward(x, mask, ctx));
  return add(y, mlp.forward(y, ctx));
}

void Block::parameters(std::vector<Parameter*>& out) {
  attention.parameters(out);
  mlp.parameters(out);
}

void Block::norms(std::vector<BatchNormState*>& out) {
  attention.norms(out);
  mlp.norms(out);
}

void Block::fold() {
  attention.fold();
  mlp.fold();
}

SpikCommanderModel::SpikCommanderModel(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  std::mt19937_64 rng(cfg_.init_seed);
  embedding = SpikingEmbedding("see", cfg_.input_neurons, cfg_.hidden, rng);
  for (std::size_t i = 0; i < cfg_.blocks; ++i) {
    blocks.emplace_back("block" + std::to_string(i), cfg_, rng);
  }
  head_weight =
      Parameter("head.weight", uniform_init({cfg_.hidden, cfg_.classes}, cfg_.hidden, rng));
  head_bias = Parameter("head.bias", Tensor::zeros({cfg_.classes}), false);
}

Tensor SpikCommanderModel::forward(const Tensor& x, const TemporalMask& mask,
                                   const ForwardOptions& opts) {
  if (x.shape().size() != 3) {
    throw DimensionError("model input must be (T, B, N), got " + shape_str(x.shape()));
  }
  if (x.dim(2) != cfg_.input_neurons) {
    throw DimensionError("dimension mismatch on axis 2: input has " + std::to_string(x.dim(2)) +
                         " channels, model expects " + std::to_string(cfg_.input_neurons));
  }
  if (mask.steps() != x.dim(0) || mask.batch() != x.dim(1)) {
    throw DimensionError("mask is " + std::to_string(mask.steps()) + "x" +
                         std::to_string(mask.batch()) + " but input is " + shape_str(x.shape()));
  }
  if (cfg_.input_kind == InputKind::kSpike && !is_binary(x)) {
    throw InputError("spike input must contain only 0 and 1");
  }
  if (cfg_.input_kind == InputKind::kAnalog && !all_finite(x)) {
    throw InputError("analog input contains non-finite values");
  }

  ForwardContext ctx;
  ctx.tape = opts.tape;
  ctx.mode = mode_;
  ctx.neuron = NeuronConfig{cfg_.lif, cfg_.surrogate, opts.spike_fn};
  ctx.dropout_p = cfg_.dropout;
  ctx.rng = opts.rng;
  ctx.probe = opts.probe;

  Tensor h = embedding.forward(x, ctx);
  for (auto& b : blocks) h = b.forward(h, mask, ctx);
  ctx.note("head", LayerKind::kLinear, (h.numel() / cfg_.hidden) * cfg_.hidden * cfg_.classes, h);
  return linear(h, ctx.param(head_weight), ctx.param(head_bias));
}

std::vector<Parameter*> SpikCommanderModel::parameters() {
  std::vector<Parameter*> out;
  embedding.parameters(out);
  for (auto& b : blocks) b.parameters(out);
  out.push_back(&head_weight);
  out.push_back(&head_bias);
  return out;
}

std::vector<BatchNormState*> SpikCommanderModel::norms() {
  std::vector<BatchNormState*> out;
  embedding.norms(out);
  for (auto& b : blocks) b.norms(out);
  return out;
}

std::size_t SpikCommanderModel::parameter_count() {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->numel();
  return n;
}

void SpikCommanderModel::set_mode(Mode mode) {
  if (mode == Mode::kTrain && folded_) {
    throw ConfigError("cannot train a model whose BN layers were folded");
  }
  mode_ = mode;
  for (auto* bn : norms()) bn->mode = mode;
}

void SpikCommanderModel::init_running_stats() {
  for (auto* bn : norms()) bn->init_running_stats();
}

void SpikCommanderModel::fold_batchnorm() {
  if (folded_) throw ConfigError("BN layers are already folded");
  if (mode_ != Mode::kEval) throw ConfigError("BN folding requires eval mode");
  for (auto* bn : norms()) {
    if (!bn->stats_ready) throw ConfigError("BN folding requires running statistics");
  }
  embedding.fold();
  for (auto& b : blocks) b.fold();
  folded_ = true;
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

Classification classify(const Tensor& scores, const TemporalMask* mask) {
  if (scores.shape().size() != 3) {
    throw DimensionError("scores must be (T, B, Y), got " + shape_str(scores.shape()));
  }
  const std::size_t t = scores.dim(0), b = scores.dim(1), y = scores.dim(2);
  Classification out;
  out.probabilities = softmax_last(scores);
  Tensor weighted = out.probabilities;
  if (mask) {
    if (mask->steps() != t || mask->batch() != b) {
      throw DimensionError("mask does not match the score tensor " + shape_str(scores.shape()));
    }
    weighted = mul_time_batch(weighted, mask->weights());
  }
  out.accumulated = reshape(sum_time(weighted), {b, y});
  auto acc = out.accumulated.data();
  for (std::size_t i = 0; i < b; ++i) out.predicted.push_back(argmax_lowest(acc.subspan(i * y, y)));
  return out;
}

Tensor cross_entropy_loss(const Tensor& accumulated, std::span<const std::size_t> labels) {
  if (accumulated.shape().size() != 2) {
    throw DimensionError("accumulated scores must be (B, Y), got " +
                         shape_str(accumulated.shape()));
  }
  const std::size_t b = accumulated.dim(0), y = accumulated.dim(1);
  if (labels.size() != b) {
    throw DimensionError("got " + std::to_string(labels.size()) + " labels for a batch of " +
                         std::to_string(b));
  }
  auto a = accumulated.data();
  std::vector<double> sums(b, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] >= y) {
      throw InputError("label " + std::to_string(labels[i]) + " out of range [0, " +
                       std::to_string(y) + ")");
    }
    for (std::size_t j = 0; j < y; ++j) {
      if (a[i * y + j] < 0.0) throw InputError("accumulated scores must be non-negative");
      sums[i] += a[i * y + j];
    }
    loss += std::log(sums[i]) - std::log(a[i * y + labels[i]]);
  }
  loss /= static_cast<double>(b);

  Tape* tape = common_tape({&accumulated});
  if (!tape) return Tensor({1}, {loss});
  std::vector<std::size_t> lab(labels.begin(), labels.end());
  return tape->record({1}, {loss},
                      [accumulated, lab = std::move(lab), sums = std::move(sums)](
                          Tape& tp, std::span<const double> gy) {
                        const std::size_t b = accumulated.dim(0), y = accumulated.dim(1);
                        auto a = accumulated.data();
                        const double s = gy[0] / static_cast<double>(b);
                        std::vector<double> g(b * y);
                        for (std::size_t i = 0; i < b; ++i) {
                          for (std::size_t j = 0; j < y; ++j) g[i * y + j] = s / sums[i];
                          g[i * y + lab[i]] -= s / a[i * y + lab[i]];
                        }
                        tp.accumulate(accumulated, g);
                      });
}

namespace {

std::string bn_base(const BatchNormState& bn) {
  const std::string& g = bn.gamma.name;
  return g.substr(0, g.size() - std::string(".gamma").size());
}

void put_tensor(ByteWriter& w, const std::string& name, const Shape& shape,
                std::span<const double> data) {
  w.str(name);
  w.u32(static_cast<std::uint32_t>(shape.size()));
  for (auto d : shape) w.u32(static_cast<std::uint32_t>(d));
  for (double v : data) w.f32(static_cast<float>(v));
}

std::vector<double> get_tensor(ByteReader& r, const std::string& name, const Shape& shape) {
  const std::string got = r.str();
  if (got != name) throw FormatError("checkpoint tensor '" + got + "' where '" + name + "' expected");
  const std::uint32_t rank = r.u32();
  Shape s(rank);
  for (auto& d : s) d = r.u32();
  if (s != shape) {
    throw FormatError("checkpoint tensor " + name + " has shape " + shape_str(s) +
                      ", model expects " + shape_str(shape));
  }
  std::vector<double> out(shape_numel(shape));
  for (auto& v : out) v = r.f32();
  return out;
}

}  // namespace

std::vector<char> serialize_checkpoint(SpikCommanderModel& model) {
  if (model.folded()) throw ConfigError("folded models cannot be checkpointed");
  KvDoc doc;
  write_model_config(model.config(), doc);
  bool stats = true;
  for (auto* bn : model.norms()) stats = stats && bn->stats_ready;
  doc.set("checkpoint.stats_ready", stats ? "true" : "false");

  ByteWriter w;
  w.bytes("SPKC");
  w.u32(kCheckpointVersion);
  w.str(doc.emit());
  const auto params = model.parameters();
  const auto norms = model.norms();
  w.u32(static_cast<std::uint32_t>(params.size() + 2 * norms.size()));
  for (auto* p : params) put_tensor(w, p->name, p->shape(), p->value.data());
  for (auto* bn : norms) {
    const Shape s{bn->channels()};
    put_tensor(w, bn_base(*bn) + ".running_mean", s, bn->running_mean);
    put_tensor(w, bn_base(*bn) + ".running_var", s, bn->running_var);
  }
  std::vector<char> out = w.buffer();
  const std::uint32_t crc = crc32_of(out.data() + 8, out.size() - 8);
  ByteWriter tail;
  tail.u32(crc);
  out.insert(out.end(), tail.buffer().begin(), tail.buffer().end());
  return out;
}

SpikCommanderModel deserialize_checkpoint(const std::vector<char>& bytes) {
  ByteReader head(bytes.data(), bytes.size());
  if (head.bytes(4) != "SPKC") throw FormatError("not a checkpoint: bad magic");
  const std::uint32_t version = head.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  if (bytes.size() < 12) throw IoError("truncated checkpoint");
  ByteReader crc_reader(bytes.data() + bytes.size() - 4, 4);
  const std::uint32_t stored = crc_reader.u32();
  if (crc32_of(bytes.data() + 8, bytes.size() - 12) != stored) {
    throw FormatError("checkpoint CRC mismatch");
  }

  ByteReader r(bytes.data() + 8, bytes.size() - 12);
  const KvDoc doc = KvDoc::parse(r.str());
  KvReader kv(doc);
  const ModelConfig cfg = read_model_config(kv);
  const bool stats = kv.get_bool("checkpoint.stats_ready", false);
  kv.reject_unknown();

  SpikCommanderModel model(cfg);
  const auto params = model.parameters();
  const auto norms = model.norms();
  const std::uint32_t count = r.u32();
  if (count != params.size() + 2 * norms.size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " tensors, model needs " +
                      std::to_string(params.size() + 2 * norms.size()));
  }
  for (auto* p : params) p->assign(get_tensor(r, p->name, p->shape()));
  for (auto* bn : norms) {
    const Shape s{bn->channels()};
    bn->running_mean = get_tensor(r, bn_base(*bn) + ".running_mean", s);
    bn->running_var = get_tensor(r, bn_base(*bn) + ".running_var", s);
    bn->stats_ready = stats;
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in checkpoint");
  return model;
}

void save_checkpoint(SpikCommanderModel& model, const std::string& path) {
  write_file(path, serialize_checkpoint(model));
}

SpikCommanderModel load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_file(path));
}

}  // namespace spkc
