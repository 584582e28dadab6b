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

#include "spkc/cli.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "spkc/binio.hpp"
#include "spkc/energy.hpp"
#include "spkc/errors.hpp"
#include "spkc/kvdoc.hpp"

#ifndef SPKC_BUILD_ID
#define SPKC_BUILD_ID "unknown"
#endif

namespace spkc {

namespace {

std::uint16_t to_u16(std::size_t v, const char* key) {
  if (v == 0 || v > 0xFFFF) throw ConfigError(std::string(key) + ": must lie in [1, 65535]");
  return static_cast<std::uint16_t>(v);
}

std::string magic_of(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  char m[4] = {};
  in.read(m, 4);
  return std::string(m, static_cast<std::size_t>(in.gcount()));
}

std::vector<DenseSample> pad_all(const std::vector<DenseSample>& in, std::size_t target_t,
                                 std::ostream& err) {
  std::vector<DenseSample> out;
  out.reserve(in.size());
  std::size_t truncated = 0;
  for (const auto& d : in) out.push_back(pad_and_mask(d, target_t, &truncated).sample);
  if (truncated > 0) err << "warning: " << truncated << " samples truncated to " << target_t << " steps\n";
  return out;
}

std::vector<DenseSample> load_dataset_impl(const std::string& path, const RunConfig& cfg,
                                           std::ostream& err) {
  const std::string magic = magic_of(path);
  std::vector<DenseSample> dense;
  if (magic == "SPKE") {
    if (cfg.model.input_kind != InputKind::kSpike) {
      throw ConfigError("model.input_kind: '" + path + "' holds events but the model expects analog input");
    }
    const EventDataset ds = load_events(path);
    if (ds.repaired_unsorted > 0) {
      err << "warning: " << ds.repaired_unsorted << " samples had unsorted events\n";
    }
    if (ds.raw_neurons % cfg.data.neuron_bin != 0 ||
        ds.raw_neurons / cfg.data.neuron_bin != cfg.model.input_neurons) {
      throw ConfigError("data.neuron_bin: " + std::to_string(ds.raw_neurons) + " raw neurons binned by " +
                        std::to_string(cfg.data.neuron_bin) + " do not give model.input_neurons = " +
                        std::to_string(cfg.model.input_neurons));
    }
    for (const auto& s : ds.samples) {
      dense.push_back(bin_and_discretize(s, ds.raw_neurons, cfg.data.neuron_bin, cfg.data.delta_t_ms));
    }
  } else if (magic == "SPKA") {
    if (cfg.model.input_kind != InputKind::kAnalog) {
      throw ConfigError("model.input_kind: '" + path + "' holds analog features but the model expects spikes");
    }
    dense = load_analog(path);
    for (const auto& d : dense) {
      if (d.data.dim(1) != cfg.model.input_neurons) {
        throw ConfigError("model.input_neurons: '" + path + "' has " + std::to_string(d.data.dim(1)) +
                          " features");
      }
    }
  } else {
    throw FormatError("'" + path + "' is neither an SPKE nor an SPKA file");
  }
  for (const auto& d : dense) {
    if (d.label >= cfg.model.classes) {
      throw InputError("'" + path + "': label " + std::to_string(d.label) + " >= model.classes");
    }
  }
  return pad_all(dense, cfg.data.target_t, err);
}

std::string require_path(const std::string& path, const char* key) {
  if (path.empty()) throw ConfigError(std::string(key) + ": no dataset path configured");
  return path;
}

void apply_seed(RunConfig& cfg, std::int64_t seed) {
  if (seed < 0) return;
  cfg.train.seed = static_cast<std::uint64_t>(seed);
  cfg.model.init_seed = static_cast<std::uint64_t>(seed);
}

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? RunConfig{} : parse_config(path);
}

int run_train(const std::string& config, std::int64_t seed, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  RunConfig cfg = config_or_default(config);
  apply_seed(cfg, seed);
  const auto train_set = load_dataset_impl(require_path(cfg.data.train_path, "data.train_path"), cfg, err);
  std::vector<DenseSample> val_set;
  if (!cfg.data.val_path.empty()) val_set = load_dataset_impl(cfg.data.val_path, cfg, err);

  write_run_dir(cfg, out_dir);
  const std::filesystem::path dir(out_dir);
  TrainOptions opts;
  opts.augment = cfg.augment;
  opts.checkpoint_path = (dir / "best.ckpt").string();
  opts.metrics_path = (dir / "metrics.jsonl").string();
  opts.on_epoch = [&](const EpochMetrics& m) {
    out << "epoch " << m.epoch << " lr " << m.lr << " loss " << m.train_loss << " acc " << m.train_acc
        << " val_loss " << m.val_loss << " val_acc " << m.val_acc << "\n";
  };
  SpikCommanderModel model(cfg.model);
  const TrainResult r = train(model, train_set, cfg.train, opts, val_set);
  out << "best epoch " << r.best_epoch << " val_acc " << r.best_val_acc << "\n";
  if (!cfg.data.test_path.empty()) {
    const auto test_set = load_dataset_impl(cfg.data.test_path, cfg, err);
    const EvalResult e = evaluate(model, test_set, cfg.train.batch_size);
    out << "test accuracy " << e.accuracy << " loss " << e.loss << " (" << e.count << " samples)\n";
  }
  return 0;
}

int run_eval(const std::string& config, const std::string& checkpoint, const std::string& data_path,
             std::ostream& out, std::ostream& err) {
  RunConfig cfg = config_or_default(config);
  SpikCommanderModel model = load_checkpoint(checkpoint);
  cfg.model = model.config();
  const std::string path = data_path.empty() ? require_path(cfg.data.test_path, "data.test_path") : data_path;
  const auto samples = load_dataset_impl(path, cfg, err);
  const EvalResult e = evaluate(model, samples, cfg.train.batch_size);
  out << "accuracy " << e.accuracy << " loss " << e.loss << " samples " << e.count << "\n";
  return 0;
}

int run_profile(const std::string& config, const std::string& checkpoint, const std::string& input,
                const std::string& data_path, std::size_t probe_size, std::int64_t seed,
                const std::string& out_path, std::ostream& out, std::ostream& err) {
  RunConfig cfg = config_or_default(config);
  apply_seed(cfg, seed);
  SpikCommanderModel model = load_checkpoint(checkpoint);
  cfg.model = model.config();
  const InputKind kind = input == "analog" ? InputKind::kAnalog : InputKind::kSpike;
  if (kind != cfg.model.input_kind) {
    throw ConfigError("--input: checkpoint was built for " +
                      std::string(cfg.model.input_kind == InputKind::kSpike ? "spike" : "analog") + " input");
  }

  std::vector<DenseSample> probe;
  std::string path = data_path;
  if (path.empty()) path = !cfg.data.test_path.empty() ? cfg.data.test_path : cfg.data.train_path;
  if (!path.empty()) {
    probe = load_dataset_impl(path, cfg, err);
    if (probe.size() > probe_size) probe.resize(probe_size);
  } else {
    // Random Bernoulli(0.1) spikes or unit normal features.
    std::mt19937_64 rng(cfg.train.seed);
    std::bernoulli_distribution spike(0.1);
    std::normal_distribution<double> feat(0.0, 1.0);
    const std::size_t T = cfg.data.target_t, N = cfg.model.input_neurons;
    for (std::size_t i = 0; i < probe_size; ++i) {
      std::vector<double> v(T * N);
      for (auto& x : v) x = kind == InputKind::kSpike ? (spike(rng) ? 1.0 : 0.0) : feat(rng);
      probe.push_back(DenseSample{Tensor({T, N}, std::move(v)), T, 0});
    }
  }
  if (probe.empty()) throw InputError("profile: probe dataset is empty");
  std::vector<std::size_t> order(probe.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  const Batch batch = make_batch(probe, order);

  model.set_mode(Mode::kEval);
  model.fold_batchnorm();
  const EnergyReport report = estimate_energy(model, batch);
  out << format_energy_text(report);
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out_path + "'");
  f << format_energy_jsonl(report);
  if (!f) throw IoError("write failed for '" + out_path + "'");
  return 0;
}

int run_ingest(const std::string& csv, std::size_t neurons, const std::string& out_path, std::ostream& out) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw IoError("cannot open '" + csv + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  const EventDataset ds = events_from_csv(ss.str(), to_u16(neurons, "--neurons"));
  save_events(ds, out_path);
  out << "wrote " << ds.samples.size() << " samples to " << out_path << "\n";
  return 0;
}

int run_synth(const SynthConfig& sc, std::uint64_t seed, std::uint64_t stream, const std::string& out_path,
              std::ostream& out) {
  const auto samples = synth_dataset(sc, seed, stream);
  save_events(dense_to_events(samples, to_u16(sc.neurons, "--n")), out_path);
  out << "wrote " << samples.size() << " samples (" << sc.classes << " classes, T=" << sc.time_steps
      << ", N=" << sc.neurons << ") to " << out_path << "\n";
  return 0;
}

}  // namespace

void DataConfig::validate() const {
  if (!(delta_t_ms > 0.0 && delta_t_ms <= 1000.0)) throw ConfigError("data.delta_t_ms: must lie in (0, 1000]");
  if (neuron_bin == 0) throw ConfigError("data.neuron_bin: must be positive");
  if (target_t == 0) throw ConfigError("data.target_t: must be positive");
}

void RunConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  augment.validate();
}

RunConfig parse_config_text(std::string_view text) {
  const KvDoc doc = KvDoc::parse(text);
  KvReader r(doc);
  RunConfig c;
  c.model = read_model_config(r);
  c.train = read_train_config(r);
  c.augment = read_augment_config(r);
  c.data.train_path = r.get_string("data.train_path", "");
  c.data.val_path = r.get_string("data.val_path", "");
  c.data.test_path = r.get_string("data.test_path", "");
  c.data.delta_t_ms = r.get_double("data.delta_t_ms", c.data.delta_t_ms);
  c.data.neuron_bin = to_u16(r.get_size("data.neuron_bin", c.data.neuron_bin), "data.neuron_bin");
  c.data.target_t = r.get_size("data.target_t", c.data.target_t);
  r.reject_unknown();
  c.validate();
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string echo_config(const RunConfig& c) {
  KvDoc doc;
  write_model_config(c.model, doc);
  write_train_config(c.train, doc);
  write_augment_config(c.augment, doc);
  doc.set("data.train_path", c.data.train_path);
  doc.set("data.val_path", c.data.val_path);
  doc.set("data.test_path", c.data.test_path);
  doc.set("data.delta_t_ms", format_double(c.data.delta_t_ms));
  doc.set("data.neuron_bin", std::to_string(c.data.neuron_bin));
  doc.set("data.target_t", std::to_string(c.data.target_t));
  return doc.emit();
}

std::string build_id() { return SPKC_BUILD_ID; }

void write_run_dir(const RunConfig& cfg, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create run directory '" + dir + "': " + ec.message());
  const std::filesystem::path p(dir);
  auto put = [](const std::filesystem::path& f, const std::string& text) {
    write_file(f.string(), std::vector<char>(text.begin(), text.end()));
  };
  put(p / "config.cfg", echo_config(cfg));
  put(p / "seed", std::to_string(cfg.train.seed) + "\n");
  put(p / "build_id", build_id() + "\n");
}

std::vector<DenseSample> load_dataset(const std::string& path, const RunConfig& cfg) {
  return load_dataset_impl(path, cfg, std::cerr);
}

EventDataset dense_to_events(const std::vector<DenseSample>& samples, std::uint16_t neurons) {
  EventDataset ds;
  ds.raw_neurons = neurons;
  for (const auto& d : samples) {
    const std::size_t T = d.data.dim(0);
    if (d.data.dim(1) != neurons) throw DimensionError("dense_to_events: channel count mismatch");
    if (d.label > 0xFFFF) throw InputError("dense_to_events: label exceeds 65535");
    EventSample s;
    s.label = static_cast<std::uint16_t>(d.label);
    s.duration_us = 1000000;
    for (std::size_t t = 0; t < T; ++t) {
      const auto at = static_cast<std::uint32_t>(std::floor((static_cast<double>(t) + 0.5) * 1e6 / static_cast<double>(T)));
      for (std::size_t n = 0; n < neurons; ++n) {
        if (d.data[t * neurons + n] != 0.0) s.events.push_back({at, static_cast<std::uint16_t>(n)});
      }
    }
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiking transformer training and profiling", "spkc"};
  app.require_subcommand(1);

  std::string config, out_path, checkpoint, data_path, input = "spike", csv;
  std::int64_t seed = -1;
  std::size_t probe_size = 16, neurons = 700, stream = 0;
  SynthConfig sc;

  auto* train_cmd = app.add_subcommand("train", "train a model and write a run directory");
  train_cmd->add_option("--config", config, "run config file");
  train_cmd->add_option("--seed", seed, "overrides train.seed and model.init_seed")->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--out", out_path, "run directory")->default_val("run");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a dataset");
  eval_cmd->add_option("--config", config, "run config file (data section)");
  eval_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  eval_cmd->add_option("--data", data_path, "dataset; defaults to data.test_path");

  auto* profile_cmd = app.add_subcommand("profile", "estimate inference energy of a checkpoint");
  profile_cmd->add_option("--config", config, "run config file");
  profile_cmd->add_option("--checkpoint", checkpoint, "checkpoint file")->required();
  profile_cmd->add_option("--input", input, "spike or analog")->check(CLI::IsMember({"spike", "analog"}));
  profile_cmd->add_option("--data", data_path, "probe dataset; defaults to data.test_path");
  profile_cmd->add_option("--samples", probe_size, "probe batch size")->check(CLI::PositiveNumber);
  profile_cmd->add_option("--seed", seed, "seed for the random probe")->check(CLI::NonNegativeNumber);
  profile_cmd->add_option("--out", out_path, "per-layer JSON lines")->default_val("energy.jsonl");

  auto* ingest_cmd = app.add_subcommand("ingest", "convert a CSV event dump to SPKE");
  ingest_cmd->add_option("csv", csv, "time_us,neuron,label lines; blank line between samples")->required();
  ingest_cmd->add_option("--neurons", neurons, "raw neuron count")->default_val(700);
  ingest_cmd->add_option("--out", out_path, "SPKE output")->required();

  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic motif dataset as SPKE");
  synth_cmd->add_option("--classes", sc.classes)->default_val(sc.classes)->check(CLI::Range(2, 65535));
  synth_cmd->add_option("--per-class", sc.samples_per_class)->default_val(sc.samples_per_class)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--t", sc.time_steps)->default_val(sc.time_steps)->check(CLI::PositiveNumber);
  synth_cmd->add_option("--n", sc.neurons)->default_val(sc.neurons)->check(CLI::Range(1, 65535));
  synth_cmd->add_option("--noise", sc.noise_p)->default_val(sc.noise_p)->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--stream", stream, "noise stream; same seed, other stream = held-out set");
  synth_cmd->add_option("--seed", seed)->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--out", out_path, "SPKE output")->required();

  std::vector<const char*> argv{"spkc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    err << "\n" << app.help();
    return 1;
  }

  try {
    if (*train_cmd) return run_train(config, seed, out_path, out, err);
    if (*eval_cmd) return run_eval(config, checkpoint, data_path, out, err);
    if (*profile_cmd) return run_profile(config, checkpoint, input, data_path, probe_size, seed, out_path, out, err);
    if (*ingest_cmd) return run_ingest(csv, neurons, out_path, out);
    if (*synth_cmd) return run_synth(sc, seed < 0 ? 312 : static_cast<std::uint64_t>(seed), stream, out_path, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace spkc
