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
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "spkc/data.hpp"
#include "spkc/model.hpp"
#include "spkc/trainer.hpp"

namespace spkc {

struct DataConfig {
  std::string train_path;
  std::string val_path;
  std::string test_path;
  double delta_t_ms = 10.0;
  std::uint16_t neuron_bin = 5;
  std::size_t target_t = 100;

  void validate() const;
};

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  DataConfig data;
  AugmentConfig augment;

  void validate() const;
};

/// Flat `section.key = value` text. Unknown keys, type mismatches and
/// constraint violations throw ConfigError naming the key.
RunConfig parse_config_text(std::string_view text);
RunConfig parse_config(const std::string& path);
/// Fully resolved config; parse_config_text(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& cfg);

std::string build_id();

/// Writes config.cfg, seed and build_id into dir (created if missing).
void write_run_dir(const RunConfig& cfg, const std::string& dir);

/// Loads an SPKE or SPKA file (detected by magic), bins events per the
/// data section and pads every sample to data.target_t steps.
std::vector<DenseSample> load_dataset(const std::string& path, const RunConfig& cfg);

/// Converts dense binary samples to events: one event per nonzero cell at
/// the centre of its 1000/T ms bin, duration one second. Re-binning with
/// delta_t = 1000/T ms and neuron_bin 1 gives the samples back.
EventDataset dense_to_events(const std::vector<DenseSample>& samples, std::uint16_t neurons);

/// Runs one subcommand. Returns 0 on success, 1 on usage errors and 2 on
/// runtime errors (reported on err).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spkc
