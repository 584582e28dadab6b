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
#include <string_view>
#include <vector>

#include "spkc/kvdoc.hpp"
#include "spkc/mask.hpp"
#include "spkc/tensor.hpp"

namespace spkc {

struct Event {
  std::uint32_t time_us = 0;
  std::uint16_t neuron = 0;

  bool operator==(const Event&) const = default;
};

struct EventSample {
  std::vector<Event> events;
  std::uint16_t label = 0;
  std::uint32_t duration_us = 0;
};

struct EventDataset {
  std::uint16_t raw_neurons = 0;
  std::vector<EventSample> samples;
  // Samples whose events were stored out of time order and re-sorted.
  std::size_t repaired_unsorted = 0;
};

/// SPKE container: "SPKE", u32 version (1), u32 sample count, u16 raw
/// neuron count, then per sample u16 label, u32 duration_us, u32 event
/// count and (u32 time_us, u16 neuron) pairs. All little-endian.
std::vector<char> encode_events(const EventDataset& ds);
/// Throws FormatError for a bad header or invalid events, IoError when
/// the payload is truncated. Unsorted events are stably sorted.
EventDataset decode_events(const std::vector<char>& bytes);
EventDataset load_events(const std::string& path);
void save_events(const EventDataset& ds, const std::string& path);

/// CSV dump with `time_us,neuron,label` lines; blank lines separate
/// samples. A sample's duration is its last event time.
EventDataset events_from_csv(std::string_view text, std::uint16_t raw_neurons);

/// One dense (T, N) sample; rows at or after valid_steps are zero.
struct DenseSample {
  Tensor data;
  std::size_t valid_steps = 0;
  std::size_t label = 0;
};

/// SPKA container for real-valued features: "SPKA", u32 version (1), u32
/// sample count, u16 feature count, then per sample u16 label, u32 steps
/// and steps * features f32 values (time-major).
std::vector<char> encode_analog(std::span<const DenseSample> samples, std::uint16_t features);
std::vector<DenseSample> decode_analog(const std::vector<char>& bytes);
std::vector<DenseSample> load_analog(const std::string& path);
void save_analog(std::span<const DenseSample> samples, std::uint16_t features,
                 const std::string& path);

/// round(1000 / delta_t_ms).
std::size_t time_steps_for(double delta_t_ms);

/// Bins events into round(1000 / delta_t_ms) steps of raw_neurons /
/// neuron_bin channels. A cell is 1 when at least one event falls in it.
/// Events past the last step land in the last step.
DenseSample bin_and_discretize(const EventSample& s, std::uint16_t raw_neurons,
                               std::uint16_t neuron_bin, double delta_t_ms);

struct PaddedSample {
  DenseSample sample;
  TemporalMask mask;
};

/// Zero-pads (or truncates, counting it in *truncated) to target_t steps.
PaddedSample pad_and_mask(const DenseSample& d, std::size_t target_t,
                          std::size_t* truncated = nullptr);

struct Batch {
  Tensor x;  // (T, B, N)
  TemporalMask mask;
  std::vector<std::size_t> labels;
};

/// Stacks equally long samples along the batch axis in the given order.
Batch make_batch(std::span<const DenseSample> samples, std::span<const std::size_t> order);

struct AugmentConfig {
  // Event path.
  double drop_proportion_pct = 0.0;
  double time_drop_pct = 0.0;
  std::size_t neuron_drop_count = 0;
  // Dense/analog path.
  std::size_t freq_masks = 0;
  std::size_t freq_mask_bins = 0;
  std::size_t time_masks = 0;
  double time_mask_pct = 0.0;
  std::uint64_t rng_seed = 312;

  /// Throws ConfigError for percentages outside [0, 100].
  void validate() const;
  bool enabled() const;

  /// "none", "shd", "ssc" or "gsc".
  static AugmentConfig preset(const std::string& name);
};

void write_augment_config(const AugmentConfig& cfg, KvDoc& doc);
/// Reads `augment.*` keys; `augment.preset` selects the starting values.
AugmentConfig read_augment_config(KvReader& reader);

/// Removes events with start_us <= time < start_us + width_us.
EventSample drop_by_time(const EventSample& s, std::uint32_t start_us, std::uint32_t width_us);
/// Removes events with lo <= neuron < hi.
EventSample drop_by_neuron(const EventSample& s, std::uint16_t lo, std::uint16_t hi);

/// With probability drop_proportion_pct / 100, applies drop_by_time or
/// drop_by_neuron (chosen uniformly) at a uniformly placed window or band.
EventSample event_drop(const EventSample& s, const AugmentConfig& cfg, std::uint16_t raw_neurons,
                       std::mt19937_64& rng);

struct MaskBand {
  std::size_t start = 0;
  std::size_t width = 0;
};

/// Zeroes up to freq_masks feature bands (width <= freq_mask_bins) and
/// time_masks time windows (width <= time_mask_pct% of T) of a (T, N)
/// tensor. The chosen bands are reported when requested.
Tensor spec_mask(const Tensor& x, const AugmentConfig& cfg, std::mt19937_64& rng,
                 std::vector<MaskBand>* freq_bands = nullptr,
                 std::vector<MaskBand>* time_bands = nullptr);

/// Dense-sample augmentation used during training: drop-by-time and
/// drop-by-neuron on binned spikes, plus spectrogram masking.
DenseSample augment_dense(const DenseSample& d, const AugmentConfig& cfg, std::mt19937_64& rng);

struct SynthConfig {
  std::size_t classes = 2;
  std::size_t samples_per_class = 100;
  std::size_t time_steps = 50;
  std::size_t neurons = 16;
  double noise_p = 0.05;
};

/// Per-class motif: neurons firing in a fixed order, repeated periodically.
struct Motif {
  std::vector<std::size_t> neurons;  // firing order
  std::size_t period = 0;
};

/// Motifs depend on the seed only.
std::vector<Motif> synth_motifs(const SynthConfig& cfg, std::uint64_t seed);

/// Samples are class-major. Motifs come from `seed`; the background noise
/// also depends on `stream`, so streams share classes but not noise.
std::vector<DenseSample> synth_dataset(const SynthConfig& cfg, std::uint64_t seed,
                                       std::uint64_t stream = 0);

}  // namespace spkc
