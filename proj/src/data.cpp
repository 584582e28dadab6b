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

#include "spkc/data.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <cstdio>

#include "spkc/binio.hpp"
#include "spkc/errors.hpp"

namespace spkc {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void check_header(ByteReader& r, const char* magic, const char* what) {
  if (r.remaining() < 4) throw FormatError(std::string(what) + ": missing magic");
  if (r.bytes(4) != magic) throw FormatError(std::string(what) + ": bad magic");
  const std::uint32_t version = r.u32();
  if (version != kFormatVersion) {
    throw FormatError(std::string(what) + ": unsupported version " + std::to_string(version));
  }
}

std::uint32_t uniform_u32(std::mt19937_64& rng, std::uint32_t lo, std::uint32_t hi) {
  return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng);
}

}  // namespace

std::vector<char> encode_events(const EventDataset& ds) {
  ByteWriter w;
  w.bytes("SPKE");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(ds.samples.size()));
  w.u16(ds.raw_neurons);
  for (const auto& s : ds.samples) {
    w.u16(s.label);
    w.u32(s.duration_us);
    w.u32(static_cast<std::uint32_t>(s.events.size()));
    for (const auto& e : s.events) {
      w.u32(e.time_us);
      w.u16(e.neuron);
    }
  }
  return w.buffer();
}

EventDataset decode_events(const std::vector<char>& bytes) {
  ByteReader r(bytes.data(), bytes.size());
  check_header(r, "SPKE", "event file");
  EventDataset ds;
  const std::uint32_t count = r.u32();
  ds.raw_neurons = r.u16();
  for (std::uint32_t i = 0; i < count; ++i) {
    EventSample s;
    s.label = r.u16();
    s.duration_us = r.u32();
    const std::uint32_t n = r.u32();
    if (static_cast<std::uint64_t>(n) * 6 > r.remaining()) {
      throw IoError("event file: sample " + std::to_string(i) + " declares " + std::to_string(n) +
                    " events but the file is truncated");
    }
    s.events.resize(n);
    for (auto& e : s.events) {
      e.time_us = r.u32();
      e.neuron = r.u16();
      if (e.neuron >= ds.raw_neurons) {
        throw FormatError("event file: sample " + std::to_string(i) + " has neuron " +
                          std::to_string(e.neuron) + " >= " + std::to_string(ds.raw_neurons));
      }
      if (e.time_us > s.duration_us) {
        throw FormatError("event file: sample " + std::to_string(i) + " has an event at " +
                          std::to_string(e.time_us) + " us past its duration");
      }
    }
    auto by_time = [](const Event& a, const Event& b) { return a.time_us < b.time_us; };
    if (!std::is_sorted(s.events.begin(), s.events.end(), by_time)) {
      std::stable_sort(s.events.begin(), s.events.end(), by_time);
      ++ds.repaired_unsorted;
    }
    ds.samples.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw FormatError("event file: trailing bytes");
  return ds;
}

EventDataset load_events(const std::string& path) { return decode_events(read_file(path)); }

void save_events(const EventDataset& ds, const std::string& path) {
  write_file(path, encode_events(ds));
}

EventDataset events_from_csv(std::string_view text, std::uint16_t raw_neurons) {
  EventDataset ds;
  ds.raw_neurons = raw_neurons;
  EventSample cur;
  bool open = false;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (open) ds.samples.push_back(std::move(cur));
    cur = EventSample{};
    open = false;
  };
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string line(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line.erase(std::remove(line.begin(), line.end(), '\r'), line.end());
    if (line.find_first_not_of(" \t") == std::string::npos) {
      flush();
      continue;
    }
    unsigned long long t = 0, n = 0, label = 0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%llu,%llu,%llu%c", &t, &n, &label, &tail) != 3) {
      throw InputError("csv line " + std::to_string(line_no) + ": expected time_us,neuron,label");
    }
    if (n >= raw_neurons || t > UINT32_MAX || label > UINT16_MAX) {
      throw InputError("csv line " + std::to_string(line_no) + ": value out of range");
    }
    if (open && label != cur.label) {
      throw InputError("csv line " + std::to_string(line_no) + ": label changes inside a sample");
    }
    if (open && t < cur.events.back().time_us) {
      throw InputError("csv line " + std::to_string(line_no) + ": events must be sorted by time");
    }
    cur.label = static_cast<std::uint16_t>(label);
    cur.events.push_back({static_cast<std::uint32_t>(t), static_cast<std::uint16_t>(n)});
    cur.duration_us = static_cast<std::uint32_t>(t);
    open = true;
  }
  flush();
  return ds;
}

std::vector<char> encode_analog(std::span<const DenseSample> samples, std::uint16_t features) {
  ByteWriter w;
  w.bytes("SPKA");
  w.u32(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  w.u16(features);
  for (const auto& s : samples) {
    if (s.data.rank() != 2 || s.data.dim(1) != features) {
      throw DimensionError("analog sample must be (T, " + std::to_string(features) + ")");
    }
    w.u16(static_cast<std::uint16_t>(s.label));
    w.u32(static_cast<std::uint32_t>(s.valid_steps));
    for (std::size_t i = 0; i < s.valid_steps * features; ++i) w.f32(static_cast<float>(s.data[i]));
  }
  return w.buffer();
}

std::vector<DenseSample> decode_analog(const std::vector<char>& bytes) {
  ByteReader r(bytes.data(), bytes.size());
  check_header(r, "SPKA", "feature file");
  const std::uint32_t count = r.u32();
  const std::uint16_t features = r.u16();
  std::vector<DenseSample> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    DenseSample s;
    s.label = r.u16();
    const std::uint32_t steps = r.u32();
    if (steps == 0) throw FormatError("feature file: sample " + std::to_string(i) + " is empty");
    std::vector<double> v(static_cast<std::size_t>(steps) * features);
    for (auto& x : v) {
      x = r.f32();
      if (!std::isfinite(x)) throw FormatError("feature file: non-finite value");
    }
    s.data = Tensor({steps, features}, std::move(v));
    s.valid_steps = steps;
    out.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw FormatError("feature file: trailing bytes");
  return out;
}

std::vector<DenseSample> load_analog(const std::string& path) {
  return decode_analog(read_file(path));
}

void save_analog(std::span<const DenseSample> samples, std::uint16_t features,
                 const std::string& path) {
  write_file(path, encode_analog(samples, features));
}

std::size_t time_steps_for(double delta_t_ms) {
  if (!(delta_t_ms > 0.0) || delta_t_ms > 1000.0) {
    throw ConfigError("delta_t_ms must lie in (0, 1000]");
  }
  return static_cast<std::size_t>(std::lround(1000.0 / delta_t_ms));
}

DenseSample bin_and_discretize(const EventSample& s, std::uint16_t raw_neurons,
                               std::uint16_t neuron_bin, double delta_t_ms) {
  if (neuron_bin == 0 || raw_neurons % neuron_bin != 0) {
    throw ConfigError("raw neuron count " + std::to_string(raw_neurons) +
                      " is not divisible by neuron bin " + std::to_string(neuron_bin));
  }
  const std::size_t steps = time_steps_for(delta_t_ms);
  const std::size_t n = raw_neurons / neuron_bin;
  const double bin_us = delta_t_ms * 1000.0;
  std::vector<double> v(steps * n, 0.0);
  for (const auto& e : s.events) {
    if (e.neuron >= raw_neurons) throw InputError("event neuron out of range");
    const auto t = std::min(steps - 1, static_cast<std::size_t>(std::floor(e.time_us / bin_us)));
    v[t * n + e.neuron / neuron_bin] = 1.0;
  }
  DenseSample d;
  d.data = Tensor({steps, n}, std::move(v));
  const auto natural = static_cast<std::size_t>(std::ceil(s.duration_us / bin_us));
  d.valid_steps = std::clamp<std::size_t>(natural, 1, steps);
  // Late events clamped into the last step must stay inside the valid range.
  for (std::size_t t = d.valid_steps; t < steps; ++t) {
    for (std::size_t c = 0; c < n; ++c) {
      if (d.data[t * n + c] != 0.0) d.valid_steps = t + 1;
    }
  }
  d.label = s.label;
  return d;
}

PaddedSample pad_and_mask(const DenseSample& d, std::size_t target_t, std::size_t* truncated) {
  if (d.data.rank() != 2) throw DimensionError("dense sample must be (T, N)");
  if (target_t == 0) throw ConfigError("target time steps must be positive");
  const std::size_t n = d.data.dim(1);
  std::size_t valid = std::max<std::size_t>(1, d.valid_steps);
  if (valid > target_t) {
    valid = target_t;
    if (truncated) ++*truncated;
  }
  std::vector<double> v(target_t * n, 0.0);
  const std::size_t copy = std::min(valid, d.data.dim(0));
  std::copy_n(d.data.data().begin(), copy * n, v.begin());
  PaddedSample out;
  out.sample.data = Tensor({target_t, n}, std::move(v));
  out.sample.valid_steps = valid;
  out.sample.label = d.label;
  const std::size_t len[] = {valid};
  out.mask = TemporalMask::from_lengths(target_t, len);
  return out;
}

Batch make_batch(std::span<const DenseSample> samples, std::span<const std::size_t> order) {
  if (order.empty()) throw InputError("empty batch");
  const Shape& s0 = samples[order[0]].data.shape();
  if (s0.size() != 2) throw DimensionError("dense sample must be (T, N)");
  const std::size_t T = s0[0], N = s0[1], B = order.size();
  std::vector<double> x(T * B * N);
  std::vector<std::size_t> lengths(B);
  Batch out;
  for (std::size_t b = 0; b < B; ++b) {
    if (order[b] >= samples.size()) throw InputError("batch index out of range");
    const auto& s = samples[order[b]];
    if (s.data.shape() != s0) {
      throw DimensionError("batch samples differ in shape: " + shape_str(s.data.shape()) + " vs " +
                           shape_str(s0));
    }
    for (std::size_t t = 0; t < T; ++t) {
      std::copy_n(s.data.data().begin() + t * N, N, x.begin() + (t * B + b) * N);
    }
    lengths[b] = std::clamp<std::size_t>(s.valid_steps, 1, T);
    out.labels.push_back(s.label);
  }
  out.x = Tensor({T, B, N}, std::move(x));
  out.mask = TemporalMask::from_lengths(T, lengths);
  return out;
}

void AugmentConfig::validate() const {
  auto pct = [](double v, const char* key) {
    if (!(v >= 0.0 && v <= 100.0)) throw ConfigError(std::string(key) + ": must lie in [0, 100]");
  };
  pct(drop_proportion_pct, "augment.drop_proportion_pct");
  pct(time_drop_pct, "augment.time_drop_pct");
  pct(time_mask_pct, "augment.time_mask_pct");
}

bool AugmentConfig::enabled() const {
  return (drop_proportion_pct > 0.0 && (time_drop_pct > 0.0 || neuron_drop_count > 0)) ||
         (freq_masks > 0 && freq_mask_bins > 0) || (time_masks > 0 && time_mask_pct > 0.0);
}

AugmentConfig AugmentConfig::preset(const std::string& name) {
  AugmentConfig c;
  if (name == "none") return c;
  if (name == "shd") {
    c.drop_proportion_pct = 50;
    c.time_drop_pct = 20;
    c.neuron_drop_count = 20;
  } else if (name == "ssc") {
    c.drop_proportion_pct = 50;
    c.time_drop_pct = 10;
    c.neuron_drop_count = 10;
  } else if (name == "gsc") {
    c.freq_masks = 1;
    c.freq_mask_bins = 10;
    c.time_masks = 1;
    c.time_mask_pct = 25;
  } else {
    throw ConfigError("augment.preset: unknown preset '" + name + "'");
  }
  return c;
}

void write_augment_config(const AugmentConfig& c, KvDoc& doc) {
  doc.set("augment.drop_proportion_pct", format_double(c.drop_proportion_pct));
  doc.set("augment.time_drop_pct", format_double(c.time_drop_pct));
  doc.set("augment.neuron_drop_count", std::to_string(c.neuron_drop_count));
  doc.set("augment.freq_masks", std::to_string(c.freq_masks));
  doc.set("augment.freq_mask_bins", std::to_string(c.freq_mask_bins));
  doc.set("augment.time_masks", std::to_string(c.time_masks));
  doc.set("augment.time_mask_pct", format_double(c.time_mask_pct));
  doc.set("augment.rng_seed", std::to_string(c.rng_seed));
}

AugmentConfig read_augment_config(KvReader& r) {
  AugmentConfig c = AugmentConfig::preset(r.get_string("augment.preset", "none"));
  c.drop_proportion_pct = r.get_double("augment.drop_proportion_pct", c.drop_proportion_pct);
  c.time_drop_pct = r.get_double("augment.time_drop_pct", c.time_drop_pct);
  c.neuron_drop_count = r.get_size("augment.neuron_drop_count", c.neuron_drop_count);
  c.freq_masks = r.get_size("augment.freq_masks", c.freq_masks);
  c.freq_mask_bins = r.get_size("augment.freq_mask_bins", c.freq_mask_bins);
  c.time_masks = r.get_size("augment.time_masks", c.time_masks);
  c.time_mask_pct = r.get_double("augment.time_mask_pct", c.time_mask_pct);
  c.rng_seed = r.get_u64("augment.rng_seed", c.rng_seed);
  c.validate();
  return c;
}

EventSample drop_by_time(const EventSample& s, std::uint32_t start_us, std::uint32_t width_us) {
  EventSample out = s;
  const std::uint64_t end = static_cast<std::uint64_t>(start_us) + width_us;
  std::erase_if(out.events, [&](const Event& e) { return e.time_us >= start_us && e.time_us < end; });
  return out;
}

EventSample drop_by_neuron(const EventSample& s, std::uint16_t lo, std::uint16_t hi) {
  EventSample out = s;
  std::erase_if(out.events, [&](const Event& e) { return e.neuron >= lo && e.neuron < hi; });
  return out;
}

EventSample event_drop(const EventSample& s, const AugmentConfig& cfg, std::uint16_t raw_neurons,
                       std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  if (!(u(rng) < cfg.drop_proportion_pct)) return s;
  if (std::bernoulli_distribution(0.5)(rng)) {
    const auto width = static_cast<std::uint32_t>(
        std::llround(cfg.time_drop_pct / 100.0 * static_cast<double>(s.duration_us)));
    return drop_by_time(s, uniform_u32(rng, 0, s.duration_us - std::min(width, s.duration_us)),
                        width);
  }
  const auto band = static_cast<std::uint16_t>(std::min<std::size_t>(cfg.neuron_drop_count, raw_neurons));
  const auto lo = static_cast<std::uint16_t>(uniform_u32(rng, 0, raw_neurons - band));
  return drop_by_neuron(s, lo, static_cast<std::uint16_t>(lo + band));
}

Tensor spec_mask(const Tensor& x, const AugmentConfig& cfg, std::mt19937_64& rng,
                 std::vector<MaskBand>* freq_bands, std::vector<MaskBand>* time_bands) {
  if (x.rank() != 2) throw DimensionError("spec_mask expects a (T, N) tensor");
  const std::size_t T = x.dim(0), N = x.dim(1);
  auto v = x.to_vector();
  auto pick = [&](std::size_t max_width, std::size_t extent) {
    MaskBand b;
    b.width = std::uniform_int_distribution<std::size_t>(0, std::min(max_width, extent))(rng);
    b.start = std::uniform_int_distribution<std::size_t>(0, extent - b.width)(rng);
    return b;
  };
  for (std::size_t i = 0; i < cfg.freq_masks; ++i) {
    const MaskBand b = pick(cfg.freq_mask_bins, N);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = b.start; c < b.start + b.width; ++c) v[t * N + c] = 0.0;
    if (freq_bands) freq_bands->push_back(b);
  }
  const auto max_t = static_cast<std::size_t>(std::floor(cfg.time_mask_pct / 100.0 * T));
  for (std::size_t i = 0; i < cfg.time_masks; ++i) {
    const MaskBand b = pick(max_t, T);
    std::fill(v.begin() + b.start * N, v.begin() + (b.start + b.width) * N, 0.0);
    if (time_bands) time_bands->push_back(b);
  }
  return Tensor(x.shape(), std::move(v));
}

DenseSample augment_dense(const DenseSample& d, const AugmentConfig& cfg, std::mt19937_64& rng) {
  DenseSample out = d;
  const std::size_t T = d.data.dim(0), N = d.data.dim(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  if (u(rng) < cfg.drop_proportion_pct) {
    auto v = out.data.to_vector();
    if (std::bernoulli_distribution(0.5)(rng)) {
      const std::size_t valid = std::clamp<std::size_t>(d.valid_steps, 1, T);
      const auto width = std::min(
          valid, static_cast<std::size_t>(std::llround(cfg.time_drop_pct / 100.0 * valid)));
      const auto start = std::uniform_int_distribution<std::size_t>(0, valid - width)(rng);
      std::fill(v.begin() + start * N, v.begin() + (start + width) * N, 0.0);
    } else {
      const std::size_t band = std::min(cfg.neuron_drop_count, N);
      const auto lo = std::uniform_int_distribution<std::size_t>(0, N - band)(rng);
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t c = lo; c < lo + band; ++c) v[t * N + c] = 0.0;
    }
    out.data = Tensor(d.data.shape(), std::move(v));
  }
  if (cfg.freq_masks > 0 || cfg.time_masks > 0) out.data = spec_mask(out.data, cfg, rng);
  return out;
}

std::vector<Motif> synth_motifs(const SynthConfig& cfg, std::uint64_t seed) {
  if (cfg.classes < 2) throw ConfigError("synthetic data needs at least 2 classes");
  if (cfg.neurons < 4 || cfg.time_steps < 4) {
    throw ConfigError("synthetic data needs at least 4 neurons and 4 time steps");
  }
  const std::size_t k = std::max<std::size_t>(2, cfg.neurons / 4);
  std::mt19937_64 rng(seed);
  std::vector<Motif> motifs;
  std::vector<std::size_t> ids(cfg.neurons);
  while (motifs.size() < cfg.classes) {
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), rng);
    Motif m;
    m.neurons.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(k));
    m.period = 2 * k;
    const bool dup = std::any_of(motifs.begin(), motifs.end(),
                                 [&](const Motif& o) { return o.neurons == m.neurons; });
    if (!dup) motifs.push_back(std::move(m));
  }
  return motifs;
}

std::vector<DenseSample> synth_dataset(const SynthConfig& cfg, std::uint64_t seed,
                                       std::uint64_t stream) {
  if (!(cfg.noise_p >= 0.0 && cfg.noise_p <= 1.0)) throw ConfigError("noise_p must lie in [0, 1]");
  const auto motifs = synth_motifs(cfg, seed);
  std::seed_seq seq{seed, stream, std::uint64_t{0x5eed}};
  std::mt19937_64 rng(seq);
  std::bernoulli_distribution noise(cfg.noise_p);
  const std::size_t T = cfg.time_steps, N = cfg.neurons;
  std::vector<DenseSample> out;
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    const Motif& m = motifs[c];
    for (std::size_t i = 0; i < cfg.samples_per_class; ++i) {
      std::vector<double> v(T * N, 0.0);
      for (auto& x : v) x = noise(rng) ? 1.0 : 0.0;
      // Neuron j of the motif fires at steps 2j, 2j + period, ...
      for (std::size_t j = 0; j < m.neurons.size(); ++j)
        for (std::size_t t = 2 * j; t < T; t += m.period) v[t * N + m.neurons[j]] = 1.0;
      out.push_back({Tensor({T, N}, std::move(v)), T, c});
    }
  }
  return out;
}

}  // namespace spkc
