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

#include "spkc/mask.hpp"

#include <string>

#include "spkc/errors.hpp"

namespace spkc {

TemporalMask::TemporalMask(std::size_t steps, std::size_t batch, std::vector<std::uint8_t> valid)
    : steps_(steps), batch_(batch), valid_(std::move(valid)) {
  if (valid_.size() != steps_ * batch_) throw DimensionError("temporal mask size mismatch");
  for (std::size_t b = 0; b < batch_; ++b) {
    bool seen_pad = false;
    for (std::size_t t = 0; t < steps_; ++t) {
      if (!valid_[t * batch_ + b]) {
        seen_pad = true;
      } else if (seen_pad) {
        throw InputError("temporal mask for sample " + std::to_string(b) +
                         " is not a valid prefix");
      }
    }
  }
}

TemporalMask TemporalMask::all_valid(std::size_t steps, std::size_t batch) {
  return TemporalMask(steps, batch, std::vector<std::uint8_t>(steps * batch, 1));
}

TemporalMask TemporalMask::from_lengths(std::size_t steps, std::span<const std::size_t> lengths) {
  const std::size_t batch = lengths.size();
  std::vector<std::uint8_t> v(steps * batch, 0);
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t t = 0; t < std::min(steps, lengths[b]); ++t) v[t * batch + b] = 1;
  return TemporalMask(steps, batch, std::move(v));
}

std::size_t TemporalMask::valid_steps(std::size_t b) const {
  std::size_t n = 0;
  for (std::size_t t = 0; t < steps_; ++t) n += valid(t, b);
  return n;
}

std::vector<double> TemporalMask::weights() const {
  return std::vector<double>(valid_.begin(), valid_.end());
}

TemporalMask TemporalMask::resized(std::size_t steps) const {
  std::vector<std::uint8_t> v(steps * batch_, 0);
  for (std::size_t t = 0; t < std::min(steps, steps_); ++t)
    for (std::size_t b = 0; b < batch_; ++b) v[t * batch_ + b] = valid_[t * batch_ + b];
  return TemporalMask(steps, batch_, std::move(v));
}

}  // namespace spkc
