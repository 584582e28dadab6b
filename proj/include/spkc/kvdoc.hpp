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
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spkc {

/// Flat `dotted.key = value` document. Lines starting with '#' are comments;
/// string values may be double-quoted.
class KvDoc {
 public:
  /// Throws ConfigError naming the line on syntax errors or duplicate keys.
  static KvDoc parse(std::string_view text);
  static KvDoc load(const std::string& path);

  void set(const std::string& key, std::string value);
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& entries() const { return values_; }
  /// One `key = value` line per entry in key order.
  std::string emit() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Typed, consuming view over a KvDoc. Every get() marks the key as known;
/// reject_unknown() then fails on anything left over.
class KvReader {
 public:
  explicit KvReader(const KvDoc& doc) : doc_(doc) {}

  std::size_t get_size(const std::string& key, std::size_t fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  bool has(const std::string& key) const { return doc_.has(key); }

  void reject_unknown() const;

 private:
  const std::string* raw(const std::string& key);

  const KvDoc& doc_;
  std::set<std::string> known_;
};

std::string format_double(double v);

}  // namespace spkc
