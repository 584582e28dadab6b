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

#include "spkc/kvdoc.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "spkc/errors.hpp"

namespace spkc {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

KvDoc KvDoc::parse(std::string_view text) {
  KvDoc doc;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
      value = value.substr(1, value.size() - 2);
    }
    if (doc.has(key)) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key " + key);
    doc.values_[key] = std::string(value);
  }
  return doc;
}

KvDoc KvDoc::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void KvDoc::set(const std::string& key, std::string value) { values_[key] = std::move(value); }

std::string KvDoc::emit() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    const bool quote = v.empty() || v.find_first_of(" \t#=") != std::string::npos;
    out += k + " = " + (quote ? "\"" + v + "\"" : v) + "\n";
  }
  return out;
}

const std::string* KvReader::raw(const std::string& key) {
  known_.insert(key);
  auto it = doc_.entries().find(key);
  return it == doc_.entries().end() ? nullptr : &it->second;
}

std::uint64_t KvReader::get_u64(const std::string& key, std::uint64_t fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || p != v->data() + v->size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + *v + "'");
  }
  return out;
}

std::size_t KvReader::get_size(const std::string& key, std::size_t fallback) {
  return static_cast<std::size_t>(get_u64(key, fallback));
}

double KvReader::get_double(const std::string& key, double fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double d = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument("trailing");
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + *v + "'");
  }
}

bool KvReader::get_bool(const std::string& key, bool fallback) {
  const auto* v = raw(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1") return true;
  if (*v == "false" || *v == "0") return false;
  throw ConfigError(key + ": expected true/false, got '" + *v + "'");
}

std::string KvReader::get_string(const std::string& key, const std::string& fallback) {
  const auto* v = raw(key);
  return v ? *v : fallback;
}

void KvReader::reject_unknown() const {
  for (const auto& [k, v] : doc_.entries()) {
    if (!known_.count(k)) throw ConfigError(k + ": unknown key");
  }
}

std::string format_double(double v) {
  // Shortest representation that parses back to the same double.
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

}  // namespace spkc
