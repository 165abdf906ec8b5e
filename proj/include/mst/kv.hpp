/*
   Copyright 2026 The mst Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mst {

// Flat `key=value` configuration, sorted by key. Blank lines and lines
// starting with '#' are ignored on load.
class KvConfig {
 public:
  static KvConfig load(const std::string& path);
  static KvConfig parse(const std::string& text, const std::string& origin = "<string>");
  void save(const std::string& path) const;
  std::string str() const;

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, int value) { set(key, std::to_string(value)); }
  void set(const std::string& key, double value);
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }
  void set_default(const std::string& key, const std::string& value);
  void merge(const KvConfig& overrides);

  std::string get(const std::string& key) const;
  std::string get(const std::string& key, const std::string& fallback) const;
  std::int64_t get_int(const std::string& key) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Comma-separated list; empty value gives an empty list.
  std::vector<std::string> get_list(const std::string& key) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  bool operator==(const KvConfig& other) const { return values_ == other.values_; }

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split(const std::string& s, char sep);
std::string join(const std::vector<std::string>& parts, const std::string& sep);
// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace mst
