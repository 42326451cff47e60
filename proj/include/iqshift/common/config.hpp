// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace iqshift {

/// Flat `key = value` text with `#` comments. Keys are unique.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::optional<std::string> find(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::map<std::string, std::string>& values() const { return values_; }
  std::string to_string() const;

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& text, char sep = ',');

/// Parses "a:step:b" (inclusive range) or a comma list into values.
std::vector<double> parse_grid(const std::string& text);
std::string format_grid(const std::vector<double>& grid);

std::string trim(const std::string& s);

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

}  // namespace iqshift
