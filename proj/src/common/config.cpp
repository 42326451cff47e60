// SPDX-License-Identifier: Apache-2.0
#include "iqshift/common/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "iqshift/common/error.hpp"

namespace iqshift {

const char* to_string(DataError::Kind kind) noexcept {
  switch (kind) {
    case DataError::Kind::io: return "io";
    case DataError::Kind::bad_magic: return "bad_magic";
    case DataError::Kind::bad_version: return "bad_version";
    case DataError::Kind::checksum: return "checksum";
    case DataError::Kind::structure: return "structure";
    case DataError::Kind::unsupported_format: return "unsupported_format";
    case DataError::Kind::mismatch: return "mismatch";
  }
  return "unknown";
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

KeyValueConfig KeyValueConfig::parse(const std::string& text) {
  KeyValueConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw std::invalid_argument("line " + std::to_string(lineno) + ": empty key");
    if (cfg.has(key)) throw std::invalid_argument("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(DataError::Kind::io, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

const std::string& KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::invalid_argument("missing key '" + key + "'");
  return it->second;
}

std::optional<std::string> KeyValueConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

double KeyValueConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  double d = std::stod(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("key '" + key + "': not a number: " + v);
  return d;
}

long long KeyValueConfig::get_int(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t pos = 0;
  long long i = std::stoll(v, &pos);
  if (pos != v.size()) throw std::invalid_argument("key '" + key + "': not an integer: " + v);
  return i;
}

std::string KeyValueConfig::to_string() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> split_list(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split_list(text, ':');
  if (parts.size() == 3 && text.find(',') == std::string::npos) {
    const double lo = std::stod(parts[0]);
    const double step = std::stod(parts[1]);
    const double hi = std::stod(parts[2]);
    if (!(step > 0) || hi < lo) throw std::invalid_argument("bad grid range '" + text + "'");
    std::vector<double> grid;
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) grid.push_back(lo + step * static_cast<double>(i));
    return grid;
  }
  std::vector<double> grid;
  for (const auto& s : split_list(text, ',')) grid.push_back(std::stod(s));
  if (grid.empty()) throw std::invalid_argument("empty grid '" + text + "'");
  return grid;
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string format_grid(const std::vector<double>& grid) {
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) out += (i ? "," : "") + format_double(grid[i]);
  return out;
}

}  // namespace iqshift
