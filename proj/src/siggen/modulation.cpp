// SPDX-License-Identifier: Apache-2.0
#include "iqshift/siggen/modulation.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iqshift::siggen {

int bits_per_symbol(Modulation m) noexcept {
  switch (m) {
    case Modulation::bpsk: return 1;
    case Modulation::qpsk: return 2;
    case Modulation::psk8: return 3;
    case Modulation::qam16: return 4;
    case Modulation::qam64: return 6;
    case Modulation::qam256: return 8;
  }
  return 0;
}

std::string name(Modulation m) {
  switch (m) {
    case Modulation::bpsk: return "BPSK";
    case Modulation::qpsk: return "QPSK";
    case Modulation::psk8: return "8PSK";
    case Modulation::qam16: return "16QAM";
    case Modulation::qam64: return "64QAM";
    case Modulation::qam256: return "256QAM";
  }
  return "?";
}

Modulation modulation_from_name(std::string_view text) {
  std::string up(text);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  up.erase(std::remove(up.begin(), up.end(), '-'), up.end());
  for (Modulation m : kAllModulations) {
    if (up == name(m)) return m;
  }
  if (up == "PSK8") return Modulation::psk8;
  if (up == "QAM16") return Modulation::qam16;
  if (up == "QAM64") return Modulation::qam64;
  if (up == "QAM256") return Modulation::qam256;
  throw std::invalid_argument("unknown modulation '" + std::string(text) + "'");
}

Modulation modulation_from_index(int index) {
  if (index < 0 || index >= static_cast<int>(kAllModulations.size()))
    throw std::invalid_argument("modulation index out of range: " + std::to_string(index));
  return kAllModulations[static_cast<std::size_t>(index)];
}

namespace {

std::vector<std::complex<double>> build_table(Modulation m) {
  const int k = bits_per_symbol(m);
  const unsigned size = 1u << k;
  std::vector<std::complex<double>> table(size);
  if (m == Modulation::bpsk) {
    table[0] = {1.0, 0.0};
    table[1] = {-1.0, 0.0};
    return table;
  }
  if (m == Modulation::psk8) {
    for (unsigned v = 0; v < size; ++v) {
      const double angle = 2.0 * std::numbers::pi * gray_decode(v) / 8.0;
      table[v] = std::polar(1.0, angle);
    }
    return table;
  }
  const int half = k / 2;
  const unsigned side = 1u << half;
  const unsigned mask = side - 1;
  const double scale = std::sqrt(2.0 * (static_cast<double>(size) - 1.0) / 3.0);
  auto level = [&](unsigned g) { return static_cast<double>(side - 1) - 2.0 * gray_decode(g); };
  for (unsigned v = 0; v < size; ++v) {
    table[v] = std::complex<double>(level(v >> half), level(v & mask)) / scale;
  }
  return table;
}

}  // namespace

const std::vector<std::complex<double>>& constellation(Modulation m) {
  static const std::array<std::vector<std::complex<double>>, 6> tables = [] {
    std::array<std::vector<std::complex<double>>, 6> t;
    for (Modulation mod : kAllModulations) t[static_cast<std::size_t>(mod)] = build_table(mod);
    return t;
  }();
  return tables[static_cast<std::size_t>(m)];
}

std::vector<std::complex<double>> map_symbols(std::span<const std::uint8_t> bits, Modulation m) {
  const auto k = static_cast<std::size_t>(bits_per_symbol(m));
  if (bits.size() % k != 0)
    throw std::invalid_argument("bit count " + std::to_string(bits.size()) +
                                " not divisible by bits per symbol " + std::to_string(k));
  const auto& table = constellation(m);
  std::vector<std::complex<double>> out;
  out.reserve(bits.size() / k);
  for (std::size_t i = 0; i < bits.size(); i += k) {
    unsigned v = 0;
    for (std::size_t b = 0; b < k; ++b) {
      if (bits[i + b] > 1) throw std::invalid_argument("bit values must be 0 or 1");
      v = (v << 1) | bits[i + b];
    }
    out.push_back(table[v]);
  }
  return out;
}

}  // namespace iqshift::siggen
