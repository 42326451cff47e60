// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iqshift::siggen {

enum class Modulation : std::uint8_t { bpsk = 0, qpsk = 1, psk8 = 2, qam16 = 3, qam64 = 4, qam256 = 5 };

inline constexpr std::array<Modulation, 6> kAllModulations = {
    Modulation::bpsk, Modulation::qpsk, Modulation::psk8,
    Modulation::qam16, Modulation::qam64, Modulation::qam256};

int bits_per_symbol(Modulation m) noexcept;
std::string name(Modulation m);
/// Accepts the canonical names ("BPSK", "8PSK", "16QAM", ...) and the
/// enumerator spellings ("PSK8", "QAM16", ...), case-insensitive.
Modulation modulation_from_name(std::string_view text);
Modulation modulation_from_index(int index);

/// Constellation table indexed by the symbol's bit value, MSB first.
///
/// BPSK: bit b maps to 1 - 2b. 8PSK: value v sits at angle 2*pi*p/8 where p
/// is the Gray-decoded v. Square QAM (QPSK included): the upper half of the
/// bits selects the in-phase level and the lower half the quadrature level;
/// each half is Gray-decoded to a position p and placed at (sqrt(M) - 1) - 2p.
/// All tables are scaled to unit mean power.
const std::vector<std::complex<double>>& constellation(Modulation m);

/// Maps a bit sequence (one bit per byte, values 0/1) to symbols.
std::vector<std::complex<double>> map_symbols(std::span<const std::uint8_t> bits, Modulation m);

constexpr unsigned gray_encode(unsigned v) noexcept { return v ^ (v >> 1); }
constexpr unsigned gray_decode(unsigned g) noexcept {
  unsigned v = g;
  for (unsigned s = g >> 1; s != 0; s >>= 1) v ^= s;
  return v;
}

}  // namespace iqshift::siggen
