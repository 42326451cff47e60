// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <bit>
#include <cmath>
#include <set>

#include "iqshift/siggen/modulation.hpp"

using namespace iqshift::siggen;

TEST_CASE("six classes with their bit widths") {
  REQUIRE(kAllModulations.size() == 6);
  const int bits[] = {1, 2, 3, 4, 6, 8};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(bits_per_symbol(kAllModulations[i]) == bits[i]);
    CHECK(constellation(kAllModulations[i]).size() == (1u << bits[i]));
  }
}

TEST_CASE("every constellation has unit mean power") {
  for (auto m : kAllModulations) {
    double p = 0.0;
    for (auto s : constellation(m)) p += std::norm(s);
    CHECK(std::abs(p / constellation(m).size() - 1.0) < 1e-12);
  }
}

TEST_CASE("BPSK maps bit 0 to +1") {
  const std::uint8_t bits[] = {0, 1};
  const auto s = map_symbols(bits, Modulation::bpsk);
  CHECK(s[0] == std::complex<double>(1.0, 0.0));
  CHECK(s[1] == std::complex<double>(-1.0, 0.0));
}

TEST_CASE("16QAM sits on the odd-integer grid scaled by 1/sqrt(10)") {
  std::set<std::pair<int, int>> pts;
  for (auto s : constellation(Modulation::qam16)) {
    const double re = s.real() * std::sqrt(10.0), im = s.imag() * std::sqrt(10.0);
    CHECK(std::abs(re - std::round(re)) < 1e-12);
    CHECK(std::abs(im - std::round(im)) < 1e-12);
    const int ri = static_cast<int>(std::lround(re)), ii = static_cast<int>(std::lround(im));
    CHECK(std::abs(ri) % 2 == 1);
    CHECK(std::abs(ii) % 2 == 1);
    pts.insert({ri, ii});
  }
  CHECK(pts.size() == 16);
}

TEST_CASE("QPSK: four distinct unit points, neighbours one bit apart") {
  const auto& c = constellation(Modulation::qpsk);
  std::set<std::pair<double, double>> seen;
  for (unsigned v = 0; v < 4; ++v) {
    CHECK(std::abs(std::abs(c[v]) - 1.0) < 1e-12);
    seen.insert({c[v].real(), c[v].imag()});
  }
  CHECK(seen.size() == 4);
}

TEST_CASE("nearest neighbours differ in exactly one bit (Gray coding)") {
  for (auto m : {Modulation::qpsk, Modulation::psk8, Modulation::qam16, Modulation::qam64, Modulation::qam256}) {
    const auto& c = constellation(m);
    double dmin = 1e9;
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b) dmin = std::min(dmin, std::abs(c[a] - c[b]));
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        if (std::abs(c[a] - c[b]) < dmin * (1 + 1e-9)) {
          ++pairs;
          CHECK_MESSAGE(std::popcount(static_cast<unsigned>(a ^ b)) == 1, name(m), " ", a, " vs ", b);
        }
    CHECK(pairs > 0);
  }
}

TEST_CASE("map_symbols follows the table MSB first") {
  const std::uint8_t bits[] = {1, 0, 1, 1, 1, 0};
  const auto s = map_symbols(bits, Modulation::psk8);
  REQUIRE(s.size() == 2);
  CHECK(s[0] == constellation(Modulation::psk8)[5]);
  CHECK(s[1] == constellation(Modulation::psk8)[6]);
}

TEST_CASE("map_symbols rejects ragged or non-binary input") {
  const std::uint8_t three[] = {0, 1, 0};
  CHECK_THROWS_AS(map_symbols(three, Modulation::qpsk), std::invalid_argument);
  const std::uint8_t bad[] = {0, 2};
  CHECK_THROWS_AS(map_symbols(bad, Modulation::qpsk), std::invalid_argument);
}

TEST_CASE("names round-trip and accept alternate spellings") {
  for (auto m : kAllModulations) CHECK(modulation_from_name(name(m)) == m);
  CHECK(modulation_from_name("psk8") == Modulation::psk8);
  CHECK(modulation_from_name("QAM256") == Modulation::qam256);
  CHECK(modulation_from_name("16qam") == Modulation::qam16);
  CHECK_THROWS(modulation_from_name("OOK"));
  CHECK_THROWS(modulation_from_index(6));
}

TEST_CASE("gray code is a bijection with unit-distance steps") {
  for (unsigned v = 0; v < 256; ++v) {
    CHECK(gray_decode(gray_encode(v)) == v);
    if (v) CHECK(std::popcount(gray_encode(v) ^ gray_encode(v - 1)) == 1);
  }
}
