// SPDX-License-Identifier: Apache-2.0
#include "iqshift/siggen/srrc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace iqshift::siggen {

double srrc_impulse(double t, double rolloff) {
  constexpr double pi = std::numbers::pi;
  const double b = rolloff;
  if (t == 0.0) return 1.0 - b + 4.0 * b / pi;
  const double q = 4.0 * b * t;
  if (std::abs(1.0 - q * q) < 1e-10) {
    const double a = pi / (4.0 * b);
    return b / std::numbers::sqrt2 * ((1.0 + 2.0 / pi) * std::sin(a) + (1.0 - 2.0 / pi) * std::cos(a));
  }
  const double num = std::sin(pi * t * (1.0 - b)) + q * std::cos(pi * t * (1.0 + b));
  return num / (pi * t * (1.0 - q * q));
}

std::vector<double> srrc_taps(double rolloff, int sps, int span_symbols) {
  if (!(rolloff > 0.0 && rolloff <= 1.0))
    throw std::invalid_argument("SRRC rolloff must lie in (0, 1], got " + std::to_string(rolloff));
  if (sps < 2) throw std::invalid_argument("SRRC needs at least 2 samples per symbol");
  if (span_symbols < 2 || span_symbols % 2 != 0)
    throw std::invalid_argument("SRRC span must be a positive even number of symbols");

  const int half = span_symbols * sps / 2;
  std::vector<double> taps(static_cast<std::size_t>(2 * half + 1));
  double energy = 0.0;
  for (int n = -half; n <= half; ++n) {
    // Evaluate the positive side only so the taps are exactly symmetric.
    const double v = srrc_impulse(static_cast<double>(std::abs(n)) / sps, rolloff);
    taps[static_cast<std::size_t>(n + half)] = v;
    energy += v * v;
  }
  const double scale = 1.0 / std::sqrt(energy);
  for (double& v : taps) v *= scale;
  return taps;
}

}  // namespace iqshift::siggen
