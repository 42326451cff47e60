// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqshift/nn/kernels.hpp"

namespace iqshift::selftest {

struct CheckResult {
  std::string suite;
  std::string name;
  bool passed = false;
  double value = 0.0;  // measured figure (worst case over instances)
  double limit = 0.0;
  std::string detail;
};

struct GradientOptions {
  std::size_t instances = 20;
  std::uint64_t seed = 20190424;
  double step = 1e-5;
  double tolerance = 1e-4;
};

/// Central finite differences against backward() for every layer kind, the
/// loss, and a small composite network; 64-bit, both kernel paths.
/// Relative error per tensor, in the 2-norm:
/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3).
std::vector<CheckResult> gradient_suite(const GradientOptions& opts = {});

/// Pulse shaping, constellation, SNR calibration and framing properties.
std::vector<CheckResult> dsp_suite(std::uint64_t seed = 7);

bool all_passed(const std::vector<CheckResult>& results);
/// One "PASS|FAIL suite/name value limit detail" line per result.
std::string format_results(const std::vector<CheckResult>& results);

}  // namespace iqshift::selftest
