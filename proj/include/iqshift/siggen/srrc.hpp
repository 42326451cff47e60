// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

namespace iqshift::siggen {

inline constexpr int kDefaultSrrcSpan = 40;

/// Square-root raised-cosine taps with `span_symbols * sps + 1` entries,
/// centered and scaled to unit energy (so the self-convolution, which is a
/// raised-cosine pulse, has unit value at its center).
std::vector<double> srrc_taps(double rolloff, int sps, int span_symbols = kDefaultSrrcSpan);

/// Continuous SRRC impulse response at `t` symbol periods, unnormalized.
double srrc_impulse(double t, double rolloff);

}  // namespace iqshift::siggen
