// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <span>
#include <vector>

#include "iqshift/siggen/profile.hpp"
#include "iqshift/siggen/synth.hpp"

namespace iqshift::datastore {

using siggen::FrameMeta;
using siggen::kFrameLen;

/// One 2 x 1024 I/Q record: row 0 holds I, row 1 holds Q. Samples are kept
/// in 32-bit precision, the precision of the on-disk format.
struct LabeledFrame {
  std::array<float, 2 * kFrameLen> iq{};
  FrameMeta meta;

  float& i(std::size_t n) { return iq[n]; }
  float& q(std::size_t n) { return iq[kFrameLen + n]; }
  float i(std::size_t n) const { return iq[n]; }
  float q(std::size_t n) const { return iq[kFrameLen + n]; }

  bool operator==(const LabeledFrame&) const = default;
};

/// Mean per-sample power (1/N) * sum(I^2 + Q^2), accumulated in double.
double frame_power(const LabeledFrame& frame);
double frame_power(std::span<const double> iq);

/// Scales both rows by one positive scalar so the mean per-sample power is 1.
/// The double overload is exact to ~1e-15. The frame overload picks, among
/// scales within a few 1e-9 of the exact one, the one whose 32-bit result
/// has power closest to 1 (typically within 1e-10). Rejects all-zero input.
void normalize_unit_power(std::span<double> iq);
LabeledFrame normalize_unit_power(LabeledFrame frame);

/// Cuts a long complex signal into contiguous, non-overlapping frames that
/// all inherit `meta`. The signal length must be a multiple of `frame_len`.
std::vector<LabeledFrame> slice_long_signal(std::span<const siggen::Complex> x, const FrameMeta& meta,
                                            std::size_t frame_len = kFrameLen);

/// Converts a 1024-sample complex signal into a frame (no normalization).
LabeledFrame to_frame(std::span<const siggen::Complex> x, const FrameMeta& meta);

bool all_finite(const LabeledFrame& frame);

}  // namespace iqshift::datastore
