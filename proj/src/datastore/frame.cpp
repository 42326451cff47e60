// SPDX-License-Identifier: Apache-2.0
#include "iqshift/datastore/frame.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace iqshift::datastore {

double frame_power(const LabeledFrame& frame) {
  double acc = 0.0;
  for (float v : frame.iq) acc += static_cast<double>(v) * static_cast<double>(v);
  return acc / kFrameLen;
}

double frame_power(std::span<const double> iq) {
  if (iq.size() % 2 != 0) throw std::invalid_argument("I/Q buffer must hold two equal rows");
  double acc = 0.0;
  for (double v : iq) acc += v * v;
  return acc / static_cast<double>(iq.size() / 2);
}

void normalize_unit_power(std::span<double> iq) {
  const double p = frame_power(iq);
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("cannot normalize a frame with zero energy");
  const double scale = 1.0 / std::sqrt(p);
  for (double& v : iq) v *= scale;
}

LabeledFrame normalize_unit_power(LabeledFrame frame) {
  const double p = frame_power(frame);
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("cannot normalize a frame with zero energy");
  const double base = 1.0 / std::sqrt(p);
  // Rounding to 32 bits moves the power by a few 1e-9; nearby scales round
  // differently, so keep the candidate whose stored power is closest to 1.
  std::array<float, 2 * kFrameLen> best{}, cand{};
  double best_err = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 64 && best_err > 1e-10; ++k) {
    const int off = (k % 2 ? -1 : 1) * ((k + 1) / 2);
    const double scale = base * (1.0 + off * 0x1p-32);
    double e = 0.0;
    for (std::size_t i = 0; i < cand.size(); ++i) {
      cand[i] = static_cast<float>(static_cast<double>(frame.iq[i]) * scale);
      e += static_cast<double>(cand[i]) * cand[i];
    }
    const double err = std::abs(e / kFrameLen - 1.0);
    if (err < best_err) {
      best_err = err;
      best = cand;
    }
  }
  frame.iq = best;
  return frame;
}

std::vector<LabeledFrame> slice_long_signal(std::span<const siggen::Complex> x, const FrameMeta& meta,
                                            std::size_t frame_len) {
  if (frame_len != static_cast<std::size_t>(kFrameLen))
    throw std::invalid_argument("frame length must be " + std::to_string(kFrameLen));
  if (x.empty() || x.size() % frame_len != 0)
    throw std::invalid_argument("signal length " + std::to_string(x.size()) + " is not a multiple of " +
                                std::to_string(frame_len));
  std::vector<LabeledFrame> out;
  out.reserve(x.size() / frame_len);
  for (std::size_t k = 0; k < x.size(); k += frame_len) out.push_back(to_frame(x.subspan(k, frame_len), meta));
  return out;
}

LabeledFrame to_frame(std::span<const siggen::Complex> x, const FrameMeta& meta) {
  if (x.size() != static_cast<std::size_t>(kFrameLen))
    throw std::invalid_argument("a frame holds exactly " + std::to_string(kFrameLen) + " samples");
  LabeledFrame f;
  f.meta = meta;
  for (std::size_t n = 0; n < x.size(); ++n) {
    f.i(n) = static_cast<float>(x[n].real());
    f.q(n) = static_cast<float>(x[n].imag());
  }
  return f;
}

bool all_finite(const LabeledFrame& frame) {
  for (float v : frame.iq)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace iqshift::datastore
