// SPDX-License-Identifier: Apache-2.0
#include "iqshift/siggen/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "iqshift/siggen/srrc.hpp"

namespace iqshift::siggen {

double mean_power(std::span<const Complex> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const Complex& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

std::size_t min_symbols(std::size_t out_len, int sps, int span_symbols) {
  const auto s = static_cast<std::size_t>(sps);
  return (out_len + s - 1) / s + static_cast<std::size_t>(span_symbols);
}

Samples synthesize_clean(const FrameMeta& meta, std::size_t n_symbols, std::size_t out_len, Rng& rng,
                         int span_symbols) {
  const int sps = meta.sps;
  const auto taps = srrc_taps(meta.rolloff, sps, span_symbols);
  const std::size_t transient = taps.size() - 1;
  const std::size_t upsampled = n_symbols * static_cast<std::size_t>(sps);
  if (out_len == 0 || upsampled < out_len + transient)
    throw std::invalid_argument("synthesize_clean: " + std::to_string(n_symbols) + " symbols at sps " +
                                std::to_string(sps) + " cannot cover " + std::to_string(out_len) +
                                " steady-state samples");

  const int k = bits_per_symbol(meta.cls);
  std::vector<std::uint8_t> bits(n_symbols * static_cast<std::size_t>(k));
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() >> 63);
  const Samples symbols = map_symbols(bits, meta.cls);

  // Steady-state output sample n (0-based in the segment) is full-convolution
  // index n + transient: sum over symbols m of s[m] * h[n + transient - m*sps].
  Samples out(out_len);
  const auto ntaps = static_cast<long>(taps.size());
  for (std::size_t n = 0; n < out_len; ++n) {
    const long idx = static_cast<long>(n + transient);
    long m_lo = (idx - ntaps + 1 + sps - 1) / sps;
    if (m_lo < 0) m_lo = 0;
    const long m_hi = idx / sps;
    Complex acc{};
    for (long m = m_lo; m <= m_hi; ++m) acc += symbols[static_cast<std::size_t>(m)] * taps[static_cast<std::size_t>(idx - m * sps)];
    out[n] = acc;
  }

  if (meta.cfo != 0.0f) apply_cfo(out, meta.cfo);

  const double target = std::pow(10.0, static_cast<double>(meta.power_scale_db) / 10.0);
  const double scale = std::sqrt(target / mean_power(out));
  for (Complex& v : out) v *= scale;
  return out;
}

void apply_cfo(std::span<Complex> x, double cfo) {
  for (std::size_t n = 0; n < x.size(); ++n) {
    // Reduce the phase in cycles first to keep the argument small.
    double cycles = cfo * static_cast<double>(n);
    cycles -= std::round(cycles);
    x[n] *= std::polar(1.0, 2.0 * std::numbers::pi * cycles);
  }
}

double noise_variance(double px, double snr_db, SnrConvention convention, double rolloff, int sps) {
  if (!std::isfinite(snr_db)) throw std::invalid_argument("SNR must be finite");
  const double total = px / std::pow(10.0, snr_db / 10.0);
  if (convention == SnrConvention::total) return total;
  return total * static_cast<double>(sps) / (1.0 + rolloff);
}

Samples add_noise(std::span<const Complex> x, double snr_db, SnrConvention convention, double rolloff, int sps,
                  Rng& rng) {
  if (x.empty()) throw std::invalid_argument("add_noise: empty signal");
  const double var = noise_variance(mean_power(x), snr_db, convention, rolloff, sps);
  std::normal_distribution<double> gauss(0.0, std::sqrt(var / 2.0));
  Samples y(x.begin(), x.end());
  for (Complex& v : y) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v += Complex(re, im);
  }
  return y;
}

double inband_total_offset_db(double rolloff, int sps) {
  return 10.0 * std::log10(static_cast<double>(sps) / (1.0 + rolloff));
}

double snr_offset_estimate(const GeneratorProfile& profile) {
  if (profile.snr_convention != SnrConvention::inband)
    throw std::invalid_argument("snr_offset_estimate: profile " + to_string(profile.profile_id) +
                                " uses total SNR; the in-band offset is undefined");
  double sps_term = 0.0;
  for (int s : profile.sps_choices) sps_term += 10.0 * std::log10(static_cast<double>(s));
  sps_term /= static_cast<double>(profile.sps_choices.size());

  // E[ln(1 + b)] for b uniform on [lo, hi], in closed form.
  const double lo = profile.rolloff_range.lo;
  const double hi = profile.rolloff_range.hi;
  double mean_log;
  if (profile.rolloff_range.degenerate()) {
    mean_log = std::log1p(lo);
  } else {
    auto antiderivative = [](double u) { return u * std::log(u) - u; };
    mean_log = (antiderivative(1.0 + hi) - antiderivative(1.0 + lo)) / (hi - lo);
  }
  return sps_term - 10.0 * mean_log / std::numbers::ln10;
}

FrameMeta draw_frame_meta(const GeneratorProfile& profile, Modulation cls, double snr_db, std::uint64_t seed,
                          Rng& rng) {
  FrameMeta meta;
  meta.cls = cls;
  meta.snr_db = static_cast<float>(snr_db);
  meta.seed = seed;
  meta.profile_id = profile.profile_id;
  meta.rolloff = static_cast<float>(uniform(rng, profile.rolloff_range.lo, profile.rolloff_range.hi));
  const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(profile.sps_choices.size()));
  meta.sps = static_cast<std::uint16_t>(profile.sps_choices[pick]);
  meta.cfo = static_cast<float>(uniform(rng, profile.cfo_range.lo, profile.cfo_range.hi));
  meta.power_scale_db =
      static_cast<float>(uniform(rng, profile.power_scale_db_range.lo, profile.power_scale_db_range.hi));
  return meta;
}

std::pair<FrameMeta, Samples> synthesize_signal(const GeneratorProfile& profile, Modulation cls, double snr_db,
                                                std::uint64_t seed) {
  Rng rng(seed);
  FrameMeta meta = draw_frame_meta(profile, cls, snr_db, seed, rng);
  const auto len = static_cast<std::size_t>(profile.signal_len());
  const Samples clean = synthesize_clean(meta, min_symbols(len, meta.sps, profile.srrc_span), len, rng, profile.srrc_span);
  Samples noisy = add_noise(clean, meta.snr_db, profile.snr_convention, meta.rolloff, meta.sps, rng);
  return {meta, std::move(noisy)};
}

}  // namespace iqshift::siggen
