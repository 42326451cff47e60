// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "iqshift/common/rng.hpp"
#include "iqshift/siggen/profile.hpp"

namespace iqshift::siggen {

using Complex = std::complex<double>;
using Samples = std::vector<Complex>;

double mean_power(std::span<const Complex> x);

/// Smallest symbol count whose filtered steady state covers `out_len` samples.
std::size_t min_symbols(std::size_t out_len, int sps, int span_symbols);

/// Random bits -> symbols -> zero-stuff by sps -> SRRC -> steady-state
/// segment of `out_len` samples -> CFO rotation -> power scaling. The segment
/// is rescaled to a measured power of exactly 10^(power_scale_db/10).
Samples synthesize_clean(const FrameMeta& meta, std::size_t n_symbols, std::size_t out_len, Rng& rng,
                         int span_symbols = kDefaultSrrcSpan);

/// Multiplies sample n by exp(j*2*pi*cfo*n).
void apply_cfo(std::span<Complex> x, double cfo);

/// Complex noise variance that realizes `snr_db` for a signal of power `px`.
///
/// TOTAL: the ratio is against all noise in the sampling bandwidth.
/// INBAND: the ratio is against the noise inside the occupied bandwidth,
/// which is the fraction (1 + rolloff) / sps of the sampling bandwidth.
double noise_variance(double px, double snr_db, SnrConvention convention, double rolloff, int sps);

/// Returns x plus circular white Gaussian noise at the requested SNR.
Samples add_noise(std::span<const Complex> x, double snr_db, SnrConvention convention, double rolloff, int sps,
                  Rng& rng);

/// In-band SNR minus total SNR for one (rolloff, sps) pair: 10 log10(sps / (1 + rolloff)).
double inband_total_offset_db(double rolloff, int sps);

/// Mean in-band/total offset over profile B's (rolloff, sps) distribution.
/// Rolloff is uniform over its range and sps uniform over its choices.
/// Rejects profile A, whose frames are already labelled in total SNR.
double snr_offset_estimate(const GeneratorProfile& profile);

/// Draws per-frame parameters from the profile using the frame's own stream.
FrameMeta draw_frame_meta(const GeneratorProfile& profile, Modulation cls, double snr_db, std::uint64_t seed,
                          Rng& rng);

/// Full noisy signal (`profile.signal_len()` samples) for a frame seed.
/// Deterministic in (profile, cls, snr_db, seed).
std::pair<FrameMeta, Samples> synthesize_signal(const GeneratorProfile& profile, Modulation cls, double snr_db,
                                                std::uint64_t seed);

}  // namespace iqshift::siggen
