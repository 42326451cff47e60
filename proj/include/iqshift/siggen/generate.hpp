// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "iqshift/datastore/dataset.hpp"
#include "iqshift/siggen/profile.hpp"

namespace iqshift::siggen {

/// Number of generated signals for a class list, SNR grid and per-cell count.
constexpr std::uint64_t signal_count(std::uint64_t classes, std::uint64_t snrs, std::uint64_t per_cell) {
  return classes * snrs * per_cell;
}

/// Number of frames after slicing each signal into `slices` frames.
constexpr std::uint64_t frame_count(std::uint64_t classes, std::uint64_t snrs, std::uint64_t per_cell,
                                    std::uint64_t slices) {
  return signal_count(classes, snrs, per_cell) * slices;
}

/// Seed of one generated signal, keyed by (class, SNR index, signal index).
std::uint64_t signal_seed(std::uint64_t master_seed, Modulation cls, std::size_t snr_index, std::size_t index);

/// Synthesizes `signals_per_cell` signals for every (class, SNR) cell.
/// Profile A signals are single frames; profile B signals are long and get
/// sliced into frames that share the parent's metadata (and seed). Every
/// frame is normalized to unit power. Output order is canonical and the
/// bytes do not depend on `threads` (0 = OpenMP default).
datastore::Dataset generate_dataset(const GeneratorProfile& profile, const std::vector<Modulation>& classes,
                                    const std::vector<double>& snr_grid_db, std::size_t signals_per_cell,
                                    std::uint64_t master_seed, int threads = 0);

/// Uses the class list and SNR grid carried by the profile.
datastore::Dataset generate_dataset(const GeneratorProfile& profile, std::size_t signals_per_cell,
                                    std::uint64_t master_seed, int threads = 0);

}  // namespace iqshift::siggen
