// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "iqshift/datastore/frame.hpp"
#include "iqshift/siggen/profile.hpp"

namespace iqshift::datastore {

enum class Split : std::uint8_t { train = 0, val = 1, test = 2 };

std::string to_string(Split s);
Split split_from_string(const std::string& s);

inline constexpr std::uint16_t kModfVersion = 1;

/// Describes a dataset. Frames are stored in canonical order: class-major,
/// then SNR, then generated signal, then slice. Cell and parent-signal
/// membership therefore follow from a frame's index alone.
struct DatasetManifest {
  std::uint16_t format_version = kModfVersion;
  siggen::GeneratorProfile profile;  // carries profile id, class list and SNR grid
  std::uint64_t master_seed = 0;
  std::size_t signals_per_cell = 0;
  std::size_t slices_per_signal = 1;
  std::size_t frame_count = 0;
  std::array<double, 3> split_fractions{0.75, 0.125, 0.125};
  std::uint64_t split_seed = 0;
  std::vector<Split> splits;  // empty until partitioned

  std::size_t num_cells() const { return profile.classes.size() * profile.snr_grid_db.size(); }
  std::size_t frames_per_cell() const { return signals_per_cell * slices_per_signal; }
  std::size_t cell_of(std::size_t frame) const { return frame / frames_per_cell(); }
  std::size_t parent_of(std::size_t frame) const { return frame / slices_per_signal; }
  siggen::Modulation class_of_cell(std::size_t cell) const {
    return profile.classes[cell / profile.snr_grid_db.size()];
  }
  double snr_of_cell(std::size_t cell) const { return profile.snr_grid_db[cell % profile.snr_grid_db.size()]; }

  /// Throws DataError(structure) if counts are inconsistent.
  void validate() const;

  bool operator==(const DatasetManifest&) const = default;
};

/// Human-readable `key = value` rendering, also embedded in MODF files.
std::string manifest_to_text(const DatasetManifest& m);
DatasetManifest manifest_from_text(const std::string& text);

/// Stratified split by (class, SNR) cell over parent signals, so slices of
/// one long signal never straddle splits. Per cell of n parents: floor(n*val)
/// go to VAL, floor(n*test) to TEST and the rest to TRAIN.
DatasetManifest partition(DatasetManifest manifest, std::array<double, 3> fractions, std::uint64_t seed);

struct Dataset {
  DatasetManifest manifest;
  std::vector<LabeledFrame> frames;

  std::vector<std::size_t> indices(Split s) const;
  std::size_t count(Split s) const;
};

/// Checks frame order and labels against the manifest.
void validate_dataset(const Dataset& ds);

}  // namespace iqshift::datastore
