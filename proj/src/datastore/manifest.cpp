// SPDX-License-Identifier: Apache-2.0
#include "iqshift/datastore/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

#include "iqshift/common/config.hpp"
#include "iqshift/common/error.hpp"
#include "iqshift/common/rng.hpp"

namespace iqshift::datastore {

std::string to_string(Split s) {
  switch (s) {
    case Split::train: return "TRAIN";
    case Split::val: return "VAL";
    case Split::test: return "TEST";
  }
  return "?";
}

Split split_from_string(const std::string& s) {
  if (s == "TRAIN" || s == "train") return Split::train;
  if (s == "VAL" || s == "val") return Split::val;
  if (s == "TEST" || s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + s + "'");
}

void DatasetManifest::validate() const {
  auto fail = [](const std::string& why) { throw DataError(DataError::Kind::structure, "manifest: " + why); };
  if (profile.classes.empty() || profile.snr_grid_db.empty()) fail("empty class list or SNR grid");
  if (signals_per_cell == 0 || slices_per_signal == 0) fail("zero signals per cell or slices per signal");
  if (frame_count != num_cells() * frames_per_cell())
    fail("frame_count " + std::to_string(frame_count) + " != cells x frames per cell " +
         std::to_string(num_cells() * frames_per_cell()));
  if (!splits.empty() && splits.size() != frame_count) fail("split assignment does not cover every frame");
}

namespace {

const std::set<std::string> kDatasetKeys = {"format_version", "master_seed", "signals_per_cell",
                                            "slices_per_signal", "frame_count", "split_fractions",
                                            "split_seed", "splits"};

}  // namespace

std::string manifest_to_text(const DatasetManifest& m) {
  std::string out;
  out += "format_version = " + std::to_string(m.format_version) + "\n";
  out += siggen::format_profile(m.profile);
  out += "master_seed = " + std::to_string(m.master_seed) + "\n";
  out += "signals_per_cell = " + std::to_string(m.signals_per_cell) + "\n";
  out += "slices_per_signal = " + std::to_string(m.slices_per_signal) + "\n";
  out += "frame_count = " + std::to_string(m.frame_count) + "\n";
  out += "split_fractions = " + format_double(m.split_fractions[0]) + "," + format_double(m.split_fractions[1]) +
         "," + format_double(m.split_fractions[2]) + "\n";
  out += "split_seed = " + std::to_string(m.split_seed) + "\n";
  out += "splits = ";
  for (Split s : m.splits) out += static_cast<char>('0' + static_cast<int>(s));
  out += "\n";
  return out;
}

DatasetManifest manifest_from_text(const std::string& text) {
  try {
    const auto cfg = KeyValueConfig::parse(text);
    std::string profile_text;
    for (const auto& [k, v] : cfg.values())
      if (!kDatasetKeys.count(k)) profile_text += k + " = " + v + "\n";

    DatasetManifest m;
    m.format_version = static_cast<std::uint16_t>(cfg.get_int("format_version"));
    m.profile = siggen::parse_profile(profile_text);
    m.master_seed = std::stoull(cfg.get("master_seed"));
    m.signals_per_cell = static_cast<std::size_t>(cfg.get_int("signals_per_cell"));
    m.slices_per_signal = static_cast<std::size_t>(cfg.get_int("slices_per_signal"));
    m.frame_count = static_cast<std::size_t>(cfg.get_int("frame_count"));
    const auto fr = split_list(cfg.get("split_fractions"));
    if (fr.size() != 3) throw std::invalid_argument("split_fractions needs three values");
    for (std::size_t i = 0; i < 3; ++i) m.split_fractions[i] = std::stod(fr[i]);
    m.split_seed = std::stoull(cfg.get("split_seed"));
    for (char c : cfg.find("splits").value_or("")) {
      if (c < '0' || c > '2') throw std::invalid_argument("bad split code");
      m.splits.push_back(static_cast<Split>(c - '0'));
    }
    return m;
  } catch (const DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw DataError(DataError::Kind::structure, std::string("manifest: ") + e.what());
  }
}

DatasetManifest partition(DatasetManifest manifest, std::array<double, 3> fractions, std::uint64_t seed) {
  for (double f : fractions)
    if (!(f >= 0.0)) throw std::invalid_argument("split fractions must be non-negative");
  const double sum = fractions[0] + fractions[1] + fractions[2];
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split fractions must sum to 1");
  manifest.validate();

  manifest.split_fractions = fractions;
  manifest.split_seed = seed;
  manifest.splits.assign(manifest.frame_count, Split::train);

  const std::size_t n = manifest.signals_per_cell;
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fractions[2] + 1e-9));
  const std::size_t n_train = n - n_val - n_test;

  std::vector<std::size_t> order(n);
  for (std::size_t cell = 0; cell < manifest.num_cells(); ++cell) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, {cell}));
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t r = 0; r < n; ++r) {
      const Split s = r < n_train ? Split::train : (r < n_train + n_val ? Split::val : Split::test);
      const std::size_t parent = cell * n + order[r];
      for (std::size_t k = 0; k < manifest.slices_per_signal; ++k)
        manifest.splits[parent * manifest.slices_per_signal + k] = s;
    }
  }
  return manifest;
}

std::vector<std::size_t> Dataset::indices(Split s) const {
  if (manifest.splits.size() != frames.size())
    throw std::logic_error("dataset has not been partitioned");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < frames.size(); ++i)
    if (manifest.splits[i] == s) out.push_back(i);
  return out;
}

std::size_t Dataset::count(Split s) const {
  return static_cast<std::size_t>(std::count(manifest.splits.begin(), manifest.splits.end(), s));
}

void validate_dataset(const Dataset& ds) {
  ds.manifest.validate();
  if (ds.frames.size() != ds.manifest.frame_count)
    throw DataError(DataError::Kind::structure, "dataset holds " + std::to_string(ds.frames.size()) +
                                                    " frames, manifest declares " +
                                                    std::to_string(ds.manifest.frame_count));
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    const auto cell = ds.manifest.cell_of(i);
    const auto& meta = ds.frames[i].meta;
    if (meta.cls != ds.manifest.class_of_cell(cell) ||
        meta.snr_db != static_cast<float>(ds.manifest.snr_of_cell(cell)) ||
        meta.profile_id != ds.manifest.profile.profile_id)
      throw DataError(DataError::Kind::structure, "frame " + std::to_string(i) + " is out of canonical order");
  }
}

}  // namespace iqshift::datastore
