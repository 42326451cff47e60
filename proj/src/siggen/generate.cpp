// SPDX-License-Identifier: Apache-2.0
#include "iqshift/siggen/generate.hpp"

#include <omp.h>

#include <exception>
#include <stdexcept>

#include "iqshift/common/rng.hpp"
#include "iqshift/datastore/frame.hpp"
#include "iqshift/siggen/synth.hpp"

namespace iqshift::siggen {

std::uint64_t signal_seed(std::uint64_t master_seed, Modulation cls, std::size_t snr_index, std::size_t index) {
  return derive_seed(master_seed, {static_cast<std::uint64_t>(cls), snr_index, index});
}

datastore::Dataset generate_dataset(const GeneratorProfile& profile, const std::vector<Modulation>& classes,
                                    const std::vector<double>& snr_grid_db, std::size_t signals_per_cell,
                                    std::uint64_t master_seed, int threads) {
  if (signals_per_cell < 1) throw std::invalid_argument("generate_dataset: need at least one signal per cell");
  if (snr_grid_db.empty()) throw std::invalid_argument("generate_dataset: empty SNR grid");
  if (classes.empty()) throw std::invalid_argument("generate_dataset: empty class list");

  datastore::Dataset ds;
  ds.manifest.profile = profile;
  ds.manifest.profile.classes = classes;
  ds.manifest.profile.snr_grid_db = snr_grid_db;
  ds.manifest.profile.validate();
  ds.manifest.master_seed = master_seed;
  ds.manifest.signals_per_cell = signals_per_cell;
  ds.manifest.slices_per_signal = static_cast<std::size_t>(profile.slices_per_signal());
  ds.manifest.frame_count = frame_count(classes.size(), snr_grid_db.size(), signals_per_cell,
                                        ds.manifest.slices_per_signal);
  ds.frames.resize(ds.manifest.frame_count);

  const std::size_t slices = ds.manifest.slices_per_signal;
  const auto total = static_cast<long>(signal_count(classes.size(), snr_grid_db.size(), signals_per_cell));
  std::exception_ptr failure;
  const int nthreads = threads > 0 ? threads : omp_get_max_threads();

#pragma omp parallel for schedule(dynamic, 4) num_threads(nthreads)
  for (long s = 0; s < total; ++s) {
    try {
      const auto sig = static_cast<std::size_t>(s);
      const std::size_t cell = sig / signals_per_cell;
      const std::size_t index = sig % signals_per_cell;
      const Modulation cls = classes[cell / snr_grid_db.size()];
      const std::size_t snr_index = cell % snr_grid_db.size();
      const auto seed = signal_seed(master_seed, cls, snr_index, index);
      auto [meta, x] = synthesize_signal(profile, cls, snr_grid_db[snr_index], seed);
      auto frames = datastore::slice_long_signal(x, meta);
      for (std::size_t k = 0; k < slices; ++k)
        ds.frames[sig * slices + k] = datastore::normalize_unit_power(std::move(frames[k]));
    } catch (...) {
#pragma omp critical(iqshift_generate_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return ds;
}

datastore::Dataset generate_dataset(const GeneratorProfile& profile, std::size_t signals_per_cell,
                                    std::uint64_t master_seed, int threads) {
  return generate_dataset(profile, profile.classes, profile.snr_grid_db, signals_per_cell, master_seed, threads);
}

}  // namespace iqshift::siggen
