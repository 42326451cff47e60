// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "iqshift/datastore/dataset.hpp"
#include "iqshift/nn/checkpoint.hpp"
#include "iqshift/train/model.hpp"
#include "iqshift/zoo/model_graph.hpp"

namespace iqshift::train {

struct TrainConfig {
  std::size_t batch_size = 256;
  std::size_t epochs = 12;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::uint64_t seed = 1;  // weight init, epoch shuffles and dropout masks
  Precision precision = Precision::f32;
  std::size_t checkpoint_every = 1;  // epochs between checkpoint_last.modw writes
  int threads = 0;                   // 0: OpenMP default
  std::string out_dir;               // empty: keep everything in memory
  std::function<void(const std::string&)> log;

  /// 64-bit, single-threaded.
  static TrainConfig reference();
  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  std::size_t completed() const { return epochs.size(); }
  /// 1-based epoch with the highest validation accuracy (earliest on ties); 0 if empty.
  std::size_t best_epoch() const;
  std::vector<double> train_losses() const;

  /// Tab-separated table with a header row.
  std::string to_tsv() const;
  static TrainHistory from_tsv(const std::string& text);
};

struct TrainResult {
  Model final_model;
  nn::Checkpoint best;  // best-validation weights
  TrainHistory history;
  std::string notice;  // set when nothing was trained
};

/// Frame-index order of one epoch: a seeded permutation of the TRAIN split.
std::vector<std::size_t> epoch_order(const datastore::Dataset& data, std::uint64_t seed, std::size_t epoch);

/// Number of optimizer steps per epoch (the last batch may be partial).
constexpr std::size_t batches_per_epoch(std::size_t frames, std::size_t batch) {
  return (frames + batch - 1) / batch;
}

/// Maps each dataset class to its index in the model's label list; throws
/// std::invalid_argument when the class lists do not line up.
std::vector<int> label_map(const datastore::DatasetManifest& m, const std::vector<siggen::Modulation>& model_classes);

/// Trains from a fresh initialization. With an out_dir, writes
/// checkpoint_last.modw (with optimizer state), checkpoint_best.modw and
/// history.tsv.
TrainResult train(const zoo::ModelGraph& graph, const datastore::Dataset& data, const TrainConfig& cfg);

/// Continues from a checkpoint_last-style file up to cfg.epochs in total.
/// When `expected` is given its layout must match the checkpoint.
TrainResult resume(const std::string& checkpoint_path, const datastore::Dataset& data, const TrainConfig& cfg,
                   const zoo::ModelGraph* expected = nullptr);

}  // namespace iqshift::train
