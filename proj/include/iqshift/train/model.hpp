// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "iqshift/datastore/dataset.hpp"
#include "iqshift/nn/checkpoint.hpp"
#include "iqshift/nn/network.hpp"
#include "iqshift/zoo/model_graph.hpp"

namespace iqshift::train {

enum class Precision { f32, f64 };

std::string to_string(Precision p);
Precision precision_from_string(const std::string& s);

/// Anything that maps frames to class indices over a fixed label list.
class Classifier {
 public:
  virtual ~Classifier() = default;
  virtual const std::vector<siggen::Modulation>& classes() const = 0;
  /// One predicted class index per entry of `frames` (indices into ds.frames).
  virtual std::vector<int> predict(const datastore::Dataset& ds, std::span<const std::size_t> frames) = 0;
};

/// Copies frames [first, first + n) of `order` into an [n, 2, 1024] tensor.
template <typename T>
nn::Tensor<T> assemble_batch(const datastore::Dataset& ds, std::span<const std::size_t> order);

/// Profile of the data a checkpoint was trained on, if recorded.
std::optional<siggen::GeneratorProfile> training_profile(const nn::Checkpoint& ckpt);

/// A network built from a ModelGraph at 32- or 64-bit precision.
class Model final : public Classifier {
 public:
  Model(zoo::ModelGraph graph, Precision precision, std::uint64_t init_seed);

  /// Rebuilds the graph named in the checkpoint metadata and loads its state.
  static Model from_checkpoint(const nn::Checkpoint& ckpt);
  static Model load(const std::string& path);

  const zoo::ModelGraph& graph() const { return graph_; }
  Precision precision() const { return precision_; }
  const std::vector<siggen::Modulation>& classes() const override { return graph_.classes; }

  std::vector<int> predict(const datastore::Dataset& ds, std::span<const std::size_t> frames) override;

  /// Inference settings.
  int threads = 0;
  std::size_t batch_size = 256;

  nn::Network<float>& f32() { return std::get<nn::Network<float>>(net_); }
  nn::Network<double>& f64() { return std::get<nn::Network<double>>(net_); }

  /// Metadata lines identifying the architecture and label list.
  std::string identity_metadata() const;
  /// Parameters and buffers only (no optimizer).
  nn::Checkpoint snapshot(const std::string& extra_metadata = "");

 private:
  zoo::ModelGraph graph_;
  Precision precision_;
  std::variant<nn::Network<float>, nn::Network<double>> net_;
};

}  // namespace iqshift::train
