// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqshift/nn/network.hpp"
#include "iqshift/nn/spec.hpp"
#include "iqshift/siggen/modulation.hpp"

namespace iqshift::zoo {

enum class ModelKind { resnet, cnn };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// One row of a layout table: a layer (or merged group of layers) and its
/// per-sample output shape.
struct TraceRow {
  std::string layer;
  nn::Shape shape;

  bool operator==(const TraceRow&) const = default;
};

/// Table-style name of a single layer ("Conv", "1x1 Conv", "Batch
/// Normalization", "Maximum Pooling", "Residual Unit", ...).
std::string row_label(const nn::LayerSpec& spec);

/// Rows for a layer list: layers sharing a `group` tag (contiguous) merge
/// into one row showing the group's final shape. A "#n" suffix on a group
/// tag only keeps neighbouring groups apart and is not rendered.
std::vector<TraceRow> trace(const std::vector<nn::LayerSpec>& layers, const nn::Shape& input);

/// Residual unit rows: Input, the body layers (ReLUs numbered _1, _2, ...
/// when there are several) and the closing "Addition(Input, <last>)" row.
std::vector<TraceRow> residual_unit_trace(const nn::LayerSpec& unit, const nn::Shape& input);

/// "label\tshape" lines; the first line is the input row.
std::string format_trace(const std::vector<TraceRow>& rows);

/// Immutable architecture description plus the class labels it predicts.
struct ModelGraph {
  ModelKind kind = ModelKind::cnn;
  nn::Shape input_shape{2, 1024};
  std::size_t num_classes = 0;
  std::vector<siggen::Modulation> classes;  // index -> label; size num_classes
  std::vector<nn::LayerSpec> layers;

  std::vector<TraceRow> table_trace() const { return trace(layers, input_shape); }
  /// Per-layer rows behind table row `row` (1-based; row 0 is the input),
  /// starting with that row's input shape.
  std::vector<TraceRow> expand_row(std::size_t row) const;
  std::size_t param_count() const { return nn::param_count(layers, input_shape); }
  std::string listing() const { return nn::spec_listing(layers, input_shape); }

  /// Structured text: kind, classes, table trace and full layer listing.
  std::string export_text() const;

  template <typename T>
  nn::Network<T> instantiate(std::uint64_t init_seed) const {
    return nn::Network<T>(layers, input_shape, init_seed);
  }
};

/// Residual network: six residual stacks (1x1 conv to 32 channels, batch
/// norm, ReLU, two residual units, max pooling) taking 2x1024 down to 32x16,
/// then two dropout(0.5)/FC(128)/SELU blocks and dropout(0.5)/FC/softmax.
ModelGraph build_resnet(std::size_t num_classes);
ModelGraph build_resnet(const std::vector<siggen::Modulation>& classes);

/// CNN: conv(K=23)/batch norm/ReLU blocks with 16, 24, 32, 48, 64, 96
/// channels, max pooling after the first five, global average pooling after
/// the sixth, then dropout(0)/FC/softmax.
ModelGraph build_cnn(std::size_t num_classes);
ModelGraph build_cnn(const std::vector<siggen::Modulation>& classes);

ModelGraph build_model(ModelKind kind, const std::vector<siggen::Modulation>& classes);

/// Layers of one residual unit (conv/BN/ReLU twice; the skip add is implied).
std::vector<nn::LayerSpec> residual_unit_body(std::size_t channels = 32, std::size_t kernel = nn::kDefaultKernel);

}  // namespace iqshift::zoo
