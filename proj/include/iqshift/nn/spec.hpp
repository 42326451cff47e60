// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn {

enum class LayerKind { conv1d, batch_norm, relu, selu, dropout, max_pool, global_avg_pool, dense, residual, softmax };

inline constexpr std::size_t kDefaultKernel = 23;

/// Declarative description of one layer. Shapes handled here are per sample
/// (no batch dimension): [C, L] for sequences, [F] for feature vectors.
struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  std::size_t units = 0;   // conv output channels, dense outputs
  std::size_t kernel = 0;  // conv kernel size (odd)
  double rate = 0.0;       // dropout probability in [0, 1)
  double eps = 1e-5;       // batch norm
  double bn_momentum = 0.1;
  std::vector<LayerSpec> body;  // residual branch; output = input + body(input)
  std::string group;            // layout-table row this layer belongs to

  static LayerSpec conv(std::size_t out_channels, std::size_t kernel = kDefaultKernel);
  static LayerSpec batch_norm();
  static LayerSpec relu();
  static LayerSpec selu();
  static LayerSpec dropout(double rate);
  static LayerSpec max_pool();
  static LayerSpec global_avg_pool();
  static LayerSpec dense(std::size_t outputs);
  static LayerSpec residual(std::vector<LayerSpec> body);
  static LayerSpec softmax();

  LayerSpec&& in_group(std::string g) && {
    group = std::move(g);
    return std::move(*this);
  }
};

std::string kind_name(LayerKind k);

/// One-line description, e.g. "conv1d out=32 k=23".
std::string describe(const LayerSpec& spec);

/// Static shape inference. Throws std::invalid_argument on any layer whose
/// input shape it cannot accept (odd pooling length, residual branch that
/// changes shape, ...).
Shape output_shape(const LayerSpec& spec, const Shape& in);
Shape output_shape(const std::vector<LayerSpec>& specs, const Shape& in);

/// Trainable parameter count (batch-norm running statistics excluded).
std::size_t param_count(const LayerSpec& spec, const Shape& in);
std::size_t param_count(const std::vector<LayerSpec>& specs, const Shape& in);

/// Indented listing of every layer with its output shape; nested residual
/// bodies are indented one level deeper.
std::string spec_listing(const std::vector<LayerSpec>& specs, const Shape& in);

}  // namespace iqshift::nn
