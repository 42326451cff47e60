// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "iqshift/nn/layers.hpp"
#include "iqshift/nn/spec.hpp"

namespace iqshift::nn {

/// Row-wise softmax with max subtraction.
template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits);

/// Runtime network instantiated from a layer-spec list. A trailing softmax
/// spec is not executed by forward(); forward() returns logits and
/// probabilities() applies the softmax.
template <typename T>
class Network {
 public:
  Network(std::vector<LayerSpec> specs, Shape input_shape, std::uint64_t init_seed);

  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx);
  /// Backpropagates d(loss)/d(logits); fills every parameter gradient.
  Tensor<T> backward(const Tensor<T>& dlogits, const ExecContext& ctx);
  Tensor<T> probabilities(const Tensor<T>& x, const ExecContext& ctx);

  std::vector<Param<T>*> params();
  std::vector<std::pair<std::string, Tensor<T>*>> buffers();
  /// Parameters then buffers, in declaration order; this is the checkpoint order.
  std::vector<std::pair<std::string, Tensor<T>*>> state();
  std::size_t param_count();

  const std::vector<LayerSpec>& specs() const { return specs_; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& output_shape() const { return output_shape_; }
  std::string listing() const { return spec_listing(specs_, input_shape_); }
  std::vector<std::unique_ptr<Layer<T>>>& layers() { return layers_; }

 private:
  std::vector<LayerSpec> specs_;
  Shape input_shape_;
  Shape output_shape_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
};

}  // namespace iqshift::nn
