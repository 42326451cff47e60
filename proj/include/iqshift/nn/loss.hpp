// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>

#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn {

template <typename T>
struct LossResult {
  double loss = 0.0;  // mean cross-entropy over the batch
  Tensor<T> grad;     // (softmax - onehot) / N
};

/// Softmax cross-entropy on logits [N, C]. Labels must lie in [0, C).
template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels);

}  // namespace iqshift::nn
