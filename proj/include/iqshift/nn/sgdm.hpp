// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "iqshift/nn/layers.hpp"

namespace iqshift::nn {

struct SgdmConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
};

/// Classical momentum: v <- momentum * v - lr * g, then w <- w + v.
/// Velocities start at zero and mirror the parameter shapes.
template <typename T>
class Sgdm {
 public:
  explicit Sgdm(SgdmConfig cfg);

  void step(const std::vector<Param<T>*>& params);

  const SgdmConfig& config() const { return cfg_; }
  std::vector<Tensor<T>>& velocities() { return velocities_; }
  const std::vector<Tensor<T>>& velocities() const { return velocities_; }

 private:
  SgdmConfig cfg_;
  std::vector<Tensor<T>> velocities_;
};

}  // namespace iqshift::nn
