// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/sgdm.hpp"

#include <stdexcept>

namespace iqshift::nn {

template <typename T>
Sgdm<T>::Sgdm(SgdmConfig cfg) : cfg_(cfg) {
  if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0)) throw std::invalid_argument("momentum must lie in [0, 1)");
  if (!(cfg.learning_rate >= 0.0)) throw std::invalid_argument("learning rate must be non-negative");
}

template <typename T>
void Sgdm<T>::step(const std::vector<Param<T>*>& params) {
  if (velocities_.empty()) {
    for (const Param<T>* p : params) velocities_.emplace_back(p->value.shape());
  }
  if (velocities_.size() != params.size()) throw std::invalid_argument("optimizer state does not mirror parameters");
  const T mu = static_cast<T>(cfg_.momentum);
  const T lr = static_cast<T>(cfg_.learning_rate);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param<T>& p = *params[i];
    Tensor<T>& v = velocities_[i];
    if (v.shape() != p.value.shape() || p.grad.shape() != p.value.shape())
      throw std::invalid_argument("optimizer: shape mismatch for " + p.name);
    for (std::size_t k = 0; k < v.size(); ++k) {
      v[k] = mu * v[k] - lr * p.grad[k];
      p.value[k] += v[k];
    }
  }
}

template class Sgdm<float>;
template class Sgdm<double>;

}  // namespace iqshift::nn
