// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn::detail {

template <typename T>
void check_conv(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.rank() != 3 || w.rank() != 3 || b.rank() != 1)
    throw std::invalid_argument("conv1d expects x [N,Cin,L], w [Cout,Cin,K], b [Cout]");
  if (x.dim(1) != w.dim(1))
    throw std::invalid_argument("conv1d: input has " + std::to_string(x.dim(1)) + " channels, kernel expects " +
                                std::to_string(w.dim(1)));
  if (b.dim(0) != w.dim(0)) throw std::invalid_argument("conv1d: bias length differs from output channels");
  if (w.dim(2) % 2 == 0) throw std::invalid_argument("conv1d: kernel size must be odd");
}

template <typename T>
void check_dense(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b) {
  if (x.rank() < 2 || w.rank() != 2 || b.rank() != 1)
    throw std::invalid_argument("dense expects x [N,...], w [M,F], b [M]");
  if (x.size() / x.dim(0) != w.dim(1))
    throw std::invalid_argument("dense: input has " + std::to_string(x.size() / x.dim(0)) + " features, weights expect " +
                                std::to_string(w.dim(1)));
  if (b.dim(0) != w.dim(0)) throw std::invalid_argument("dense: bias length differs from outputs");
}

template <typename T>
void check_bn(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta) {
  if (x.rank() != 3) throw std::invalid_argument("batch norm expects x [N,C,L]");
  if (gamma.size() != x.dim(1) || beta.size() != x.dim(1))
    throw std::invalid_argument("batch norm: parameter length differs from channels");
  if (x.dim(0) * x.dim(2) < 2) throw std::invalid_argument("batch norm training needs more than one value per channel");
}

template <typename T>
void ensure_shape(Tensor<T>& t, const Shape& s) {
  if (t.shape() != s) t = Tensor<T>(s);
}

}  // namespace iqshift::nn::detail
