// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn {

/// Which kernel family a layer dispatches to.
enum class KernelPath { serial, parallel };

// Shapes shared by both kernel families:
//   conv1d: x [N, Cin, L], w [Cout, Cin, K], b [Cout], y [N, Cout, L];
//           stride 1, zero "same" padding of (K - 1) / 2 on each side, K odd.
//   dense:  x [N, F] (or any [N, ...] flattened), w [M, F], b [M], y [N, M].
//   batch norm (training statistics): x, y, xhat [N, C, L]; per-channel
//           mean/var are the biased batch statistics over N and L.
// Backward kernels overwrite their gradient outputs.

namespace serial {

template <typename T>
void conv1d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y);
template <typename T>
void conv1d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                     Tensor<T>& db);

template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y);
template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                    Tensor<T>& db);

template <typename T>
void batchnorm_train_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                             Tensor<T>& y, Tensor<T>& xhat, std::vector<double>& mean, std::vector<double>& var);
template <typename T>
void batchnorm_train_backward(const Tensor<T>& dy, const Tensor<T>& xhat, const Tensor<T>& gamma,
                              const std::vector<double>& var, double eps, Tensor<T>& dx, Tensor<T>& dgamma,
                              Tensor<T>& dbeta);

}  // namespace serial

/// OpenMP kernels. Convolution and dense products go through Eigen GEMM on
/// an im2col layout. Reductions over the batch use a fixed partition into
/// chunks of kReduceChunk samples summed in ascending chunk order, so results
/// are bit-identical for any thread count.
namespace parallel {

inline constexpr std::size_t kReduceChunk = 8;

template <typename T>
void conv1d_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y, int threads);
template <typename T>
void conv1d_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                     Tensor<T>& db, int threads);

template <typename T>
void dense_forward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& b, Tensor<T>& y, int threads);
template <typename T>
void dense_backward(const Tensor<T>& x, const Tensor<T>& w, const Tensor<T>& dy, Tensor<T>& dx, Tensor<T>& dw,
                    Tensor<T>& db, int threads);

template <typename T>
void batchnorm_train_forward(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, double eps,
                             Tensor<T>& y, Tensor<T>& xhat, std::vector<double>& mean, std::vector<double>& var,
                             int threads);
template <typename T>
void batchnorm_train_backward(const Tensor<T>& dy, const Tensor<T>& xhat, const Tensor<T>& gamma,
                              const std::vector<double>& var, double eps, Tensor<T>& dx, Tensor<T>& dgamma,
                              Tensor<T>& dbeta, int threads);

}  // namespace parallel

}  // namespace iqshift::nn
