// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace iqshift::nn {

template <typename T>
LossResult<T> softmax_xent(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax_xent expects logits [N, C]");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  if (labels.size() != n) throw std::invalid_argument("softmax_xent: label count differs from batch size");
  LossResult<T> r;
  r.grad = Tensor<T>(logits.shape());
  const double inv_n = 1.0 / static_cast<double>(n);
  double total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const int y = labels[s];
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw std::invalid_argument("softmax_xent: label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
    const T* row = logits.data() + s * c;
    const double mx = static_cast<double>(*std::max_element(row, row + c));
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(static_cast<double>(row[k]) - mx);
    const double log_sum = std::log(sum);
    total += log_sum - (static_cast<double>(row[static_cast<std::size_t>(y)]) - mx);
    for (std::size_t k = 0; k < c; ++k) {
      const double p = std::exp(static_cast<double>(row[k]) - mx - log_sum);
      r.grad[s * c + k] = static_cast<T>((p - (static_cast<int>(k) == y ? 1.0 : 0.0)) * inv_n);
    }
  }
  r.loss = total * inv_n;
  return r;
}

template LossResult<float> softmax_xent<float>(const Tensor<float>&, std::span<const int>);
template LossResult<double> softmax_xent<double>(const Tensor<double>&, std::span<const int>);

}  // namespace iqshift::nn
