// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace iqshift::nn {

template <typename T>
Tensor<T> softmax_rows(const Tensor<T>& logits) {
  if (logits.rank() != 2) throw std::invalid_argument("softmax expects [N, C]");
  const std::size_t n = logits.dim(0), c = logits.dim(1);
  Tensor<T> p(logits.shape());
  for (std::size_t s = 0; s < n; ++s) {
    const T* row = logits.data() + s * c;
    const T mx = *std::max_element(row, row + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(static_cast<double>(row[k] - mx));
    for (std::size_t k = 0; k < c; ++k) p[s * c + k] = static_cast<T>(std::exp(static_cast<double>(row[k] - mx)) / sum);
  }
  return p;
}

template <typename T>
Network<T>::Network(std::vector<LayerSpec> specs, Shape input_shape, std::uint64_t init_seed)
    : specs_(std::move(specs)), input_shape_(std::move(input_shape)) {
  output_shape_ = nn::output_shape(specs_, input_shape_);
  Shape cur = input_shape_;
  std::uint64_t ordinal = 0;
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    const auto& s = specs_[i];
    if (s.kind == LayerKind::softmax) {
      if (i + 1 != specs_.size()) throw std::invalid_argument("softmax may only be the last layer");
      break;
    }
    layers_.push_back(make_layer<T>(s, cur, ordinal, init_seed));
    ++ordinal;
    cur = nn::output_shape(s, cur);
  }
}

template <typename T>
Tensor<T> Network<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  if (x.rank() == 0 || x.sample_shape() != input_shape_)
    throw std::invalid_argument("network expects [N, " + shape_string(input_shape_) + "] input, got " +
                                shape_string(x.shape()));
  Tensor<T> y = x;
  for (auto& l : layers_) y = l->forward(y, ctx);
  return y;
}

template <typename T>
Tensor<T> Network<T>::backward(const Tensor<T>& dlogits, const ExecContext& ctx) {
  Tensor<T> g = dlogits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g, ctx);
  return g;
}

template <typename T>
Tensor<T> Network<T>::probabilities(const Tensor<T>& x, const ExecContext& ctx) {
  return softmax_rows(forward(x, ctx));
}

template <typename T>
std::vector<Param<T>*> Network<T>::params() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_) l->collect_params(out);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Network<T>::buffers() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  for (auto& l : layers_) l->collect_buffers(out);
  return out;
}

template <typename T>
std::vector<std::pair<std::string, Tensor<T>*>> Network<T>::state() {
  std::vector<std::pair<std::string, Tensor<T>*>> out;
  for (Param<T>* p : params()) out.emplace_back(p->name, &p->value);
  for (auto& b : buffers()) out.push_back(b);
  return out;
}

template <typename T>
std::size_t Network<T>::param_count() {
  std::size_t n = 0;
  for (Param<T>* p : params()) n += p->value.size();
  return n;
}

template Tensor<float> softmax_rows<float>(const Tensor<float>&);
template Tensor<double> softmax_rows<double>(const Tensor<double>&);
template class Network<float>;
template class Network<double>;

}  // namespace iqshift::nn
