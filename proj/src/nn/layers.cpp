// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/layers.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace iqshift::nn {

namespace {

int team(const ExecContext& ctx) { return ctx.threads > 0 ? ctx.threads : omp_get_max_threads(); }

template <typename T>
void he_uniform(Tensor<T>& w, std::size_t fan_in, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  for (auto& v : w.values()) v = static_cast<T>(uniform(rng, -limit, limit));
}

std::string param_name(std::uint64_t ordinal, const LayerSpec& spec, const char* what) {
  return std::to_string(ordinal) + "." + kind_name(spec.kind) + "." + what;
}

}  // namespace

template <typename T>
void Layer<T>::require_cache(bool present) const {
  if (!present)
    throw std::logic_error(describe(spec_) + ": backward needs a preceding training-mode forward");
}

// ---- Conv1d ----

template <typename T>
Conv1d<T>::Conv1d(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal, Rng& init) : Layer<T>(spec, ordinal) {
  output_shape(spec, in);
  const std::size_t cin = in[0];
  weight_ = {param_name(ordinal, spec, "weight"), Tensor<T>({spec.units, cin, spec.kernel}), {}};
  bias_ = {param_name(ordinal, spec, "bias"), Tensor<T>({spec.units}), {}};
  he_uniform(weight_.value, cin * spec.kernel, init);
}

template <typename T>
Tensor<T> Conv1d<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  Tensor<T> y;
  if (ctx.kernels == KernelPath::serial)
    serial::conv1d_forward(x, weight_.value, bias_.value, y);
  else
    parallel::conv1d_forward(x, weight_.value, bias_.value, y, ctx.threads);
  cached_ = ctx.mode == Mode::train;
  if (cached_) input_ = x;
  return y;
}

template <typename T>
Tensor<T> Conv1d<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  Tensor<T> dx;
  if (ctx.kernels == KernelPath::serial)
    serial::conv1d_backward(input_, weight_.value, dy, dx, weight_.grad, bias_.grad);
  else
    parallel::conv1d_backward(input_, weight_.value, dy, dx, weight_.grad, bias_.grad, ctx.threads);
  return dx;
}

template <typename T>
void Conv1d<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---- BatchNorm ----

template <typename T>
BatchNorm<T>::BatchNorm(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {
  output_shape(spec, in);
  const std::size_t c = in[0];
  gamma_ = {param_name(ordinal, spec, "gamma"), Tensor<T>({c}, T{1}), {}};
  beta_ = {param_name(ordinal, spec, "beta"), Tensor<T>({c}, T{0}), {}};
  running_mean_ = Tensor<T>({c}, T{0});
  running_var_ = Tensor<T>({c}, T{1});
}

template <typename T>
Tensor<T> BatchNorm<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  const double eps = this->spec_.eps;
  if (ctx.mode == Mode::infer) {
    if (x.rank() != 3 || x.dim(1) != gamma_.value.size())
      throw std::invalid_argument("batch norm: input shape " + shape_string(x.shape()));
    const std::size_t n = x.dim(0), c = x.dim(1), len = x.dim(2);
    Tensor<T> y(x.shape());
#pragma omp parallel for schedule(static) num_threads(team(ctx))
    for (long sl = 0; sl < static_cast<long>(n); ++sl) {
      const auto s = static_cast<std::size_t>(sl);
      for (std::size_t ch = 0; ch < c; ++ch) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(running_var_[ch]) + eps);
        const T scale = static_cast<T>(static_cast<double>(gamma_.value[ch]) * inv);
        const T shift = static_cast<T>(static_cast<double>(beta_.value[ch]) -
                                       static_cast<double>(running_mean_[ch]) * static_cast<double>(gamma_.value[ch]) * inv);
        const std::size_t off = (s * c + ch) * len;
        for (std::size_t t = 0; t < len; ++t) y[off + t] = scale * x[off + t] + shift;
      }
    }
    cached_ = false;
    return y;
  }

  Tensor<T> y;
  std::vector<double> mean;
  if (ctx.kernels == KernelPath::serial)
    serial::batchnorm_train_forward(x, gamma_.value, beta_.value, eps, y, xhat_, mean, batch_var_);
  else
    parallel::batchnorm_train_forward(x, gamma_.value, beta_.value, eps, y, xhat_, mean, batch_var_, ctx.threads);

  const double count = static_cast<double>(x.dim(0) * x.dim(2));
  const double m = this->spec_.bn_momentum;
  for (std::size_t ch = 0; ch < mean.size(); ++ch) {
    const double unbiased = batch_var_[ch] * count / (count - 1.0);
    running_mean_[ch] = static_cast<T>((1.0 - m) * static_cast<double>(running_mean_[ch]) + m * mean[ch]);
    running_var_[ch] = static_cast<T>((1.0 - m) * static_cast<double>(running_var_[ch]) + m * unbiased);
  }
  cached_ = true;
  cached_mode_ = Mode::train;
  return y;
}

template <typename T>
Tensor<T> BatchNorm<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  Tensor<T> dx;
  if (ctx.kernels == KernelPath::serial)
    serial::batchnorm_train_backward(dy, xhat_, gamma_.value, batch_var_, this->spec_.eps, dx, gamma_.grad, beta_.grad);
  else
    parallel::batchnorm_train_backward(dy, xhat_, gamma_.value, batch_var_, this->spec_.eps, dx, gamma_.grad,
                                       beta_.grad, ctx.threads);
  return dx;
}

template <typename T>
void BatchNorm<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&gamma_);
  out.push_back(&beta_);
}

template <typename T>
void BatchNorm<T>::collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) {
  out.emplace_back(param_name(this->ordinal_, this->spec_, "running_mean"), &running_mean_);
  out.emplace_back(param_name(this->ordinal_, this->spec_, "running_var"), &running_var_);
}

// ---- ReLU / SELU ----

template <typename T>
Tensor<T> Relu<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<long>(x.size());
#pragma omp parallel for simd schedule(static) num_threads(team(ctx))
  for (long i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] > T{0} ? x[static_cast<std::size_t>(i)] : T{0};
  cached_ = ctx.mode == Mode::train;
  if (cached_) input_ = x;
  return y;
}

template <typename T>
Tensor<T> Relu<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  if (dy.shape() != input_.shape()) throw std::invalid_argument("relu backward: gradient shape");
  Tensor<T> dx(dy.shape());
  const auto n = static_cast<long>(dy.size());
#pragma omp parallel for simd schedule(static) num_threads(team(ctx))
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    dx[k] = input_[k] > T{0} ? dy[k] : T{0};
  }
  return dx;
}

template <typename T>
Tensor<T> Selu<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  Tensor<T> y(x.shape());
  const auto n = static_cast<long>(x.size());
  const T lambda = static_cast<T>(kSeluLambda), la = static_cast<T>(kSeluLambda * kSeluAlpha);
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const T v = x[k];
    y[k] = v > T{0} ? lambda * v : la * std::expm1(v);
  }
  cached_ = ctx.mode == Mode::train;
  if (cached_) input_ = x;
  return y;
}

template <typename T>
Tensor<T> Selu<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  if (dy.shape() != input_.shape()) throw std::invalid_argument("selu backward: gradient shape");
  Tensor<T> dx(dy.shape());
  const auto n = static_cast<long>(dy.size());
  const T lambda = static_cast<T>(kSeluLambda), la = static_cast<T>(kSeluLambda * kSeluAlpha);
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    const T v = input_[k];
    dx[k] = dy[k] * (v > T{0} ? lambda : la * std::exp(v));
  }
  return dx;
}

// ---- Dropout ----

template <typename T>
Dropout<T>::Dropout(const LayerSpec& spec, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {
  if (!(spec.rate >= 0.0 && spec.rate < 1.0)) throw std::invalid_argument("dropout rate must lie in [0, 1)");
}

template <typename T>
Tensor<T> Dropout<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  const double p = this->spec_.rate;
  cached_ = ctx.mode == Mode::train;
  if (ctx.mode == Mode::infer || p == 0.0) {
    mask_ = Tensor<T>();
    return x;
  }
  mask_ = Tensor<T>(x.shape());
  Tensor<T> y(x.shape());
  const std::size_t n = x.dim(0), per = x.size() / n;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long sl = 0; sl < static_cast<long>(n); ++sl) {
    const auto s = static_cast<std::size_t>(sl);
    Rng rng(derive_seed(ctx.dropout_seed, {ctx.step, this->ordinal_, s}));
    for (std::size_t j = 0; j < per; ++j) {
      const std::size_t k = s * per + j;
      mask_[k] = uniform01(rng) < p ? T{0} : keep_scale;
      y[k] = x[k] * mask_[k];
    }
  }
  return y;
}

template <typename T>
Tensor<T> Dropout<T>::backward(const Tensor<T>& dy, const ExecContext& /*ctx*/) {
  this->require_cache(cached_);
  if (mask_.empty()) return dy;
  if (dy.shape() != mask_.shape()) throw std::invalid_argument("dropout backward: gradient shape");
  Tensor<T> dx(dy.shape());
  for (std::size_t k = 0; k < dy.size(); ++k) dx[k] = dy[k] * mask_[k];
  return dx;
}

// ---- Pooling ----

template <typename T>
Tensor<T> MaxPool<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  if (x.rank() != 3) throw std::invalid_argument("max pool expects [N, C, L]");
  if (x.dim(2) % 2 != 0) throw std::invalid_argument("max pool needs an even length, got " + std::to_string(x.dim(2)));
  const std::size_t rows = x.dim(0) * x.dim(1), half = x.dim(2) / 2;
  Tensor<T> y({x.dim(0), x.dim(1), half});
  const bool train = ctx.mode == Mode::train;
  if (train) second_.assign(y.size(), 0);
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long rl = 0; rl < static_cast<long>(rows); ++rl) {
    const auto r = static_cast<std::size_t>(rl);
    const T* in = x.data() + r * 2 * half;
    for (std::size_t t = 0; t < half; ++t) {
      const bool second = in[2 * t + 1] > in[2 * t];
      y[r * half + t] = second ? in[2 * t + 1] : in[2 * t];
      if (train) second_[r * half + t] = second;
    }
  }
  cached_ = train;
  input_shape_ = x.shape();
  return y;
}

template <typename T>
Tensor<T> MaxPool<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  if (dy.size() != second_.size()) throw std::invalid_argument("max pool backward: gradient shape");
  Tensor<T> dx(input_shape_);
  const auto n = static_cast<long>(dy.size());
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long il = 0; il < n; ++il) {
    const auto i = static_cast<std::size_t>(il);
    dx[2 * i + second_[i]] = dy[i];
  }
  return dx;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  if (x.rank() != 3) throw std::invalid_argument("global average pool expects [N, C, L]");
  const std::size_t rows = x.dim(0) * x.dim(1), len = x.dim(2);
  Tensor<T> y({x.dim(0), x.dim(1)});
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long rl = 0; rl < static_cast<long>(rows); ++rl) {
    const auto r = static_cast<std::size_t>(rl);
    T acc{};
    for (std::size_t t = 0; t < len; ++t) acc += x[r * len + t];
    y[r] = acc / static_cast<T>(len);
  }
  cached_ = ctx.mode == Mode::train;
  input_shape_ = x.shape();
  return y;
}

template <typename T>
Tensor<T> GlobalAvgPool<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  const std::size_t rows = input_shape_[0] * input_shape_[1], len = input_shape_[2];
  if (dy.size() != rows) throw std::invalid_argument("global average pool backward: gradient shape");
  Tensor<T> dx(input_shape_);
  const T inv = T{1} / static_cast<T>(len);
#pragma omp parallel for schedule(static) num_threads(team(ctx))
  for (long rl = 0; rl < static_cast<long>(rows); ++rl) {
    const auto r = static_cast<std::size_t>(rl);
    for (std::size_t t = 0; t < len; ++t) dx[r * len + t] = dy[r] * inv;
  }
  return dx;
}

// ---- Dense ----

template <typename T>
Dense<T>::Dense(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal, Rng& init) : Layer<T>(spec, ordinal) {
  output_shape(spec, in);
  const std::size_t fan_in = shape_size(in);
  weight_ = {param_name(ordinal, spec, "weight"), Tensor<T>({spec.units, fan_in}), {}};
  bias_ = {param_name(ordinal, spec, "bias"), Tensor<T>({spec.units}), {}};
  he_uniform(weight_.value, fan_in, init);
}

template <typename T>
Tensor<T> Dense<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  Tensor<T> y;
  if (ctx.kernels == KernelPath::serial)
    serial::dense_forward(x, weight_.value, bias_.value, y);
  else
    parallel::dense_forward(x, weight_.value, bias_.value, y, ctx.threads);
  cached_ = ctx.mode == Mode::train;
  if (cached_) input_ = x;
  return y;
}

template <typename T>
Tensor<T> Dense<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  this->require_cache(cached_);
  Tensor<T> dx;
  if (ctx.kernels == KernelPath::serial)
    serial::dense_backward(input_, weight_.value, dy, dx, weight_.grad, bias_.grad);
  else
    parallel::dense_backward(input_, weight_.value, dy, dx, weight_.grad, bias_.grad, ctx.threads);
  return dx;
}

template <typename T>
void Dense<T>::collect_params(std::vector<Param<T>*>& out) {
  out.push_back(&weight_);
  out.push_back(&bias_);
}

// ---- Residual ----

template <typename T>
Residual<T>::Residual(const LayerSpec& spec, const Shape& in, std::uint64_t& ordinal, std::uint64_t init_seed)
    : Layer<T>(spec, ordinal) {
  output_shape(spec, in);
  Shape cur = in;
  for (const auto& s : spec.body) {
    ++ordinal;
    body_.push_back(make_layer<T>(s, cur, ordinal, init_seed));
    cur = output_shape(s, cur);
  }
}

template <typename T>
Tensor<T> Residual<T>::forward(const Tensor<T>& x, const ExecContext& ctx) {
  Tensor<T> y = x;
  for (auto& l : body_) y = l->forward(y, ctx);
  if (y.shape() != x.shape()) throw std::logic_error("residual branch changed the shape");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

template <typename T>
Tensor<T> Residual<T>::backward(const Tensor<T>& dy, const ExecContext& ctx) {
  Tensor<T> g = dy;
  for (auto it = body_.rbegin(); it != body_.rend(); ++it) g = (*it)->backward(g, ctx);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += dy[i];
  return g;
}

template <typename T>
void Residual<T>::collect_params(std::vector<Param<T>*>& out) {
  for (auto& l : body_) l->collect_params(out);
}

template <typename T>
void Residual<T>::collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) {
  for (auto& l : body_) l->collect_buffers(out);
}

// ---- factory ----

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& in, std::uint64_t& ordinal,
                                     std::uint64_t init_seed) {
  Rng init(derive_seed(init_seed, {ordinal}));
  switch (spec.kind) {
    case LayerKind::conv1d: return std::make_unique<Conv1d<T>>(spec, in, ordinal, init);
    case LayerKind::batch_norm: return std::make_unique<BatchNorm<T>>(spec, in, ordinal);
    case LayerKind::relu: return std::make_unique<Relu<T>>(spec, ordinal);
    case LayerKind::selu: return std::make_unique<Selu<T>>(spec, ordinal);
    case LayerKind::dropout: return std::make_unique<Dropout<T>>(spec, ordinal);
    case LayerKind::max_pool: return std::make_unique<MaxPool<T>>(spec, ordinal);
    case LayerKind::global_avg_pool: return std::make_unique<GlobalAvgPool<T>>(spec, ordinal);
    case LayerKind::dense: return std::make_unique<Dense<T>>(spec, in, ordinal, init);
    case LayerKind::residual: return std::make_unique<Residual<T>>(spec, in, ordinal, init_seed);
    case LayerKind::softmax: break;
  }
  throw std::invalid_argument("no runtime layer for " + describe(spec));
}

#define IQSHIFT_INSTANTIATE(T)                                                                          \
  template class Layer<T>;                                                                             \
  template class Conv1d<T>;                                                                            \
  template class BatchNorm<T>;                                                                         \
  template class Relu<T>;                                                                              \
  template class Selu<T>;                                                                              \
  template class Dropout<T>;                                                                           \
  template class MaxPool<T>;                                                                           \
  template class GlobalAvgPool<T>;                                                                     \
  template class Dense<T>;                                                                             \
  template class Residual<T>;                                                                          \
  template std::unique_ptr<Layer<T>> make_layer<T>(const LayerSpec&, const Shape&, std::uint64_t&,     \
                                                   std::uint64_t);

IQSHIFT_INSTANTIATE(float)
IQSHIFT_INSTANTIATE(double)
#undef IQSHIFT_INSTANTIATE

}  // namespace iqshift::nn
