// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "iqshift/common/rng.hpp"
#include "iqshift/nn/kernels.hpp"
#include "iqshift/nn/spec.hpp"
#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn {

enum class Mode { train, infer };

/// Per-call execution settings handed down through the layers.
struct ExecContext {
  Mode mode = Mode::infer;
  KernelPath kernels = KernelPath::parallel;
  int threads = 0;  // 0: OpenMP default
  std::uint64_t dropout_seed = 0;
  std::uint64_t step = 0;  // dropout masks are keyed by (seed, step, layer, sample)
};

inline constexpr double kSeluLambda = 1.05070098735548;
inline constexpr double kSeluAlpha = 1.67326324235437;

template <typename T>
struct Param {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
};

template <typename T>
class Layer {
 public:
  virtual ~Layer() = default;

  /// Input is [N, ...per-sample shape...]. Training-mode calls cache what
  /// backward needs.
  virtual Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) = 0;
  /// Returns the gradient with respect to the last forward input and
  /// overwrites parameter gradients. Throws std::logic_error without a cache.
  virtual Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) = 0;

  virtual void collect_params(std::vector<Param<T>*>& /*out*/) {}
  /// Non-trainable state that checkpoints must carry (running statistics).
  virtual void collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& /*out*/) {}

  const LayerSpec& spec() const { return spec_; }

 protected:
  Layer(LayerSpec spec, std::uint64_t ordinal) : spec_(std::move(spec)), ordinal_(ordinal) {}
  void require_cache(bool present) const;

  LayerSpec spec_;
  std::uint64_t ordinal_;
};

template <typename T>
class Conv1d final : public Layer<T> {
 public:
  Conv1d(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal, Rng& init);
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;
  void collect_params(std::vector<Param<T>*>& out) override;

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Param<T> weight_, bias_;
  Tensor<T> input_;
  bool cached_ = false;
};

template <typename T>
class BatchNorm final : public Layer<T> {
 public:
  BatchNorm(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal);
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;
  void collect_params(std::vector<Param<T>*>& out) override;
  void collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) override;

  Param<T>& gamma() { return gamma_; }
  Param<T>& beta() { return beta_; }
  Tensor<T>& running_mean() { return running_mean_; }
  Tensor<T>& running_var() { return running_var_; }

 private:
  Param<T> gamma_, beta_;
  Tensor<T> running_mean_, running_var_;
  Tensor<T> xhat_;
  std::vector<double> batch_var_;
  Mode cached_mode_ = Mode::train;
  bool cached_ = false;
};

template <typename T>
class Relu final : public Layer<T> {
 public:
  Relu(const LayerSpec& spec, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {}
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;

 private:
  Tensor<T> input_;
  bool cached_ = false;
};

template <typename T>
class Selu final : public Layer<T> {
 public:
  Selu(const LayerSpec& spec, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {}
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;

 private:
  Tensor<T> input_;
  bool cached_ = false;
};

/// Inverted dropout: kept units are scaled by 1 / (1 - p) during training,
/// so inference is the identity.
template <typename T>
class Dropout final : public Layer<T> {
 public:
  Dropout(const LayerSpec& spec, std::uint64_t ordinal);
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;

 private:
  Tensor<T> mask_;  // empty when the last forward was an identity
  bool cached_ = false;
};

/// Width 2, stride 2. Backward routes each gradient to the first maximum.
template <typename T>
class MaxPool final : public Layer<T> {
 public:
  MaxPool(const LayerSpec& spec, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {}
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;

 private:
  Shape input_shape_;
  std::vector<std::uint8_t> second_;  // 1 where the window's second element won
  bool cached_ = false;
};

template <typename T>
class GlobalAvgPool final : public Layer<T> {
 public:
  GlobalAvgPool(const LayerSpec& spec, std::uint64_t ordinal) : Layer<T>(spec, ordinal) {}
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;

 private:
  Shape input_shape_;
  bool cached_ = false;
};

/// Affine map over the flattened per-sample input.
template <typename T>
class Dense final : public Layer<T> {
 public:
  Dense(const LayerSpec& spec, const Shape& in, std::uint64_t ordinal, Rng& init);
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;
  void collect_params(std::vector<Param<T>*>& out) override;

  Param<T>& weight() { return weight_; }
  Param<T>& bias() { return bias_; }

 private:
  Param<T> weight_, bias_;
  Tensor<T> input_;
  bool cached_ = false;
};

/// y = x + body(x).
template <typename T>
class Residual final : public Layer<T> {
 public:
  Residual(const LayerSpec& spec, const Shape& in, std::uint64_t& ordinal, std::uint64_t init_seed);
  Tensor<T> forward(const Tensor<T>& x, const ExecContext& ctx) override;
  Tensor<T> backward(const Tensor<T>& dy, const ExecContext& ctx) override;
  void collect_params(std::vector<Param<T>*>& out) override;
  void collect_buffers(std::vector<std::pair<std::string, Tensor<T>*>>& out) override;

  std::vector<std::unique_ptr<Layer<T>>>& body() { return body_; }

 private:
  std::vector<std::unique_ptr<Layer<T>>> body_;
};

/// Builds the runtime layer for `spec`. `ordinal` numbers layers in
/// declaration order (depth first) and is advanced past nested layers;
/// weight initialization draws from a stream keyed by (init_seed, ordinal).
template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec, const Shape& in, std::uint64_t& ordinal,
                                     std::uint64_t init_seed);

}  // namespace iqshift::nn
