// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iqshift/nn/layers.hpp"
#include "iqshift/nn/loss.hpp"
#include "iqshift/nn/network.hpp"
#include "support/test_support.hpp"

using namespace iqshift::nn;
using testsupport::random_tensor;

namespace {

template <typename T = double>
std::unique_ptr<Layer<T>> build(const LayerSpec& spec, const Shape& in, std::uint64_t seed = 1) {
  std::uint64_t ordinal = 0;
  return make_layer<T>(spec, in, ordinal, seed);
}

ExecContext train_ctx() {
  ExecContext c;
  c.mode = Mode::train;
  c.dropout_seed = 99;
  return c;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor<float> t({2, 3, 4}, 1.5f);
  CHECK(t.size() == 24);
  CHECK(t.sample_shape() == Shape{3, 4});
  CHECK(shape_string(t.shape()) == "2x3x4");
  CHECK(shape_string({7}) == "7");
  t.reshape({6, 4});
  CHECK(t.dim(0) == 6);
  CHECK_THROWS_AS(t.reshape({5, 5}), std::invalid_argument);
  CHECK_THROWS_AS(Tensor<float>({2, 0}), std::invalid_argument);
  const auto d = tensor_cast<double>(t);
  CHECK(d[3] == 1.5);
}

TEST_CASE("shape inference") {
  CHECK(output_shape(LayerSpec::conv(32, 23), {2, 1024}) == Shape{32, 1024});
  CHECK(output_shape(LayerSpec::max_pool(), {32, 1024}) == Shape{32, 512});
  CHECK(output_shape(LayerSpec::global_avg_pool(), {96, 32}) == Shape{96});
  CHECK(output_shape(LayerSpec::dense(10), {4, 8}) == Shape{10});
  CHECK_THROWS_AS(output_shape(LayerSpec::max_pool(), {32, 7}), std::invalid_argument);
  CHECK_THROWS_AS(output_shape(LayerSpec::residual({LayerSpec::conv(8, 3)}), {4, 16}), std::invalid_argument);
  CHECK_THROWS_AS(output_shape(LayerSpec::conv(4, 4), {2, 16}), std::invalid_argument);
  CHECK(param_count(LayerSpec::conv(32, 23), {2, 1024}) == 32 * 2 * 23 + 32);
  CHECK(param_count(LayerSpec::batch_norm(), {32, 1024}) == 64);
  CHECK(param_count(LayerSpec::dense(128), {32, 16}) == 512 * 128 + 128);
  CHECK(param_count(LayerSpec::relu(), {32, 16}) == 0);
}

TEST_CASE("batch norm uses batch statistics in training and running statistics at inference") {
  auto bn = build(LayerSpec::batch_norm(), {2, 5});
  auto& layer = dynamic_cast<BatchNorm<double>&>(*bn);
  std::mt19937_64 rng(1);
  const auto x = random_tensor<double>({4, 2, 5}, rng, 1.0, 3.0);
  double mean0 = 0.0, sq0 = 0.0;
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 5; ++t) mean0 += x[s * 10 + t];
  mean0 /= 20.0;
  for (std::size_t s = 0; s < 4; ++s)
    for (std::size_t t = 0; t < 5; ++t) sq0 += std::pow(x[s * 10 + t] - mean0, 2);
  bn->forward(x, train_ctx());
  CHECK(layer.running_mean()[0] == doctest::Approx(0.1 * mean0).epsilon(1e-12));
  CHECK(layer.running_var()[0] == doctest::Approx(0.9 + 0.1 * sq0 / 19.0).epsilon(1e-12));

  layer.running_mean()[0] = 2.0;
  layer.running_var()[0] = 4.0 - 1e-5;
  layer.gamma().value[0] = 3.0;
  layer.beta().value[0] = -1.0;
  ExecContext infer;
  const auto y = bn->forward(x, infer);
  CHECK(y[0] == doctest::Approx(3.0 * (x[0] - 2.0) / 2.0 - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(bn->backward(y, infer), std::logic_error);
  CHECK_THROWS_AS(bn->forward(Tensor<double>({1, 2, 1}), train_ctx()), std::invalid_argument);
}

TEST_CASE("selu and relu values") {
  auto selu = build(LayerSpec::selu(), {1, 4});
  Tensor<double> x({1, 1, 4});
  x[0] = 1.0;
  x[1] = 0.0;
  x[2] = -1.0;
  x[3] = -50.0;
  const auto y = selu->forward(x, ExecContext{});
  CHECK(y[0] == doctest::Approx(kSeluLambda));
  CHECK(y[1] == 0.0);
  CHECK(y[2] == doctest::Approx(kSeluLambda * kSeluAlpha * (std::exp(-1.0) - 1.0)));
  CHECK(y[3] == doctest::Approx(-kSeluLambda * kSeluAlpha));
  CHECK(kSeluLambda == doctest::Approx(1.0507).epsilon(1e-4));
  CHECK(kSeluAlpha == doctest::Approx(1.6733).epsilon(1e-4));
  auto relu = build(LayerSpec::relu(), {1, 4});
  const auto r = relu->forward(x, ExecContext{});
  CHECK(r[0] == 1.0);
  CHECK(r[2] == 0.0);
}

TEST_CASE("dropout") {
  std::mt19937_64 rng(2);
  const auto x = random_tensor<double>({16, 4, 64}, rng, 0.5, 1.5);
  auto zero = build(LayerSpec::dropout(0.0), {4, 64});
  CHECK(zero->forward(x, train_ctx()) == x);
  auto drop = build(LayerSpec::dropout(0.5), {4, 64});
  CHECK(drop->forward(x, ExecContext{}) == x);
  const auto y = drop->forward(x, train_ctx());
  std::size_t dropped = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] == 0.0)
      ++dropped;
    else
      CHECK(y[i] == doctest::Approx(2.0 * x[i]));
  }
  const double frac = static_cast<double>(dropped) / x.size();
  CHECK(frac > 0.45);
  CHECK(frac < 0.55);
  CHECK(drop->forward(x, train_ctx()) == y);  // same seed and step
  auto other = train_ctx();
  other.step = 1;
  CHECK(drop->forward(x, other) != y);
  drop->forward(x, train_ctx());
  const auto dx = drop->backward(Tensor<double>(x.shape(), 1.0), train_ctx());
  for (std::size_t i = 0; i < x.size(); ++i) CHECK(dx[i] == (y[i] == 0.0 ? 0.0 : 2.0));
  CHECK_THROWS_AS(build(LayerSpec::dropout(1.0), {4, 64}), std::invalid_argument);
}

TEST_CASE("max pool picks maxima, routes ties to the first element and rejects odd lengths") {
  auto pool = build(LayerSpec::max_pool(), {1, 6});
  Tensor<double> x({1, 1, 6});
  const double v[] = {1.0, 3.0, 2.0, 2.0, -1.0, -4.0};
  for (int i = 0; i < 6; ++i) x[i] = v[i];
  const auto y = pool->forward(x, train_ctx());
  CHECK(y.shape() == Shape{1, 1, 3});
  CHECK(y[0] == 3.0);
  CHECK(y[1] == 2.0);
  CHECK(y[2] == -1.0);
  Tensor<double> dy({1, 1, 3});
  dy[0] = 10;
  dy[1] = 20;
  dy[2] = 30;
  const auto dx = pool->backward(dy, train_ctx());
  const double want[] = {0, 10, 20, 0, 30, 0};
  for (int i = 0; i < 6; ++i) CHECK(dx[i] == want[i]);
  CHECK_THROWS_AS(pool->forward(Tensor<double>({1, 1, 5}), train_ctx()), std::invalid_argument);
}

TEST_CASE("global average pool") {
  auto gap = build(LayerSpec::global_avg_pool(), {2, 4});
  Tensor<double> x({1, 2, 4});
  for (int i = 0; i < 8; ++i) x[i] = i;
  const auto y = gap->forward(x, train_ctx());
  CHECK(y.shape() == Shape{1, 2});
  CHECK(y[0] == 1.5);
  CHECK(y[1] == 5.5);
  const auto dx = gap->backward(Tensor<double>({1, 2}, 4.0), train_ctx());
  for (int i = 0; i < 8; ++i) CHECK(dx[i] == 1.0);
}

TEST_CASE("backward without a training forward throws") {
  std::mt19937_64 rng(3);
  for (const LayerSpec& spec : {LayerSpec::conv(2, 3), LayerSpec::relu(), LayerSpec::selu(), LayerSpec::dropout(0.3),
                                LayerSpec::max_pool(), LayerSpec::global_avg_pool(), LayerSpec::dense(3)}) {
    auto layer = build(spec, {2, 8});
    const auto x = random_tensor<double>({2, 2, 8}, rng);
    CHECK_THROWS_AS(layer->backward(x, train_ctx()), std::logic_error);
    const auto y = layer->forward(x, ExecContext{});
    CHECK_THROWS_AS(layer->backward(y, train_ctx()), std::logic_error);
  }
}

TEST_CASE("initialization is keyed by seed and ordinal") {
  auto a = build<float>(LayerSpec::conv(4, 5), {2, 8}, 7);
  auto b = build<float>(LayerSpec::conv(4, 5), {2, 8}, 7);
  auto c = build<float>(LayerSpec::conv(4, 5), {2, 8}, 8);
  auto& wa = dynamic_cast<Conv1d<float>&>(*a).weight().value;
  CHECK(wa == dynamic_cast<Conv1d<float>&>(*b).weight().value);
  CHECK(wa != dynamic_cast<Conv1d<float>&>(*c).weight().value);
  const double bound = std::sqrt(6.0 / 10.0);
  for (float w : wa.values()) CHECK(std::abs(w) <= bound);
}

TEST_CASE("network output shapes and probabilities") {
  const std::vector<LayerSpec> specs{LayerSpec::conv(4, 5), LayerSpec::batch_norm(), LayerSpec::relu(),
                                     LayerSpec::max_pool(), LayerSpec::global_avg_pool(), LayerSpec::dense(3),
                                     LayerSpec::softmax()};
  Network<float> net(specs, {2, 16}, 3);
  CHECK(net.output_shape() == Shape{3});
  CHECK(net.param_count() == (4 * 2 * 5 + 4) + 8 + (4 * 3 + 3));
  std::mt19937_64 rng(4);
  const auto x = random_tensor<float>({5, 2, 16}, rng);
  const auto logits = net.forward(x, ExecContext{});
  CHECK(logits.shape() == Shape{5, 3});
  const auto p = net.probabilities(x, ExecContext{});
  for (std::size_t s = 0; s < 5; ++s) {
    double sum = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(p[s * 3 + c] > 0.0f);
      sum += p[s * 3 + c];
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-6));
  }
  CHECK_THROWS_AS(net.forward(random_tensor<float>({5, 2, 8}, rng), ExecContext{}), std::invalid_argument);
  CHECK_THROWS_AS(Network<float>({LayerSpec::softmax(), LayerSpec::dense(2)}, {4}, 1), std::invalid_argument);
  CHECK(net.state().size() == net.params().size() + 2);
}

TEST_CASE("softmax is stable for large logits") {
  Tensor<double> z({1, 3});
  z[0] = 1000.0;
  z[1] = 1000.0;
  z[2] = -1000.0;
  const auto p = softmax_rows(z);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[2] == 0.0);
}

TEST_CASE("cross-entropy values and label checks") {
  Tensor<double> z({2, 4});
  const std::vector<int> labels{1, 3};
  const auto r = softmax_xent(z, labels);
  CHECK(r.loss == doctest::Approx(std::log(4.0)));
  CHECK(r.grad[1] == doctest::Approx((0.25 - 1.0) / 2.0));
  CHECK(r.grad[0] == doctest::Approx(0.25 / 2.0));
  CHECK_THROWS_AS(softmax_xent(z, std::vector<int>{1, 4}), std::invalid_argument);
  CHECK_THROWS_AS(softmax_xent(z, std::vector<int>{1}), std::invalid_argument);
}
