// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iqshift/nn/layers.hpp"
#include "iqshift/nn/loss.hpp"
#include "iqshift/nn/network.hpp"
#include "iqshift/selftest.hpp"
#include "support/test_support.hpp"

using namespace iqshift::nn;
using testsupport::random_tensor;

namespace {

constexpr double kTol = 1e-4;

// loss = sum(r * layer(x)); compares backward(r) with central differences for
// the input and every parameter.
double worst_layer_error(const LayerSpec& spec, const Shape& sample, std::size_t batch, KernelPath path,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uint64_t ordinal = 0;
  auto layer = make_layer<double>(spec, sample, ordinal, seed);
  Shape xs{batch};
  xs.insert(xs.end(), sample.begin(), sample.end());
  auto x = random_tensor<double>(xs, rng);
  ExecContext ctx;
  ctx.mode = Mode::train;
  ctx.kernels = path;
  ctx.threads = 2;
  ctx.dropout_seed = seed;
  const auto y0 = layer->forward(x, ctx);
  const auto r = random_tensor<double>(y0.shape(), rng);

  auto loss = [&] {
    const auto y = layer->forward(x, ctx);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += r[i] * y[i];
    return s;
  };
  layer->forward(x, ctx);
  const auto dx = layer->backward(r, ctx);
  std::vector<Param<double>*> params;
  layer->collect_params(params);
  std::vector<std::vector<double>> analytic{testsupport::flat(dx)};
  for (auto* p : params) analytic.push_back(testsupport::flat(p->grad));

  std::vector<std::vector<double*>> vars(1);
  for (auto& v : x.values()) vars[0].push_back(&v);
  for (auto* p : params) {
    vars.emplace_back();
    for (auto& v : p->value.values()) vars.back().push_back(&v);
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < vars.size(); ++t) {
    const auto numeric = testsupport::numeric_gradient(loss, vars[t], 1e-5);
    worst = std::max(worst, testsupport::norm_rel_error(analytic[t], numeric));
  }
  return worst;
}

}  // namespace

TEST_CASE("layer gradients agree with central differences") {
  struct Case {
    const char* name;
    LayerSpec spec;
    Shape sample;
  };
  const std::vector<Case> cases{
      {"conv", LayerSpec::conv(3, 5), {2, 12}},
      {"conv k23", LayerSpec::conv(2, 23), {2, 10}},
      {"conv 1x1", LayerSpec::conv(4, 1), {3, 6}},
      {"batch norm", LayerSpec::batch_norm(), {3, 7}},
      {"relu", LayerSpec::relu(), {2, 9}},
      {"selu", LayerSpec::selu(), {2, 9}},
      {"dropout", LayerSpec::dropout(0.4), {2, 9}},
      {"max pool", LayerSpec::max_pool(), {2, 10}},
      {"average pool", LayerSpec::global_avg_pool(), {3, 8}},
      {"dense", LayerSpec::dense(5), {2, 6}},
      {"residual", LayerSpec::residual({LayerSpec::conv(2, 3), LayerSpec::batch_norm(), LayerSpec::relu(),
                                        LayerSpec::conv(2, 3), LayerSpec::batch_norm(), LayerSpec::relu()}),
       {2, 8}},
  };
  for (const auto& c : cases)
    for (auto path : {KernelPath::serial, KernelPath::parallel})
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        INFO(c.name << " path " << static_cast<int>(path) << " seed " << seed);
        CHECK(worst_layer_error(c.spec, c.sample, 3, path, seed) < kTol);
      }
}

TEST_CASE("softmax cross-entropy gradient") {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 10; ++rep) {
    auto logits = random_tensor<double>({4, 5}, rng, -3.0, 3.0);
    const std::vector<int> labels{0, 4, 2, 2};
    const auto res = softmax_xent(logits, labels);
    std::vector<double*> vars;
    for (auto& v : logits.values()) vars.push_back(&v);
    const auto numeric = testsupport::numeric_gradient([&] { return softmax_xent(logits, labels).loss; }, vars);
    CHECK(testsupport::norm_rel_error(testsupport::flat(res.grad), numeric) < kTol);
  }
}

TEST_CASE("whole-network gradient") {
  const std::vector<LayerSpec> specs{LayerSpec::conv(3, 5), LayerSpec::batch_norm(), LayerSpec::relu(),
                                     LayerSpec::max_pool(), LayerSpec::conv(4, 3), LayerSpec::selu(),
                                     LayerSpec::global_avg_pool(), LayerSpec::dense(3), LayerSpec::softmax()};
  Network<double> net(specs, {2, 16}, 5);
  std::mt19937_64 rng(12);
  auto x = random_tensor<double>({4, 2, 16}, rng);
  const std::vector<int> labels{0, 1, 2, 1};
  ExecContext ctx;
  ctx.mode = Mode::train;
  auto loss = [&] { return softmax_xent(net.forward(x, ctx), labels).loss; };
  const auto res = softmax_xent(net.forward(x, ctx), labels);
  net.backward(res.grad, ctx);
  for (auto* p : net.params()) {
    const auto analytic = testsupport::flat(p->grad);
    std::vector<double*> vars;
    for (auto& v : p->value.values()) vars.push_back(&v);
    INFO(p->name);
    CHECK(testsupport::norm_rel_error(analytic, testsupport::numeric_gradient(loss, vars)) < kTol);
  }
}

TEST_CASE("library gradient self-check passes") {
  const auto results = iqshift::selftest::gradient_suite();
  CHECK(!results.empty());
  for (const auto& r : results) {
    INFO(r.name << " " << r.value << " " << r.detail);
    CHECK(r.passed);
    CHECK(r.value < 1e-4);
  }
}
