// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "iqshift/nn/layers.hpp"
#include "iqshift/nn/sgdm.hpp"

using namespace iqshift::nn;

TEST_CASE("momentum recurrence on a hand-worked example") {
  Param<double> p{"w", Tensor<double>({2}), Tensor<double>({2})};
  p.value[0] = 1.0;
  p.value[1] = -2.0;
  Sgdm<double> opt({0.1, 0.9});
  p.grad[0] = 1.0;
  p.grad[1] = -4.0;
  opt.step({&p});
  CHECK(opt.velocities()[0][0] == doctest::Approx(-0.1));
  CHECK(p.value[0] == doctest::Approx(0.9));
  CHECK(p.value[1] == doctest::Approx(-1.6));
  opt.step({&p});
  CHECK(opt.velocities()[0][0] == doctest::Approx(-0.19));
  CHECK(p.value[0] == doctest::Approx(0.71));
  CHECK(p.value[1] == doctest::Approx(-1.6 + 0.76));
}

TEST_CASE("zero momentum is plain gradient descent") {
  Param<double> p{"w", Tensor<double>({1}, 3.0), Tensor<double>({1}, 2.0)};
  Sgdm<double> opt({0.25, 0.0});
  for (int i = 0; i < 3; ++i) opt.step({&p});
  CHECK(p.value[0] == doctest::Approx(1.5));
}

TEST_CASE("quadratic converges") {
  Param<double> p{"w", Tensor<double>({1}, 5.0), Tensor<double>({1})};
  Sgdm<double> opt({0.01, 0.9});
  for (int i = 0; i < 2000; ++i) {
    p.grad[0] = 2.0 * (p.value[0] - 1.0);
    opt.step({&p});
  }
  CHECK(p.value[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("invalid settings and mismatched state") {
  CHECK_THROWS_AS(Sgdm<float>({0.1, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(Sgdm<float>({-0.1, 0.5}), std::invalid_argument);
  Param<float> a{"a", Tensor<float>({2}), Tensor<float>({2})};
  Param<float> b{"b", Tensor<float>({3}), Tensor<float>({3})};
  Sgdm<float> opt({0.1, 0.9});
  opt.step({&a});
  CHECK_THROWS_AS(opt.step({&a, &b}), std::invalid_argument);
  CHECK_THROWS_AS(opt.step({&b}), std::invalid_argument);
}
