// SPDX-License-Identifier: Apache-2.0
#include <stdexcept>
#include <string>

#include "iqshift/zoo/model_graph.hpp"

namespace iqshift::zoo {

using nn::LayerSpec;

namespace {

void check_classes(std::size_t n) {
  if (n < 2) throw std::invalid_argument("a classifier needs at least 2 classes, got " + std::to_string(n));
}

std::vector<siggen::Modulation> default_classes(std::size_t n) {
  std::vector<siggen::Modulation> out;
  for (std::size_t i = 0; i < n && i < siggen::kAllModulations.size(); ++i) out.push_back(siggen::kAllModulations[i]);
  return out;
}

}  // namespace

std::vector<LayerSpec> residual_unit_body(std::size_t channels, std::size_t kernel) {
  return {LayerSpec::conv(channels, kernel), LayerSpec::batch_norm(), LayerSpec::relu(),
          LayerSpec::conv(channels, kernel), LayerSpec::batch_norm(), LayerSpec::relu()};
}

ModelGraph build_resnet(std::size_t num_classes) {
  check_classes(num_classes);
  ModelGraph g;
  g.kind = ModelKind::resnet;
  g.num_classes = num_classes;
  g.classes = default_classes(num_classes);
  for (int stack = 1; stack <= 6; ++stack) {
    const std::string tag = "Residual Stack#" + std::to_string(stack);
    g.layers.push_back(LayerSpec::conv(32, 1).in_group(tag));
    g.layers.push_back(LayerSpec::batch_norm().in_group(tag));
    g.layers.push_back(LayerSpec::relu().in_group(tag));
    g.layers.push_back(LayerSpec::residual(residual_unit_body()).in_group(tag));
    g.layers.push_back(LayerSpec::residual(residual_unit_body()).in_group(tag));
    g.layers.push_back(LayerSpec::max_pool().in_group(tag));
  }
  for (int block = 1; block <= 2; ++block) {
    const std::string tag = "Drop(50%)/FC/SELU#" + std::to_string(block);
    g.layers.push_back(LayerSpec::dropout(0.5).in_group(tag));
    g.layers.push_back(LayerSpec::dense(128).in_group(tag));
    g.layers.push_back(LayerSpec::selu().in_group(tag));
  }
  const std::string head = "Drop(50%)/FC/SoftMax";
  g.layers.push_back(LayerSpec::dropout(0.5).in_group(head));
  g.layers.push_back(LayerSpec::dense(num_classes).in_group(head));
  g.layers.push_back(LayerSpec::softmax().in_group(head));
  return g;
}

ModelGraph build_cnn(std::size_t num_classes) {
  check_classes(num_classes);
  ModelGraph g;
  g.kind = ModelKind::cnn;
  g.num_classes = num_classes;
  g.classes = default_classes(num_classes);
  const std::size_t channels[] = {16, 24, 32, 48, 64, 96};
  for (std::size_t i = 0; i < 6; ++i) {
    g.layers.push_back(LayerSpec::conv(channels[i]));
    g.layers.push_back(LayerSpec::batch_norm());
    g.layers.push_back(LayerSpec::relu());
    g.layers.push_back(i < 5 ? LayerSpec::max_pool() : LayerSpec::global_avg_pool());
  }
  const std::string head = "Drop(0%)/FC/SoftMax";
  g.layers.push_back(LayerSpec::dropout(0.0).in_group(head));
  g.layers.push_back(LayerSpec::dense(num_classes).in_group(head));
  g.layers.push_back(LayerSpec::softmax().in_group(head));
  return g;
}

ModelGraph build_resnet(const std::vector<siggen::Modulation>& classes) {
  ModelGraph g = build_resnet(classes.size());
  g.classes = classes;
  return g;
}

ModelGraph build_cnn(const std::vector<siggen::Modulation>& classes) {
  ModelGraph g = build_cnn(classes.size());
  g.classes = classes;
  return g;
}

}  // namespace iqshift::zoo
