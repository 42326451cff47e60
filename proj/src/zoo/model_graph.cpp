// SPDX-License-Identifier: Apache-2.0
#include "iqshift/zoo/model_graph.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace iqshift::zoo {

std::string to_string(ModelKind k) { return k == ModelKind::resnet ? "resnet" : "cnn"; }

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "resnet" || s == "rn") return ModelKind::resnet;
  if (s == "cnn") return ModelKind::cnn;
  throw std::invalid_argument("unknown model kind '" + s + "' (expected resnet or cnn)");
}

std::string row_label(const nn::LayerSpec& s) {
  using nn::LayerKind;
  switch (s.kind) {
    case LayerKind::conv1d: return s.kernel == 1 ? "1x1 Conv" : "Conv";
    case LayerKind::batch_norm: return "Batch Normalization";
    case LayerKind::relu: return "ReLU";
    case LayerKind::selu: return "SELU";
    case LayerKind::dropout: return "Drop(" + std::to_string(static_cast<int>(std::lround(s.rate * 100))) + "%)";
    case LayerKind::max_pool: return "Maximum Pooling";
    case LayerKind::global_avg_pool: return "Average Pooling";
    case LayerKind::dense: return "FC";
    case LayerKind::residual: return "Residual Unit";
    case LayerKind::softmax: return "SoftMax";
  }
  return "?";
}

std::vector<TraceRow> trace(const std::vector<nn::LayerSpec>& layers, const nn::Shape& input) {
  std::vector<TraceRow> rows{{"Input", input}};
  nn::Shape cur = input;
  std::string open_group;
  for (const auto& s : layers) {
    cur = nn::output_shape(s, cur);
    if (!s.group.empty() && s.group == open_group) {
      rows.back().shape = cur;
      continue;
    }
    open_group = s.group;
    std::string label = s.group.empty() ? row_label(s) : s.group.substr(0, s.group.find('#'));
    rows.push_back({std::move(label), cur});
  }
  return rows;
}

std::vector<TraceRow> residual_unit_trace(const nn::LayerSpec& unit, const nn::Shape& input) {
  if (unit.kind != nn::LayerKind::residual) throw std::invalid_argument("not a residual unit: " + nn::describe(unit));
  std::size_t relus = 0;
  for (const auto& s : unit.body) relus += s.kind == nn::LayerKind::relu;
  std::vector<TraceRow> rows{{"Input", input}};
  nn::Shape cur = input;
  std::size_t seen = 0;
  for (const auto& s : unit.body) {
    cur = nn::output_shape(s, cur);
    std::string label = row_label(s);
    if (s.kind == nn::LayerKind::relu && relus > 1) label += "_" + std::to_string(++seen);
    rows.push_back({std::move(label), cur});
  }
  rows.push_back({"Addition(Input, " + rows.back().layer + ")", nn::output_shape(unit, input)});
  return rows;
}

std::vector<TraceRow> ModelGraph::expand_row(std::size_t row) const {
  if (row == 0) throw std::out_of_range("row 0 is the input row");
  nn::Shape cur = input_shape;
  std::size_t current = 0;
  std::string open_group;
  std::vector<TraceRow> rows;
  for (const auto& s : layers) {
    const bool continues = !s.group.empty() && s.group == open_group;
    if (!continues) {
      ++current;
      open_group = s.group;
      if (current == row) rows.push_back({"Input", cur});
    }
    cur = nn::output_shape(s, cur);
    if (current == row) rows.push_back({row_label(s), cur});
    if (current > row) break;
  }
  if (rows.empty()) throw std::out_of_range("table has no row " + std::to_string(row));
  return rows;
}

std::string format_trace(const std::vector<TraceRow>& rows) {
  std::string out;
  for (const auto& r : rows) out += r.layer + "\t" + nn::shape_string(r.shape) + "\n";
  return out;
}

std::string ModelGraph::export_text() const {
  std::ostringstream out;
  out << "model = " << to_string(kind) << "\n";
  out << "input = " << nn::shape_string(input_shape) << "\n";
  out << "num_classes = " << num_classes << "\n";
  out << "classes = ";
  for (std::size_t i = 0; i < classes.size(); ++i) out << (i ? "," : "") << siggen::name(classes[i]);
  out << "\n";
  out << "trainable_parameters = " << param_count() << "\n";
  out << "[table]\n" << format_trace(table_trace());
  out << "[layers]\n" << listing();
  return out.str();
}

ModelGraph build_model(ModelKind kind, const std::vector<siggen::Modulation>& classes) {
  return kind == ModelKind::resnet ? build_resnet(classes) : build_cnn(classes);
}

}  // namespace iqshift::zoo
