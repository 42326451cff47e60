// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/spec.hpp"

#include <sstream>
#include <stdexcept>

#include "iqshift/common/config.hpp"

namespace iqshift::nn {

LayerSpec LayerSpec::conv(std::size_t out_channels, std::size_t kernel) {
  LayerSpec s;
  s.kind = LayerKind::conv1d;
  s.units = out_channels;
  s.kernel = kernel;
  return s;
}

LayerSpec LayerSpec::batch_norm() {
  LayerSpec s;
  s.kind = LayerKind::batch_norm;
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::relu;
  return s;
}

LayerSpec LayerSpec::selu() {
  LayerSpec s;
  s.kind = LayerKind::selu;
  return s;
}

LayerSpec LayerSpec::dropout(double rate) {
  LayerSpec s;
  s.kind = LayerKind::dropout;
  s.rate = rate;
  return s;
}

LayerSpec LayerSpec::max_pool() {
  LayerSpec s;
  s.kind = LayerKind::max_pool;
  return s;
}

LayerSpec LayerSpec::global_avg_pool() {
  LayerSpec s;
  s.kind = LayerKind::global_avg_pool;
  return s;
}

LayerSpec LayerSpec::dense(std::size_t outputs) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = outputs;
  return s;
}

LayerSpec LayerSpec::residual(std::vector<LayerSpec> body) {
  LayerSpec s;
  s.kind = LayerKind::residual;
  s.body = std::move(body);
  return s;
}

LayerSpec LayerSpec::softmax() {
  LayerSpec s;
  s.kind = LayerKind::softmax;
  return s;
}

std::string kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::conv1d: return "conv1d";
    case LayerKind::batch_norm: return "batch_norm";
    case LayerKind::relu: return "relu";
    case LayerKind::selu: return "selu";
    case LayerKind::dropout: return "dropout";
    case LayerKind::max_pool: return "max_pool";
    case LayerKind::global_avg_pool: return "global_avg_pool";
    case LayerKind::dense: return "dense";
    case LayerKind::residual: return "residual";
    case LayerKind::softmax: return "softmax";
  }
  return "?";
}

std::string describe(const LayerSpec& s) {
  switch (s.kind) {
    case LayerKind::conv1d: return "conv1d out=" + std::to_string(s.units) + " k=" + std::to_string(s.kernel);
    case LayerKind::batch_norm: return "batch_norm eps=" + format_double(s.eps) + " momentum=" + format_double(s.bn_momentum);
    case LayerKind::dropout: return "dropout p=" + format_double(s.rate);
    case LayerKind::max_pool: return "max_pool width=2 stride=2";
    case LayerKind::dense: return "dense out=" + std::to_string(s.units);
    case LayerKind::residual: return "residual layers=" + std::to_string(s.body.size());
    default: return kind_name(s.kind);
  }
}

namespace {

void require(bool ok, const LayerSpec& s, const Shape& in, const std::string& why) {
  if (!ok) throw std::invalid_argument(describe(s) + " cannot take input " + shape_string(in) + ": " + why);
}

}  // namespace

Shape output_shape(const LayerSpec& s, const Shape& in) {
  switch (s.kind) {
    case LayerKind::conv1d:
      require(in.size() == 2, s, in, "expects [C, L]");
      require(s.units > 0 && s.kernel % 2 == 1, s, in, "needs positive channels and odd kernel");
      return {s.units, in[1]};
    case LayerKind::batch_norm:
      require(in.size() == 2, s, in, "expects [C, L]");
      return in;
    case LayerKind::relu:
    case LayerKind::selu:
    case LayerKind::softmax:
      return in;
    case LayerKind::dropout:
      require(s.rate >= 0.0 && s.rate < 1.0, s, in, "rate must lie in [0, 1)");
      return in;
    case LayerKind::max_pool:
      require(in.size() == 2 && in[1] % 2 == 0, s, in, "expects [C, L] with even L");
      return {in[0], in[1] / 2};
    case LayerKind::global_avg_pool:
      require(in.size() == 2, s, in, "expects [C, L]");
      return {in[0]};
    case LayerKind::dense:
      require(s.units > 0, s, in, "needs positive output count");
      return {s.units};
    case LayerKind::residual: {
      const Shape out = output_shape(s.body, in);
      require(out == in, s, in, "branch output " + shape_string(out) + " differs from input");
      return out;
    }
  }
  throw std::logic_error("unhandled layer kind");
}

Shape output_shape(const std::vector<LayerSpec>& specs, const Shape& in) {
  Shape cur = in;
  for (const auto& s : specs) cur = output_shape(s, cur);
  return cur;
}

std::size_t param_count(const LayerSpec& s, const Shape& in) {
  switch (s.kind) {
    case LayerKind::conv1d: return s.units * in[0] * s.kernel + s.units;
    case LayerKind::batch_norm: return 2 * in[0];
    case LayerKind::dense: return s.units * shape_size(in) + s.units;
    case LayerKind::residual: return param_count(s.body, in);
    default: return 0;
  }
}

std::size_t param_count(const std::vector<LayerSpec>& specs, const Shape& in) {
  std::size_t total = 0;
  Shape cur = in;
  for (const auto& s : specs) {
    total += param_count(s, cur);
    cur = output_shape(s, cur);
  }
  return total;
}

namespace {

void listing(const std::vector<LayerSpec>& specs, Shape cur, int depth, std::ostringstream& out) {
  for (const auto& s : specs) {
    const Shape next = output_shape(s, cur);
    out << std::string(static_cast<std::size_t>(2 * depth), ' ') << describe(s) << " -> " << shape_string(next) << "\n";
    if (s.kind == LayerKind::residual) listing(s.body, cur, depth + 1, out);
    cur = next;
  }
}

}  // namespace

std::string spec_listing(const std::vector<LayerSpec>& specs, const Shape& in) {
  std::ostringstream out;
  out << "input " << shape_string(in) << "\n";
  listing(specs, in, 0, out);
  return out.str();
}

}  // namespace iqshift::nn
