// SPDX-License-Identifier: Apache-2.0
#include "iqshift/train/model.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

#include "iqshift/common/config.hpp"
#include "iqshift/common/error.hpp"

namespace iqshift::train {

std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }

Precision precision_from_string(const std::string& s) {
  if (s == "f32" || s == "32" || s == "float") return Precision::f32;
  if (s == "f64" || s == "64" || s == "double") return Precision::f64;
  throw std::invalid_argument("unknown precision '" + s + "' (expected f32 or f64)");
}

template <typename T>
nn::Tensor<T> assemble_batch(const datastore::Dataset& ds, std::span<const std::size_t> order) {
  constexpr std::size_t kSample = 2 * siggen::kFrameLen;
  nn::Tensor<T> x({order.size(), 2, siggen::kFrameLen});
  T* out = x.data();
  for (std::size_t b = 0; b < order.size(); ++b) {
    const auto& iq = ds.frames.at(order[b]).iq;
    if constexpr (std::is_same_v<T, float>) {
      std::memcpy(out + b * kSample, iq.data(), kSample * sizeof(float));
    } else {
      std::copy(iq.begin(), iq.end(), out + b * kSample);
    }
  }
  return x;
}

template nn::Tensor<float> assemble_batch<float>(const datastore::Dataset&, std::span<const std::size_t>);
template nn::Tensor<double> assemble_batch<double>(const datastore::Dataset&, std::span<const std::size_t>);

namespace {

std::variant<nn::Network<float>, nn::Network<double>> make_net(const zoo::ModelGraph& g, Precision p,
                                                               std::uint64_t seed) {
  if (p == Precision::f32)
    return std::variant<nn::Network<float>, nn::Network<double>>(std::in_place_type<nn::Network<float>>, g.layers,
                                                                 g.input_shape, seed);
  return std::variant<nn::Network<float>, nn::Network<double>>(std::in_place_type<nn::Network<double>>, g.layers,
                                                               g.input_shape, seed);
}

template <typename T>
std::vector<int> predict_with(nn::Network<T>& net, const datastore::Dataset& ds, std::span<const std::size_t> frames,
                              int threads, std::size_t batch) {
  std::vector<int> out;
  out.reserve(frames.size());
  nn::ExecContext ctx;
  ctx.mode = nn::Mode::infer;
  ctx.threads = threads;
  const std::size_t step = std::max<std::size_t>(1, batch);
  for (std::size_t s = 0; s < frames.size(); s += step) {
    const auto chunk = frames.subspan(s, std::min(step, frames.size() - s));
    const nn::Tensor<T> logits = net.forward(assemble_batch<T>(ds, chunk), ctx);
    const std::size_t c = logits.dim(1);
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      const T* row = logits.data() + b * c;
      out.push_back(static_cast<int>(std::max_element(row, row + c) - row));
    }
  }
  return out;
}

}  // namespace

Model::Model(zoo::ModelGraph graph, Precision precision, std::uint64_t init_seed)
    : graph_(std::move(graph)), precision_(precision), net_(make_net(graph_, precision, init_seed)) {
  if (graph_.classes.size() != graph_.num_classes)
    throw std::invalid_argument("model graph label list does not match its class count");
}

std::string Model::identity_metadata() const {
  std::string classes;
  for (std::size_t i = 0; i < graph_.classes.size(); ++i)
    classes += (i ? "," : "") + siggen::name(graph_.classes[i]);
  return "model = " + zoo::to_string(graph_.kind) + "\nclasses = " + classes + "\nprecision = " +
         to_string(precision_) + "\n";
}

nn::Checkpoint Model::snapshot(const std::string& extra_metadata) {
  const std::string meta = identity_metadata() + extra_metadata;
  if (precision_ == Precision::f32) return nn::capture<float>(f32(), nullptr, meta);
  return nn::capture<double>(f64(), nullptr, meta);
}

Model Model::from_checkpoint(const nn::Checkpoint& ckpt) {
  KeyValueConfig meta;
  try {
    meta = KeyValueConfig::parse(ckpt.metadata);
  } catch (const std::exception& e) {
    throw DataError(DataError::Kind::structure, std::string("checkpoint metadata: ") + e.what());
  }
  if (!meta.has("model") || !meta.has("classes"))
    throw DataError(DataError::Kind::structure, "checkpoint metadata lacks model or classes");
  std::vector<siggen::Modulation> classes;
  for (const auto& n : split_list(meta.get("classes"))) classes.push_back(siggen::modulation_from_name(n));
  const Precision p = ckpt.scalar_bytes == 8 ? Precision::f64 : Precision::f32;
  Model m(zoo::build_model(zoo::model_kind_from_string(meta.get("model")), classes), p, 0);
  if (p == Precision::f32)
    nn::restore<float>(ckpt, m.f32(), nullptr);
  else
    nn::restore<double>(ckpt, m.f64(), nullptr);
  return m;
}

std::optional<siggen::GeneratorProfile> training_profile(const nn::Checkpoint& ckpt) {
  const KeyValueConfig meta = KeyValueConfig::parse(ckpt.metadata);
  std::string text;
  for (const auto& [k, v] : meta.values())
    if (k.rfind("data.", 0) == 0) text += k.substr(5) + " = " + v + "\n";
  if (text.empty()) return std::nullopt;
  return siggen::parse_profile(text);
}

Model Model::load(const std::string& path) { return from_checkpoint(nn::read_checkpoint(path)); }

std::vector<int> Model::predict(const datastore::Dataset& ds, std::span<const std::size_t> frames) {
  if (precision_ == Precision::f32) return predict_with(f32(), ds, frames, threads, batch_size);
  return predict_with(f64(), ds, frames, threads, batch_size);
}

}  // namespace iqshift::train
