// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/checkpoint.hpp"

#include "iqshift/common/binary_io.hpp"
#include "iqshift/common/error.hpp"

namespace iqshift::nn {

namespace {

void put_tensor(ByteWriter& w, const TensorRecord& t, std::uint8_t scalar_bytes) {
  w.text(t.name);
  w.u32(static_cast<std::uint32_t>(t.shape.size()));
  for (std::size_t d : t.shape) w.u64(d);
  for (double v : t.values) {
    if (scalar_bytes == 4)
      w.f32(static_cast<float>(v));
    else
      w.f64(v);
  }
}

TensorRecord get_tensor(ByteReader& r, std::uint8_t scalar_bytes) {
  TensorRecord t;
  t.name = r.text();
  const std::uint32_t rank = r.u32();
  if (rank > 8) throw DataError(DataError::Kind::structure, "tensor '" + t.name + "' has implausible rank");
  for (std::uint32_t i = 0; i < rank; ++i) t.shape.push_back(static_cast<std::size_t>(r.u64()));
  const std::size_t n = shape_size(t.shape);
  r.need(n * scalar_bytes);
  t.values.resize(n);
  for (double& v : t.values) v = scalar_bytes == 4 ? static_cast<double>(r.f32()) : r.f64();
  return t;
}

template <typename T>
TensorRecord record(const std::string& name, const Tensor<T>& t) {
  return {name, t.shape(), std::vector<double>(t.values().begin(), t.values().end())};
}

template <typename T>
void assign(const TensorRecord& rec, const std::string& name, Tensor<T>& t) {
  if (rec.name != name || rec.shape != t.shape())
    throw DataError(DataError::Kind::mismatch, "checkpoint tensor '" + rec.name + "' " + shape_string(rec.shape) +
                                                   " does not match model tensor '" + name + "' " +
                                                   shape_string(t.shape()));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<T>(rec.values[i]);
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.scalar_bytes != 4 && ckpt.scalar_bytes != 8) throw std::invalid_argument("scalar size must be 4 or 8");
  ByteWriter w;
  w.bytes("MODW", 4);
  w.u16(kModwVersion);
  w.u8(ckpt.scalar_bytes);
  w.text(ckpt.spec_listing);
  w.text(ckpt.metadata);
  w.u32(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& t : ckpt.tensors) put_tensor(w, t, ckpt.scalar_bytes);
  w.u8(ckpt.optimizer ? 1 : 0);
  if (ckpt.optimizer) {
    w.f64(ckpt.optimizer->learning_rate);
    w.f64(ckpt.optimizer->momentum);
    w.u32(static_cast<std::uint32_t>(ckpt.optimizer->velocities.size()));
    for (const auto& t : ckpt.optimizer->velocities) put_tensor(w, t, ckpt.scalar_bytes);
  }
  w.crc_trailer();
  return std::move(w.buffer());
}

Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  std::uint16_t version = 0;
  ByteReader r = open_container(bytes, "MODW", kModwVersion, version);
  Checkpoint c;
  c.scalar_bytes = r.u8();
  if (c.scalar_bytes != 4 && c.scalar_bytes != 8)
    throw DataError(DataError::Kind::structure, "invalid scalar size " + std::to_string(c.scalar_bytes));
  c.spec_listing = r.text();
  c.metadata = r.text();
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) c.tensors.push_back(get_tensor(r, c.scalar_bytes));
  if (r.u8() != 0) {
    OptimizerRecord opt;
    opt.learning_rate = r.f64();
    opt.momentum = r.f64();
    const std::uint32_t nv = r.u32();
    for (std::uint32_t i = 0; i < nv; ++i) opt.velocities.push_back(get_tensor(r, c.scalar_bytes));
    c.optimizer = std::move(opt);
  }
  if (r.remaining() != 0) throw DataError(DataError::Kind::structure, "trailing bytes in checkpoint");
  return c;
}

void write_checkpoint(const Checkpoint& ckpt, const std::string& path) { write_file(path, encode_checkpoint(ckpt)); }

Checkpoint read_checkpoint(const std::string& path) { return decode_checkpoint(read_file(path)); }

template <typename T>
Checkpoint capture(Network<T>& net, const Sgdm<T>* optimizer, std::string metadata) {
  Checkpoint c;
  c.scalar_bytes = sizeof(T);
  c.spec_listing = net.listing();
  c.metadata = std::move(metadata);
  for (auto& [name, t] : net.state()) c.tensors.push_back(record(name, *t));
  if (optimizer) {
    OptimizerRecord opt;
    opt.learning_rate = optimizer->config().learning_rate;
    opt.momentum = optimizer->config().momentum;
    const auto params = net.params();
    const auto& vel = optimizer->velocities();
    for (std::size_t i = 0; i < vel.size(); ++i) opt.velocities.push_back(record(params.at(i)->name + ".velocity", vel[i]));
    c.optimizer = std::move(opt);
  }
  return c;
}

template <typename T>
void restore(const Checkpoint& ckpt, Network<T>& net, Sgdm<T>* optimizer) {
  if (ckpt.scalar_bytes != sizeof(T))
    throw DataError(DataError::Kind::mismatch, "checkpoint holds " + std::to_string(8 * ckpt.scalar_bytes) +
                                                   "-bit values, model runs in " + std::to_string(8 * sizeof(T)) + "-bit");
  if (ckpt.spec_listing != net.listing())
    throw DataError(DataError::Kind::mismatch, "checkpoint was written for a different model layout");
  auto state = net.state();
  if (state.size() != ckpt.tensors.size())
    throw DataError(DataError::Kind::mismatch, "checkpoint tensor count differs from the model");
  for (std::size_t i = 0; i < state.size(); ++i) assign(ckpt.tensors[i], state[i].first, *state[i].second);

  if (optimizer && ckpt.optimizer) {
    const auto params = net.params();
    auto& vel = optimizer->velocities();
    vel.clear();
    if (!ckpt.optimizer->velocities.empty() && ckpt.optimizer->velocities.size() != params.size())
      throw DataError(DataError::Kind::mismatch, "optimizer state does not mirror the parameters");
    for (std::size_t i = 0; i < ckpt.optimizer->velocities.size(); ++i) {
      Tensor<T> v(params[i]->value.shape());
      assign(ckpt.optimizer->velocities[i], params[i]->name + ".velocity", v);
      vel.push_back(std::move(v));
    }
  }
}

template Checkpoint capture<float>(Network<float>&, const Sgdm<float>*, std::string);
template Checkpoint capture<double>(Network<double>&, const Sgdm<double>*, std::string);
template void restore<float>(const Checkpoint&, Network<float>&, Sgdm<float>*);
template void restore<double>(const Checkpoint&, Network<double>&, Sgdm<double>*);

}  // namespace iqshift::nn
