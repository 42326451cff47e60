// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "iqshift/nn/network.hpp"
#include "iqshift/nn/sgdm.hpp"

namespace iqshift::nn {

inline constexpr std::uint16_t kModwVersion = 1;

struct TensorRecord {
  std::string name;
  Shape shape;
  std::vector<double> values;  // widened; stored at the checkpoint's precision

  bool operator==(const TensorRecord&) const = default;
};

struct OptimizerRecord {
  double learning_rate = 0.0;
  double momentum = 0.0;
  std::vector<TensorRecord> velocities;

  bool operator==(const OptimizerRecord&) const = default;
};

/// MODW layout, all little-endian:
///
///   "MODW" | u16 version | u8 scalar bytes (4 or 8)
///   u32-length text: layer-spec listing
///   u32-length text: metadata (key = value)
///   u32 tensor count | per tensor: u32-length name, u32 rank, u64 dims, values
///   u8 optimizer flag | [f64 lr, f64 momentum, u32 count, velocity tensors]
///   u32 CRC-32 of every preceding byte
///
/// Tensors are parameters in declaration order followed by the batch-norm
/// running statistics. Values are 32-bit floats for 32-bit networks and
/// 64-bit doubles for 64-bit networks, so restores are bit-exact.
struct Checkpoint {
  std::uint8_t scalar_bytes = 4;
  std::string spec_listing;
  std::string metadata;
  std::vector<TensorRecord> tensors;
  std::optional<OptimizerRecord> optimizer;

  bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);
void write_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint read_checkpoint(const std::string& path);

template <typename T>
Checkpoint capture(Network<T>& net, const Sgdm<T>* optimizer, std::string metadata);

/// Loads parameters, buffers and (when both sides have one) optimizer state.
/// Raises DataError(mismatch) if the spec listing, precision or any tensor
/// shape differs.
template <typename T>
void restore(const Checkpoint& ckpt, Network<T>& net, Sgdm<T>* optimizer);

}  // namespace iqshift::nn
