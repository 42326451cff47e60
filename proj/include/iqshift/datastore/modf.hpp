// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "iqshift/datastore/dataset.hpp"

namespace iqshift::datastore {

/// MODF layout, all little-endian:
///
///   "MODF" | u16 version | u32 manifest length | manifest text
///   frame records: u8 class | f32 snr_db | f32 rolloff | f32 cfo | u16 sps |
///                  f32 power_scale_db | u64 seed | 1024 f32 I | 1024 f32 Q
///   u32 CRC-32 of every preceding byte
inline constexpr std::size_t kModfRecordBytes = 1 + 4 + 4 + 4 + 2 + 4 + 8 + 2 * kFrameLen * 4;

std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);

void write_dataset(const Dataset& ds, const std::string& path);
/// Raises DataError with kind bad_magic, bad_version, checksum or structure.
Dataset read_dataset(const std::string& path);

}  // namespace iqshift::datastore
