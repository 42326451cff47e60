// SPDX-License-Identifier: Apache-2.0
#include "iqshift/datastore/modf.hpp"

#include "iqshift/common/binary_io.hpp"

namespace iqshift::datastore {

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  validate_dataset(ds);
  ByteWriter w;
  w.buffer().reserve(64 + ds.frames.size() * kModfRecordBytes);
  w.bytes("MODF", 4);
  w.u16(ds.manifest.format_version);
  w.text(manifest_to_text(ds.manifest));
  for (const auto& f : ds.frames) {
    w.u8(static_cast<std::uint8_t>(f.meta.cls));
    w.f32(f.meta.snr_db);
    w.f32(f.meta.rolloff);
    w.f32(f.meta.cfo);
    w.u16(f.meta.sps);
    w.f32(f.meta.power_scale_db);
    w.u64(f.meta.seed);
    for (float v : f.iq) w.f32(v);
  }
  w.crc_trailer();
  return std::move(w.buffer());
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  std::uint16_t version = 0;
  ByteReader r = open_container(bytes, "MODF", kModfVersion, version);
  Dataset ds;
  ds.manifest = manifest_from_text(r.text());
  if (ds.manifest.format_version != version)
    throw DataError(DataError::Kind::structure, "manifest version disagrees with file header");
  ds.manifest.validate();
  if (r.remaining() != ds.manifest.frame_count * kModfRecordBytes)
    throw DataError(DataError::Kind::structure,
                    "payload holds " + std::to_string(r.remaining() / kModfRecordBytes) + " records, manifest declares " +
                        std::to_string(ds.manifest.frame_count));
  ds.frames.resize(ds.manifest.frame_count);
  for (auto& f : ds.frames) {
    const std::uint8_t cls = r.u8();
    if (cls >= siggen::kAllModulations.size())
      throw DataError(DataError::Kind::structure, "invalid class code " + std::to_string(cls));
    f.meta.cls = static_cast<siggen::Modulation>(cls);
    f.meta.snr_db = r.f32();
    f.meta.rolloff = r.f32();
    f.meta.cfo = r.f32();
    f.meta.sps = r.u16();
    f.meta.power_scale_db = r.f32();
    f.meta.seed = r.u64();
    f.meta.profile_id = ds.manifest.profile.profile_id;
    for (float& v : f.iq) v = r.f32();
  }
  validate_dataset(ds);
  return ds;
}

void write_dataset(const Dataset& ds, const std::string& path) { write_file(path, encode_dataset(ds)); }

Dataset read_dataset(const std::string& path) { return decode_dataset(read_file(path)); }

}  // namespace iqshift::datastore
