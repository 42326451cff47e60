// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "iqshift/common/binary_io.hpp"
#include "iqshift/datastore/modf.hpp"
#include "iqshift/siggen/generate.hpp"

using namespace iqshift;
using namespace iqshift::datastore;

namespace {

Dataset small(siggen::ProfileId id) {
  const auto p = id == siggen::ProfileId::A ? siggen::default_profile_a() : siggen::default_profile_b();
  Dataset ds = siggen::generate_dataset(p, {siggen::Modulation::bpsk, siggen::Modulation::qam16}, {0.0, 10.0},
                                        id == siggen::ProfileId::A ? 8 : 1, 21, 1);
  ds.manifest = partition(ds.manifest, {0.75, 0.125, 0.125}, 5);
  return ds;
}

DataError::Kind kind_of(const std::vector<std::uint8_t>& bytes) {
  try {
    decode_dataset(bytes);
  } catch (const DataError& e) {
    return e.kind();
  }
  FAIL("decode succeeded");
  return DataError::Kind::io;
}

std::vector<std::uint8_t> with_crc(std::vector<std::uint8_t> body) {
  ByteWriter w;
  w.buffer() = std::move(body);
  w.crc_trailer();
  return std::move(w.buffer());
}

}  // namespace

TEST_CASE("record size") { CHECK(kModfRecordBytes == 27 + 8192); }

TEST_CASE("in-memory round trip is exact") {
  for (auto id : {siggen::ProfileId::A, siggen::ProfileId::B}) {
    const Dataset ds = small(id);
    const auto bytes = encode_dataset(ds);
    const Dataset back = decode_dataset(bytes);
    CHECK(back.manifest == ds.manifest);
    CHECK(back.frames == ds.frames);
    CHECK(encode_dataset(back) == bytes);
  }
}

TEST_CASE("file round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "iqshift_test_modf.modf").string();
  const Dataset ds = small(siggen::ProfileId::A);
  write_dataset(ds, path);
  const Dataset back = read_dataset(path);
  CHECK(back.frames == ds.frames);
  CHECK(back.manifest == ds.manifest);
  std::filesystem::remove(path);
  try {
    read_dataset(path);
    FAIL("expected io error");
  } catch (const DataError& e) {
    CHECK(e.kind() == DataError::Kind::io);
  }
}

TEST_CASE("truncation and bit flips are checksum errors") {
  const auto bytes = encode_dataset(small(siggen::ProfileId::A));
  auto cut = bytes;
  cut.resize(bytes.size() - 100);
  CHECK(kind_of(cut) == DataError::Kind::checksum);
  auto flip = bytes;
  flip[bytes.size() / 2] ^= 0x10;
  CHECK(kind_of(flip) == DataError::Kind::checksum);
  CHECK(kind_of(std::vector<std::uint8_t>(bytes.begin(), bytes.begin() + 5)) == DataError::Kind::checksum);
}

TEST_CASE("wrong magic and unknown versions") {
  auto bytes = encode_dataset(small(siggen::ProfileId::A));
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(kind_of(magic) == DataError::Kind::bad_magic);
  auto version = bytes;
  version[4] = 9;
  CHECK(kind_of(version) == DataError::Kind::bad_version);
  version[4] = 0;
  CHECK(kind_of(version) == DataError::Kind::bad_version);
}

TEST_CASE("frame count disagreeing with the manifest is a structure error") {
  const Dataset ds = small(siggen::ProfileId::A);
  const auto bytes = encode_dataset(ds);
  const std::size_t header = 4 + 2 + 4 + manifest_to_text(ds.manifest).size();
  // Drop one record but keep a valid checksum.
  std::vector<std::uint8_t> body(bytes.begin(), bytes.end() - 4 - static_cast<long>(kModfRecordBytes));
  CHECK(body.size() == header + (ds.frames.size() - 1) * kModfRecordBytes);
  CHECK(kind_of(with_crc(body)) == DataError::Kind::structure);
}

TEST_CASE("invalid class code is a structure error") {
  const Dataset ds = small(siggen::ProfileId::A);
  auto bytes = encode_dataset(ds);
  const std::size_t header = 4 + 2 + 4 + manifest_to_text(ds.manifest).size();
  bytes.resize(bytes.size() - 4);
  bytes[header] = 200;
  CHECK(kind_of(with_crc(bytes)) == DataError::Kind::structure);
}

TEST_CASE("labels out of canonical order are rejected") {
  const Dataset ds = small(siggen::ProfileId::A);
  auto bytes = encode_dataset(ds);
  const std::size_t header = 4 + 2 + 4 + manifest_to_text(ds.manifest).size();
  bytes.resize(bytes.size() - 4);
  bytes[header] = static_cast<std::uint8_t>(siggen::Modulation::psk8);
  CHECK(kind_of(with_crc(bytes)) == DataError::Kind::structure);
}
