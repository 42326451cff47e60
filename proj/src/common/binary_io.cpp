// SPDX-License-Identifier: Apache-2.0
#include "iqshift/common/binary_io.hpp"

#include <zlib.h>

#include <filesystem>
#include <fstream>

namespace iqshift {

std::uint32_t crc32_of(const std::uint8_t* data, std::size_t size) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::crc_trailer() { u32(crc32_of(buf_.data(), buf_.size())); }

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(DataError::Kind::io, "cannot open '" + path + "'");
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::uint8_t> bytes(size);
  if (size && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size)))
    throw DataError(DataError::Kind::io, "read failed for '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError(DataError::Kind::io, "cannot write '" + tmp + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError(DataError::Kind::io, "write failed for '" + tmp + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError(DataError::Kind::io, "cannot rename '" + tmp + "': " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
  write_file(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

std::string read_text_file(const std::string& path) {
  const auto bytes = read_file(path);
  return std::string(bytes.begin(), bytes.end());
}

ByteReader open_container(const std::vector<std::uint8_t>& bytes, std::string_view magic,
                          std::uint16_t max_version, std::uint16_t& version_out) {
  const std::size_t head = magic.size() + 2;
  if (bytes.size() < magic.size() || std::memcmp(bytes.data(), magic.data(), magic.size()) != 0)
    throw DataError(DataError::Kind::bad_magic, "bad magic: not a " + std::string(magic) + " file");
  if (bytes.size() < head) throw DataError(DataError::Kind::checksum, "truncated " + std::string(magic) + " header");
  version_out = static_cast<std::uint16_t>(bytes[magic.size()] | (bytes[magic.size() + 1] << 8));
  if (version_out == 0 || version_out > max_version)
    throw DataError(DataError::Kind::bad_version,
                    "unsupported " + std::string(magic) + " version " + std::to_string(version_out));
  if (bytes.size() < head + 4) throw DataError(DataError::Kind::checksum, "missing checksum trailer");
  const std::size_t body = bytes.size() - 4;
  const std::uint32_t stored = static_cast<std::uint32_t>(bytes[body]) | (static_cast<std::uint32_t>(bytes[body + 1]) << 8) |
                               (static_cast<std::uint32_t>(bytes[body + 2]) << 16) |
                               (static_cast<std::uint32_t>(bytes[body + 3]) << 24);
  if (stored != crc32_of(bytes.data(), body))
    throw DataError(DataError::Kind::checksum, std::string(magic) + " checksum mismatch (corrupt or truncated file)");
  return ByteReader(bytes.data() + head, body - head);
}

}  // namespace iqshift
