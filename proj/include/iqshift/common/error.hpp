// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace iqshift {

/// Failure reading or validating persisted data (datasets, checkpoints,
/// reports). The kind distinguishes the reportable causes.
class DataError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, checksum, structure, unsupported_format, mismatch };

  DataError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(DataError::Kind kind) noexcept;

}  // namespace iqshift
