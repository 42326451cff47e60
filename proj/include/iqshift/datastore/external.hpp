// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "iqshift/datastore/dataset.hpp"

namespace iqshift::datastore {

/// Extension point for importing third-party dataset containers. No
/// converter is registered by default, so every import reports an
/// unsupported format until one is added.
class ConverterRegistry {
 public:
  using Converter = std::function<Dataset(const std::string& path)>;

  static ConverterRegistry& global();

  void add(const std::string& format_tag, Converter converter);
  bool remove(const std::string& format_tag);
  std::vector<std::string> list() const;
  Dataset import(const std::string& path, const std::string& format_tag) const;

 private:
  std::map<std::string, Converter> converters_;
};

/// Imports through the global registry.
Dataset import_external(const std::string& path, const std::string& format_tag);

}  // namespace iqshift::datastore
