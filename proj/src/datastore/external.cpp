// SPDX-License-Identifier: Apache-2.0
#include "iqshift/datastore/external.hpp"

#include <stdexcept>

#include "iqshift/common/error.hpp"

namespace iqshift::datastore {

ConverterRegistry& ConverterRegistry::global() {
  static ConverterRegistry registry;
  return registry;
}

void ConverterRegistry::add(const std::string& format_tag, Converter converter) {
  if (format_tag.empty() || !converter) throw std::invalid_argument("converter needs a tag and a callable");
  converters_[format_tag] = std::move(converter);
}

bool ConverterRegistry::remove(const std::string& format_tag) { return converters_.erase(format_tag) != 0; }

std::vector<std::string> ConverterRegistry::list() const {
  std::vector<std::string> tags;
  for (const auto& [tag, fn] : converters_) tags.push_back(tag);
  return tags;
}

Dataset ConverterRegistry::import(const std::string& path, const std::string& format_tag) const {
  auto it = converters_.find(format_tag);
  if (it == converters_.end())
    throw DataError(DataError::Kind::unsupported_format, "unsupported format '" + format_tag + "' for '" + path + "'");
  return it->second(path);
}

Dataset import_external(const std::string& path, const std::string& format_tag) {
  return ConverterRegistry::global().import(path, format_tag);
}

}  // namespace iqshift::datastore
