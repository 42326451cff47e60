// SPDX-License-Identifier: Apache-2.0
#include "iqshift/nn/tensor.hpp"

namespace iqshift::nn {

std::string shape_string(const Shape& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "x" : "") + std::to_string(s[i]);
  return out;
}

}  // namespace iqshift::nn
