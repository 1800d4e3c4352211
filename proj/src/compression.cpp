// Copyright 2026 The ParaBlock Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "parablock/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parablock/errors.hpp"

namespace parablock {

void TopKConfig::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw ConfigError("compression.ratio", "must be in (0, 1]");
  }
  if (index_bits <= 0 || value_bits <= 0) {
    throw ConfigError("compression", "index_bits and value_bits must be > 0");
  }
}

std::size_t topk_count(std::size_t dimension, double ratio) {
  // The relative slack absorbs representation error such as 0.2 * 5.
  const double exact = ratio * static_cast<double>(dimension);
  auto k = static_cast<std::size_t>(std::ceil(exact * (1.0 - 1e-12)));
  return std::clamp<std::size_t>(k, 1, dimension);
}

SparseDelta topk_compress(std::span<const double> delta,
                          const TopKConfig& cfg) {
  cfg.validate();
  if (delta.empty()) throw ShapeError("top-k of an empty delta");
  const std::size_t k = topk_count(delta.size(), cfg.ratio);

  std::vector<std::uint32_t> order(delta.size());
  std::iota(order.begin(), order.end(), 0u);
  auto larger = [&](std::uint32_t a, std::uint32_t b) {
    const double ma = std::abs(delta[a]);
    const double mb = std::abs(delta[b]);
    return ma > mb || (ma == mb && a < b);
  };
  std::nth_element(order.begin(), order.begin() + static_cast<long>(k - 1),
                   order.end(), larger);
  order.resize(k);
  std::sort(order.begin(), order.end());

  SparseDelta out;
  out.dimension = delta.size();
  for (std::uint32_t i : order) {
    if (delta[i] == 0.0) continue;
    out.indices.push_back(i);
    out.values.push_back(delta[i]);
  }
  return out;
}

std::vector<double> decompress(const SparseDelta& sparse) {
  std::vector<double> dense(sparse.dimension, 0.0);
  for (std::size_t n = 0; n < sparse.indices.size(); ++n) {
    dense[sparse.indices[n]] = sparse.values[n];
  }
  return dense;
}

std::uint64_t payload_bytes(std::size_t dimension, const TopKConfig& cfg) {
  const auto k = static_cast<std::uint64_t>(topk_count(dimension, cfg.ratio));
  return k * static_cast<std::uint64_t>(cfg.index_bits + cfg.value_bits) / 8;
}

std::uint64_t dense_bytes(std::size_t dimension, int value_bits) {
  return static_cast<std::uint64_t>(dimension) *
         static_cast<std::uint64_t>(value_bits) / 8;
}

}  // namespace parablock
