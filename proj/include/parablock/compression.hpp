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

#ifndef PARABLOCK_COMPRESSION_HPP_
#define PARABLOCK_COMPRESSION_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace parablock {

struct TopKConfig {
  double ratio = 1.0;  // in (0, 1]
  int index_bits = 32;
  int value_bits = 32;
  /// Also sparsify the aggregate sent back to clients.
  bool compress_downlink = false;

  void validate() const;
};

struct SparseDelta {
  std::size_t dimension = 0;
  std::vector<std::uint32_t> indices;  // ascending
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
};

/// k = ⌈ratio · d⌉, clamped to [1, d].
std::size_t topk_count(std::size_t dimension, double ratio);

/// Keeps the k entries of largest magnitude; ties go to the lower index.
/// Entries that are exactly zero are never stored.
SparseDelta topk_compress(std::span<const double> delta,
                          const TopKConfig& cfg);

std::vector<double> decompress(const SparseDelta& sparse);

/// Wire size: k · (index_bits + value_bits) / 8, with k = topk_count.
std::uint64_t payload_bytes(std::size_t dimension, const TopKConfig& cfg);

/// Dense wire size at `value_bits` per parameter (32 by default).
std::uint64_t dense_bytes(std::size_t dimension, int value_bits = 32);

}  // namespace parablock

#endif  // PARABLOCK_COMPRESSION_HPP_
