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

// Flat parameter vectors and their partition into disjoint coordinate
// blocks. Blocks are index ranges over a single contiguous buffer, so a
// block view is a std::span into the owning vector and never a copy.

#ifndef PARABLOCK_PARAM_HPP_
#define PARABLOCK_PARAM_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <variant>
#include <vector>

namespace parablock {

/// Half-open index range [begin, end).
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool operator==(const BlockRange&) const = default;
};

/// One-based block identifier, as used in schedules and trace files.
class BlockId {
 public:
  constexpr BlockId() = default;
  constexpr explicit BlockId(std::size_t one_based) : value_(one_based) {}

  constexpr std::size_t value() const noexcept { return value_; }
  /// Zero-based position, for indexing containers.
  constexpr std::size_t index() const noexcept { return value_ - 1; }

  constexpr bool operator==(const BlockId&) const = default;
  constexpr auto operator<=>(const BlockId&) const = default;

 private:
  std::size_t value_ = 0;
};

class BlockPartition {
 public:
  /// Validates that `ranges` are nonempty, disjoint and cover [0, dimension)
  /// in ascending order. Throws PartitionError otherwise.
  BlockPartition(std::size_t dimension, std::vector<BlockRange> ranges);

  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t num_blocks() const noexcept { return ranges_.size(); }
  std::span<const BlockRange> ranges() const noexcept { return ranges_; }

  /// Throws PartitionError if `b` is not in [1, num_blocks()].
  const BlockRange& range(BlockId b) const;
  std::size_t block_size(BlockId b) const { return range(b).size(); }
  bool contains(BlockId b) const noexcept {
    return b.value() >= 1 && b.value() <= ranges_.size();
  }

  bool operator==(const BlockPartition&) const = default;

 private:
  std::size_t dimension_;
  std::vector<BlockRange> ranges_;
};

struct EqualBlocks {
  std::size_t num_blocks;
};
struct LayerBlocks {
  std::vector<std::size_t> layer_dims;
};
struct ExplicitBlocks {
  std::vector<BlockRange> ranges;
};
using PartitionStrategy = std::variant<EqualBlocks, LayerBlocks, ExplicitBlocks>;

/// equal(B) uses floor(d/B)-sized blocks with the remainder folded into
/// the last block; by_layer uses prefix sums of the layer sizes.
BlockPartition make_partition(std::size_t dimension,
                              const PartitionStrategy& strategy);

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dimension) : values_(dimension, 0.0) {}
  explicit ParamVector(std::vector<double> values)
      : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::vector<double>& vector() const noexcept { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  bool all_finite() const noexcept;

  bool operator==(const ParamVector&) const = default;

 private:
  std::vector<double> values_;
};

/// Sub-vector of `v` at block `b`. Writes through the returned span touch
/// exactly the coordinates of that block.
std::span<double> block_view(ParamVector& v, const BlockPartition& p,
                             BlockId b);
std::span<const double> block_view(const ParamVector& v,
                                   const BlockPartition& p, BlockId b);
std::span<double> block_view(std::span<double> v, const BlockPartition& p,
                             BlockId b);
std::span<const double> block_view(std::span<const double> v,
                                   const BlockPartition& p, BlockId b);

double dot(std::span<const double> u, std::span<const double> v);
double norm_sq(std::span<const double> v);
double norm_inf(std::span<const double> v);

/// Sum over blocks of squared block norms; equals norm_sq(v) up to rounding.
double block_norm_sq_sum(const ParamVector& v, const BlockPartition& p);
/// Sum over blocks of block inner products; equals dot(u, v) up to rounding.
double block_dot_sum(const ParamVector& u, const ParamVector& v,
                     const BlockPartition& p);

/// y += alpha * x, elementwise. Dimensions must match.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace parablock

#endif  // PARABLOCK_PARAM_HPP_
