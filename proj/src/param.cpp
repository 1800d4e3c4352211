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

#include "parablock/param.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parablock/errors.hpp"

namespace parablock {

BlockPartition::BlockPartition(std::size_t dimension,
                               std::vector<BlockRange> ranges)
    : dimension_(dimension), ranges_(std::move(ranges)) {
  if (dimension_ == 0) throw PartitionError("partition of an empty vector");
  if (ranges_.empty()) throw PartitionError("partition has no blocks");
  std::size_t expected = 0;
  for (std::size_t b = 0; b < ranges_.size(); ++b) {
    const BlockRange& r = ranges_[b];
    if (r.end <= r.begin) {
      throw PartitionError("block " + std::to_string(b + 1) +
                           " has an empty range");
    }
    if (r.begin < expected) {
      throw PartitionError("block " + std::to_string(b + 1) +
                           " overlaps the previous block");
    }
    if (r.begin > expected) {
      throw PartitionError("gap before block " + std::to_string(b + 1) +
                           " at index " + std::to_string(expected));
    }
    expected = r.end;
  }
  if (expected != dimension_) {
    throw PartitionError("blocks cover [0," + std::to_string(expected) +
                         ") but the dimension is " +
                         std::to_string(dimension_));
  }
}

const BlockRange& BlockPartition::range(BlockId b) const {
  if (!contains(b)) {
    throw PartitionError("block id " + std::to_string(b.value()) +
                         " outside [1," + std::to_string(ranges_.size()) +
                         "]");
  }
  return ranges_[b.index()];
}

namespace {

struct PartitionBuilder {
  std::size_t d;

  BlockPartition operator()(const EqualBlocks& s) const {
    if (s.num_blocks == 0) throw PartitionError("equal(B) requires B >= 1");
    if (s.num_blocks > d) {
      throw PartitionError("equal(B) with B=" + std::to_string(s.num_blocks) +
                           " > d=" + std::to_string(d));
    }
    const std::size_t width = d / s.num_blocks;
    std::vector<BlockRange> ranges;
    ranges.reserve(s.num_blocks);
    for (std::size_t b = 0; b < s.num_blocks; ++b) {
      const std::size_t begin = b * width;
      const std::size_t end = (b + 1 == s.num_blocks) ? d : begin + width;
      ranges.push_back({begin, end});
    }
    return BlockPartition(d, std::move(ranges));
  }

  BlockPartition operator()(const LayerBlocks& s) const {
    std::vector<BlockRange> ranges;
    std::size_t offset = 0;
    for (std::size_t dim : s.layer_dims) {
      ranges.push_back({offset, offset + dim});
      offset += dim;
    }
    return BlockPartition(d, std::move(ranges));
  }

  BlockPartition operator()(const ExplicitBlocks& s) const {
    return BlockPartition(d, s.ranges);
  }
};

void check_covers(std::size_t size, const BlockPartition& p) {
  if (size != p.dimension()) {
    throw ShapeError("vector of dimension " + std::to_string(size) +
                     " against a partition of dimension " +
                     std::to_string(p.dimension()));
  }
}

void check_same(std::size_t a, std::size_t b) {
  if (a != b) {
    throw ShapeError("dimension mismatch: " + std::to_string(a) + " vs " +
                     std::to_string(b));
  }
}

}  // namespace

BlockPartition make_partition(std::size_t dimension,
                              const PartitionStrategy& strategy) {
  return std::visit(PartitionBuilder{dimension}, strategy);
}

bool ParamVector::all_finite() const noexcept {
  return std::all_of(values_.begin(), values_.end(),
                     [](double x) { return std::isfinite(x); });
}

std::span<double> block_view(std::span<double> v, const BlockPartition& p,
                             BlockId b) {
  check_covers(v.size(), p);
  const BlockRange& r = p.range(b);
  return v.subspan(r.begin, r.size());
}

std::span<const double> block_view(std::span<const double> v,
                                   const BlockPartition& p, BlockId b) {
  check_covers(v.size(), p);
  const BlockRange& r = p.range(b);
  return v.subspan(r.begin, r.size());
}

std::span<double> block_view(ParamVector& v, const BlockPartition& p,
                             BlockId b) {
  return block_view(v.values(), p, b);
}

std::span<const double> block_view(const ParamVector& v,
                                   const BlockPartition& p, BlockId b) {
  return block_view(v.values(), p, b);
}

double dot(std::span<const double> u, std::span<const double> v) {
  check_same(u.size(), v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

double norm_sq(std::span<const double> v) { return dot(v, v); }

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double block_norm_sq_sum(const ParamVector& v, const BlockPartition& p) {
  check_covers(v.size(), p);
  double acc = 0.0;
  for (std::size_t b = 1; b <= p.num_blocks(); ++b) {
    acc += norm_sq(block_view(v, p, BlockId(b)));
  }
  return acc;
}

double block_dot_sum(const ParamVector& u, const ParamVector& v,
                     const BlockPartition& p) {
  check_same(u.size(), v.size());
  check_covers(u.size(), p);
  double acc = 0.0;
  for (std::size_t b = 1; b <= p.num_blocks(); ++b) {
    acc += dot(block_view(u, p, BlockId(b)), block_view(v, p, BlockId(b)));
  }
  return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace parablock
