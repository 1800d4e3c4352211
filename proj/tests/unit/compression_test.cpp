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
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "parablock/errors.hpp"

namespace parablock {
namespace {

std::vector<double> Roundtrip(const std::vector<double>& v, double ratio) {
  return decompress(topk_compress(v, TopKConfig{ratio}));
}

TEST(TopKTest, KeepsLargestMagnitudes) {
  EXPECT_EQ(Roundtrip({0.5, -3, 1, 0.2}, 0.5),
            (std::vector<double>{0, -3, 1, 0}));
}

TEST(TopKTest, RatioOneIsIdentity) {
  const std::vector<double> v{0.5, -3, 1, 0.2, 0};
  EXPECT_EQ(Roundtrip(v, 1.0), v);
}

TEST(TopKTest, TiesGoToLowerIndex) {
  const SparseDelta s = topk_compress(std::vector<double>{2, -2, 0},
                                      TopKConfig{1.0 / 3.0});
  ASSERT_EQ(s.indices.size(), 1u);
  EXPECT_EQ(s.indices[0], 0u);
  EXPECT_EQ(s.values[0], 2.0);
}

TEST(TopKTest, IndicesAscending) {
  const SparseDelta s =
      topk_compress(std::vector<double>{1, 9, -8, 7, 0.1}, TopKConfig{0.6});
  EXPECT_EQ(s.indices, (std::vector<std::uint32_t>{1, 2, 3}));
}

TEST(TopKTest, CountRoundsUpAndClamps) {
  EXPECT_EQ(topk_count(5, 0.2), 1u);
  EXPECT_EQ(topk_count(10, 0.25), 3u);
  EXPECT_EQ(topk_count(3, 0.01), 1u);
  EXPECT_EQ(topk_count(7, 1.0), 7u);
}

TEST(TopKTest, PayloadFormula) {
  TopKConfig cfg{0.2};
  EXPECT_EQ(payload_bytes(100, cfg), 20u * 8u);
  cfg.index_bits = 16;
  cfg.value_bits = 16;
  EXPECT_EQ(payload_bytes(100, cfg), 20u * 4u);
  EXPECT_EQ(dense_bytes(100), 400u);
}

TEST(TopKTest, RejectsBadConfig) {
  EXPECT_THROW(topk_compress(std::vector<double>{1}, TopKConfig{0.0}),
               ConfigError);
  EXPECT_THROW(topk_compress(std::vector<double>{1}, TopKConfig{1.5}),
               ConfigError);
  EXPECT_THROW(topk_compress(std::vector<double>{}, TopKConfig{0.5}),
               ShapeError);
}

// Full stable sort by (|x| desc, index asc) as the oracle.
TEST(TopKTest, MatchesSortOracle) {
  std::mt19937_64 gen(2024);
  std::normal_distribution<double> dist;
  std::uniform_int_distribution<int> dim(1, 60);
  std::uniform_real_distribution<double> ratio(0.01, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d = dim(gen);
    std::vector<double> v(d);
    for (double& x : v) x = std::round(dist(gen) * 4) / 4;  // forces ties
    const double r = ratio(gen);
    const std::size_t k = static_cast<std::size_t>(std::ceil(r * d - 1e-9));
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return std::fabs(v[a]) > std::fabs(v[b]);
    });
    std::vector<double> expected(d, 0.0);
    for (std::size_t n = 0; n < std::max<std::size_t>(k, 1); ++n) {
      expected[order[n]] = v[order[n]];
    }
    ASSERT_EQ(Roundtrip(v, r), expected) << "trial " << trial;
  }
}

}  // namespace
}  // namespace parablock
