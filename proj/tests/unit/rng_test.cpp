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

#include "parablock/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "gtest/gtest.h"

namespace parablock {
namespace {

TEST(DeriveSeedTest, Deterministic) {
  EXPECT_EQ(derive_seed(1, 2, 3, StreamTag::kGradient),
            derive_seed(1, 2, 3, StreamTag::kGradient));
}

TEST(DeriveSeedTest, DistinctAcrossEveryComponent) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0, 1}) {
    for (std::uint64_t client : {0, 1, 2}) {
      for (std::uint64_t round : {0, 1, 2}) {
        for (StreamTag tag : {StreamTag::kGradient, StreamTag::kScheduler,
                              StreamTag::kParticipation}) {
          seen.insert(derive_seed(master, client, round, tag));
        }
      }
    }
  }
  EXPECT_EQ(seen.size(), 2u * 3u * 3u * 3u);
}

TEST(DeriveSeedTest, ClientAndRoundDoNotCommute) {
  EXPECT_NE(derive_seed(5, 1, 2, StreamTag::kGradient),
            derive_seed(5, 2, 1, StreamTag::kGradient));
}

TEST(RngTest, SameSeedSameSequence) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) {
    ASSERT_EQ(a.normal(), b.normal());
    ASSERT_EQ(a.uniform(), b.uniform());
  }
}

TEST(RngTest, UniformInUnitInterval) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(RngTest, UniformIndexCoversRangeEvenly) {
  Rng rng(2);
  std::vector<int> counts(7, 0);
  constexpr int kDraws = 70000;
  for (int i = 0; i < kDraws; ++i) ++counts[rng.uniform_index(7)];
  for (int c : counts) EXPECT_NEAR(c, kDraws / 7, 5 * std::sqrt(kDraws / 7.0));
}

TEST(RngTest, NormalMoments) {
  Rng rng(3);
  constexpr int kDraws = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / kDraws, 0.0, 0.01);
  EXPECT_NEAR(s2 / kDraws, 1.0, 0.02);
}

TEST(RngTest, GammaMeanMatchesShape) {
  for (double shape : {0.1, 0.5, 1.0, 3.0}) {
    Rng rng(4);
    constexpr int kDraws = 100000;
    double s = 0.0;
    for (int i = 0; i < kDraws; ++i) {
      const double g = rng.gamma(shape);
      ASSERT_GE(g, 0.0);
      s += g;
    }
    // Var = shape; 6 standard errors.
    EXPECT_NEAR(s / kDraws, shape, 6.0 * std::sqrt(shape / kDraws))
        << "shape " << shape;
  }
}

TEST(RngTest, ShuffleIsAPermutation) {
  Rng rng(5);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(std::span<int>(v));
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
  EXPECT_FALSE(std::is_sorted(v.begin(), v.end()));
}

}  // namespace
}  // namespace parablock
