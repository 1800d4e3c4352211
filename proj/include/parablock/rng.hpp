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

// Seed splitting and random variates.
//
// Every random stream in a run is derived from the master seed as
//
//   seed = mix(mix(mix(mix(master) ^ tag) ^ client) ^ round)
//
// where mix is the splitmix64 finalizer. Streams are therefore fixed by
// (master, client, round, purpose) and do not depend on the order in which
// clients or rounds are evaluated.
//
// The engine is std::mt19937_64, whose output sequence is fixed by the C++
// standard. The <random> distributions are not, so the variates below are
// implemented here to keep traces identical across standard libraries.

#ifndef PARABLOCK_RNG_HPP_
#define PARABLOCK_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace parablock {

enum class StreamTag : std::uint64_t {
  kGradient = 1,
  kScheduler = 2,
  kParticipation = 3,
  kInit = 4,
  kData = 5,
  kPartition = 6,
  kObjective = 7,
  kTest = 99,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t client,
                          std::uint64_t round, StreamTag tag) noexcept;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();

  /// Uniform integer in [0, n). `n` must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal (Marsaglia polar method).
  double normal();

  /// Gamma(shape, 1) (Marsaglia-Tsang, with the U^(1/a) boost for a < 1).
  double gamma(double shape);

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_index(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace parablock

#endif  // PARABLOCK_RNG_HPP_
