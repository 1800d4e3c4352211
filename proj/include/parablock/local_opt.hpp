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

#ifndef PARABLOCK_LOCAL_OPT_HPP_
#define PARABLOCK_LOCAL_OPT_HPP_

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace parablock {

struct SgdConfig {
  double eta_l = 0.01;
};

struct AdamWConfig {
  double eta_l = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-6;
  double weight_decay = 0.0;
  bool bias_correction = true;
  /// false: m̂ / (√v̂ + ε).  true: m̂ / √(v̂ + ε).
  bool eps_inside_sqrt = false;
};

using LocalOptimizer = std::variant<SgdConfig, AdamWConfig>;

/// Throws ConfigError when a field is outside its documented range.
void validate(const LocalOptimizer& opt);
double local_learning_rate(const LocalOptimizer& opt);

/// Moment estimates for the active block only. Fresh for every round.
struct OptimizerState {
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t step_count = 0;

  static OptimizerState Fresh(std::size_t block_dim) {
    return {std::vector<double>(block_dim, 0.0),
            std::vector<double>(block_dim, 0.0), 0};
  }
};

/// θ ← θ − η_l g, in place. Throws NumericError on a non-finite gradient.
void sgd_step(std::span<double> theta, std::span<const double> grad,
              const SgdConfig& cfg);

/// One decoupled-weight-decay Adam step, in place.
void adamw_step(std::span<double> theta, std::span<const double> grad,
                OptimizerState& state, const AdamWConfig& cfg);

}  // namespace parablock

#endif  // PARABLOCK_LOCAL_OPT_HPP_
