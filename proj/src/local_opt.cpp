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

#include "parablock/local_opt.hpp"

#include <cmath>
#include <string>

#include "parablock/errors.hpp"

namespace parablock {

namespace {

void check_shapes(std::size_t theta, std::size_t grad) {
  if (theta != grad) {
    throw ShapeError("block of size " + std::to_string(theta) +
                     " with gradient of size " + std::to_string(grad));
  }
}

void check_finite(std::span<const double> grad) {
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericError("non-finite gradient at block coordinate " +
                         std::to_string(k));
    }
  }
}

}  // namespace

void validate(const LocalOptimizer& opt) {
  if (const auto* sgd = std::get_if<SgdConfig>(&opt)) {
    if (!(sgd->eta_l > 0.0)) throw ConfigError("optimizer.eta_l", "must be > 0");
    return;
  }
  const auto& a = std::get<AdamWConfig>(opt);
  if (!(a.eta_l > 0.0)) throw ConfigError("optimizer.eta_l", "must be > 0");
  if (!(a.beta1 >= 0.0 && a.beta1 < 1.0)) {
    throw ConfigError("optimizer.beta1", "must be in [0, 1)");
  }
  if (!(a.beta2 >= 0.0 && a.beta2 < 1.0)) {
    throw ConfigError("optimizer.beta2", "must be in [0, 1)");
  }
  if (!(a.epsilon > 0.0)) throw ConfigError("optimizer.epsilon", "must be > 0");
  if (!(a.weight_decay >= 0.0)) {
    throw ConfigError("optimizer.weight_decay", "must be >= 0");
  }
}

double local_learning_rate(const LocalOptimizer& opt) {
  return std::visit([](const auto& c) { return c.eta_l; }, opt);
}

void sgd_step(std::span<double> theta, std::span<const double> grad,
              const SgdConfig& cfg) {
  check_shapes(theta.size(), grad.size());
  check_finite(grad);
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] -= cfg.eta_l * grad[k];
}

void adamw_step(std::span<double> theta, std::span<const double> grad,
                OptimizerState& state, const AdamWConfig& cfg) {
  check_shapes(theta.size(), grad.size());
  check_shapes(state.m.size(), grad.size());
  check_shapes(state.v.size(), grad.size());
  check_finite(grad);
  ++state.step_count;
  double m_scale = 1.0, v_scale = 1.0;
  if (cfg.bias_correction) {
    const auto k = static_cast<double>(state.step_count);
    m_scale = 1.0 / (1.0 - std::pow(cfg.beta1, k));
    v_scale = 1.0 / (1.0 - std::pow(cfg.beta2, k));
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double g = grad[k];
    state.m[k] = cfg.beta1 * state.m[k] + (1.0 - cfg.beta1) * g;
    state.v[k] = cfg.beta2 * state.v[k] + (1.0 - cfg.beta2) * g * g;
    const double m_hat = state.m[k] * m_scale;
    const double v_hat = state.v[k] * v_scale;
    const double denom = cfg.eps_inside_sqrt ? std::sqrt(v_hat + cfg.epsilon)
                                             : std::sqrt(v_hat) + cfg.epsilon;
    theta[k] -= cfg.eta_l * (m_hat / denom + cfg.weight_decay * theta[k]);
  }
}

}  // namespace parablock
