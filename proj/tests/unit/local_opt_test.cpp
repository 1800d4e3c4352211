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
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "parablock/errors.hpp"

namespace parablock {
namespace {

TEST(SgdStepTest, OneStep) {
  std::vector<double> theta{1};
  sgd_step(theta, std::vector<double>{1}, SgdConfig{0.1});
  EXPECT_EQ(theta, (std::vector<double>{0.9}));
}

TEST(SgdStepTest, ZeroGradientLeavesModel) {
  std::vector<double> theta{1, -2};
  sgd_step(theta, std::vector<double>{0, 0}, SgdConfig{0.1});
  EXPECT_EQ(theta, (std::vector<double>{1, -2}));
}

TEST(SgdStepTest, Componentwise) {
  std::vector<double> theta{1, 2};
  sgd_step(theta, std::vector<double>{2, -2}, SgdConfig{0.5});
  EXPECT_EQ(theta, (std::vector<double>{0, 3}));
}

TEST(SgdStepTest, RejectsNonFiniteGradient) {
  std::vector<double> theta{1};
  EXPECT_THROW(sgd_step(theta, std::vector<double>{NAN}, SgdConfig{0.1}),
               NumericError);
  EXPECT_THROW(sgd_step(theta,
                        std::vector<double>{std::numeric_limits<double>::infinity()},
                        SgdConfig{0.1}),
               NumericError);
}

TEST(SgdStepTest, RejectsShapeMismatch) {
  std::vector<double> theta{1, 2};
  EXPECT_THROW(sgd_step(theta, std::vector<double>{1}, SgdConfig{0.1}),
               ShapeError);
}

TEST(AdamWStepTest, FirstBiasCorrectedStep) {
  // m̂ = g, v̂ = g², so the step is η_l g / (|g| + ε).
  std::vector<double> theta{1};
  auto state = OptimizerState::Fresh(1);
  AdamWConfig cfg;
  cfg.eta_l = 0.1;
  adamw_step(theta, std::vector<double>{2}, state, cfg);
  const double expected = 1.0 - 0.1 * 2.0 / (2.0 + 1e-6);
  EXPECT_NEAR(theta[0], expected, 1e-15);
  EXPECT_NEAR(1.0 - theta[0], 0.09999995, 1e-9);
  EXPECT_EQ(state.step_count, 1u);
}

TEST(AdamWStepTest, ZeroGradientAtFreshState) {
  std::vector<double> theta{1, -1};
  auto state = OptimizerState::Fresh(2);
  adamw_step(theta, std::vector<double>{0, 0}, state, AdamWConfig{});
  EXPECT_EQ(theta, (std::vector<double>{1, -1}));
}

TEST(AdamWStepTest, ZeroBetasGiveSignLikeStep) {
  AdamWConfig cfg;
  cfg.eta_l = 0.05;
  cfg.beta1 = 0.0;
  cfg.beta2 = 0.0;
  cfg.epsilon = 0.3;
  for (bool bias : {true, false}) {
    cfg.bias_correction = bias;
    std::vector<double> theta{0.5, 0.5, 0.5};
    const std::vector<double> g{2.0, -0.1, 0.0};
    auto state = OptimizerState::Fresh(3);
    // Two steps: history is forgotten each time with zero betas.
    adamw_step(theta, g, state, cfg);
    adamw_step(theta, g, state, cfg);
    for (std::size_t k = 0; k < 3; ++k) {
      const double step = 0.05 * g[k] / (std::fabs(g[k]) + 0.3);
      EXPECT_NEAR(theta[k], 0.5 - 2 * step, 1e-15) << "k=" << k;
    }
  }
}

TEST(AdamWStepTest, EpsilonInsideSqrtVariant) {
  AdamWConfig cfg;
  cfg.eta_l = 0.1;
  cfg.eps_inside_sqrt = true;
  std::vector<double> theta{1};
  auto state = OptimizerState::Fresh(1);
  adamw_step(theta, std::vector<double>{2}, state, cfg);
  EXPECT_NEAR(theta[0], 1.0 - 0.1 * 2.0 / std::sqrt(4.0 + 1e-6), 1e-15);
}

TEST(AdamWStepTest, DecoupledWeightDecay) {
  AdamWConfig cfg;
  cfg.eta_l = 0.1;
  cfg.weight_decay = 0.5;
  std::vector<double> theta{2};
  auto state = OptimizerState::Fresh(1);
  adamw_step(theta, std::vector<double>{0}, state, cfg);
  EXPECT_NEAR(theta[0], 2.0 - 0.1 * 0.5 * 2.0, 1e-15);
}

TEST(AdamWStepTest, RejectsNonFiniteGradient) {
  std::vector<double> theta{1};
  auto state = OptimizerState::Fresh(1);
  EXPECT_THROW(adamw_step(theta, std::vector<double>{NAN}, state, AdamWConfig{}),
               NumericError);
}

TEST(ValidateTest, RejectsOutOfRangeFields) {
  EXPECT_THROW(validate(SgdConfig{0.0}), ConfigError);
  AdamWConfig a;
  a.beta1 = 1.0;
  EXPECT_THROW(validate(a), ConfigError);
  a = AdamWConfig{};
  a.epsilon = 0.0;
  EXPECT_THROW(validate(a), ConfigError);
  a = AdamWConfig{};
  a.weight_decay = -1.0;
  EXPECT_THROW(validate(a), ConfigError);
  EXPECT_NO_THROW(validate(AdamWConfig{}));
}

TEST(ValidateTest, ErrorNamesTheField) {
  try {
    validate(SgdConfig{-1.0});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "optimizer.eta_l");
  }
}

}  // namespace
}  // namespace parablock
