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

#include "parablock/config.hpp"

#include <string>
#include <variant>

#include "gtest/gtest.h"
#include "parablock/errors.hpp"

namespace parablock {
namespace {

constexpr const char* kMinimal = R"({
  "engine": "fedbcd",
  "seed": 3,
  "clients": 3,
  "rounds": 5,
  "local_steps": 2,
  "objective": {"kind": "quadratic", "dimension": 6},
  "optimizer": {"kind": "sgd", "eta_l": 0.01},
  "partition": {"kind": "equal", "blocks": 3}
})";

std::string FieldOf(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<no error>";
}

TEST(ConfigTest, ParsesMinimal) {
  const RunConfig cfg = parse_run_config(kMinimal);
  EXPECT_EQ(cfg.engine, EngineKind::kFedBcd);
  EXPECT_EQ(cfg.fed.num_clients, 3u);
  EXPECT_EQ(cfg.fed.rounds, 5u);
  EXPECT_EQ(cfg.fed.local_steps, 2u);
  EXPECT_EQ(cfg.fed.seed, 3u);
  EXPECT_EQ(cfg.fed.partition.num_blocks(), 3u);
  ASSERT_TRUE(std::holds_alternative<SgdConfig>(cfg.fed.optimizer));
  EXPECT_EQ(std::get<SgdConfig>(cfg.fed.optimizer).eta_l, 0.01);
}

TEST(ConfigTest, BuildsInstance) {
  RunConfig cfg = parse_run_config(kMinimal);
  const Instance inst = build_instance(cfg);
  EXPECT_EQ(inst.objectives.size(), 3u);
  EXPECT_EQ(inst.theta0.size(), 6u);
  EXPECT_TRUE(inst.optimum.has_value());
}

TEST(ConfigTest, UnknownTopLevelKey) {
  std::string text = kMinimal;
  text.insert(1, "\"roundz\": 4,");
  EXPECT_EQ(FieldOf(text), "roundz");
}

TEST(ConfigTest, UnknownNestedKeyGivesDottedPath) {
  std::string text = kMinimal;
  text.replace(text.find("\"eta_l\""), 7, "\"lr\"");
  EXPECT_EQ(FieldOf(text), "optimizer.lr");
}

TEST(ConfigTest, WrongTypeNamesField) {
  std::string text = kMinimal;
  text.replace(text.find("\"rounds\": 5"), 11, "\"rounds\": \"5\"");
  EXPECT_EQ(FieldOf(text), "rounds");
}

TEST(ConfigTest, BadEngineName) {
  std::string text = kMinimal;
  text.replace(text.find("fedbcd"), 6, "fedavg");
  EXPECT_EQ(FieldOf(text), "engine");
}

TEST(ConfigTest, MalformedJson) {
  EXPECT_THROW(parse_run_config("{\"rounds\": "), ConfigError);
}

TEST(ConfigTest, ScheduledRatesOverrideConfig) {
  std::string text = kMinimal;
  text.insert(1, "\"schedule\": {\"corollary\": true, \"c_eta\": 1, \"c_etal\": 1},");
  RunConfig cfg = parse_run_config(text);
  const Instance inst = build_instance(cfg);
  ASSERT_TRUE(inst.step_sizes.has_value());
  EXPECT_EQ(cfg.fed.eta, inst.step_sizes->eta);
  EXPECT_TRUE(lr_feasible(cfg.fed.eta, inst.step_sizes->eta_l, 2,
                          inst.smoothness)
                  .ok());
}

}  // namespace
}  // namespace parablock
