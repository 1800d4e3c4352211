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

// Experiment configuration: one JSON document describing the engine, the
// client objectives, the simulated network and where outputs go.
//
// Every object rejects keys it does not know. Errors are ConfigError with a
// dotted field path, e.g. "optimizer.eta_l: must be > 0".

#ifndef PARABLOCK_CONFIG_HPP_
#define PARABLOCK_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "parablock/engine.hpp"
#include "parablock/netsim.hpp"
#include "parablock/objectives.hpp"
#include "parablock/theory.hpp"

namespace parablock {

struct ObjectiveConfig {
  ObjectiveKind kind = ObjectiveKind::kQuadratic;
  QuadraticSuiteSpec quadratic;
  DataSuiteSpec data;
  /// Optional CSV dataset; replaces the generated mixture when set.
  std::shared_ptr<const SyntheticDataset> dataset;
};

struct InitConfig {
  enum class Kind { kZeros, kNormal };
  Kind kind = Kind::kZeros;
  double scale = 1.0;  // std of N(0, scale²) entries
};

struct OutputConfig {
  std::filesystem::path trace;
  std::filesystem::path summary;
  std::filesystem::path compare;
};

struct SweepConfig {
  std::vector<std::string> methods;  // "parablock", "fedbcd", "fedcybgd", "parablock+topk"
  std::vector<double> bandwidths;    // bytes/second, applied up and down
  std::vector<double> batch_sizes;
  double topk_ratio = 0.2;           // used by "+topk" methods
};

struct ScheduleConfig {
  bool corollary = false;  // derive η, η_l from T, K, N and L
  double c_eta = 1.0;
  double c_etal = 1.0;
};

struct RunConfig {
  EngineKind engine = EngineKind::kParaBlock;
  FedConfig fed;
  ObjectiveConfig objective;
  InitConfig init;
  LinkSpec link;
  ComputeSpec compute;
  OutputConfig output;
  SweepConfig sweep;
  ScheduleConfig schedule;
};

/// Parses and validates a JSON config. Relative paths (outputs, dataset)
/// resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir = ".");
/// Reads `path` and parses it with base_dir = its parent directory.
RunConfig load_run_config(const std::filesystem::path& path);

/// Model dimension implied by the objective section.
std::size_t objective_dimension(const ObjectiveConfig& cfg);

/// The concrete problem a config describes.
struct Instance {
  std::vector<Objective> objectives;
  ParamVector theta0;
  std::optional<DirichletPartition> data_partition;
  double smoothness = 0.0;  // L used for the step-size gate
  bool smoothness_is_estimate = false;
  std::optional<double> optimum;  // f_* when known in closed form
  std::optional<StepSizes> step_sizes;  // set when the corollary ran
};

/// Builds objectives and θ_0, applies the corollary step sizes when asked
/// (mutating cfg.fed), and estimates L.
Instance build_instance(RunConfig& cfg);

/// Bound inputs for a run of `cfg` on `inst`; F uses f_* when known and
/// 0 otherwise (every loss here is nonnegative).
BoundInputs bound_inputs(const RunConfig& cfg, const Instance& inst);

}  // namespace parablock

#endif  // PARABLOCK_CONFIG_HPP_
