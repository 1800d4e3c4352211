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

// Federated block-coordinate engines.
//
// ParaBlock overlaps round t's local block training with the exchange of
// round t−S's deltas (S = 1 by default). When the aggregate of round t−S
// arrives, each client replaces its own stale contribution on that block:
//
//   [θ^i]_{b_{t−S}} += η (Δ_{t−S} − Δ^i_{t−S})
//
// and the server applies [θ]_{b_{t−S}} += η Δ_{t−S}. Both sides then hold
// θ_0 + η Σ_s 1[b_s = b] Δ_s on every block without a pending local delta.
// The last S aggregates are applied after the loop.
//
// All engines are deterministic functions of (config, objectives, θ_0).
// Rounds are executed serially; simulated time is computed separately by
// simulate_timeline from the recorded RoundComm entries.

#ifndef PARABLOCK_ENGINE_HPP_
#define PARABLOCK_ENGINE_HPP_

#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "parablock/compression.hpp"
#include "parablock/local_opt.hpp"
#include "parablock/netsim.hpp"
#include "parablock/objectives.hpp"
#include "parablock/param.hpp"

namespace parablock {

// ---------------------------------------------------------------------------
// Block schedules

/// Uniform block per round from a dedicated stream; the seed defaults to the
/// run's master seed.
struct RandomSchedule {
  std::optional<std::uint64_t> seed;
};
struct SequentialSchedule {};
struct ReverseSchedule {};
/// Every refresh_every rounds (0 means B), rank blocks by the exact block
/// gradient norm at the global model, largest first, and emit that order.
struct GradientGuidedSchedule {
  std::size_t refresh_every = 0;
};
/// Replays a recorded schedule; must cover every round.
struct FixedSchedule {
  std::vector<BlockId> blocks;
};

using SchedulerKind = std::variant<RandomSchedule, SequentialSchedule,
                                   ReverseSchedule, GradientGuidedSchedule,
                                   FixedSchedule>;

class BlockScheduler {
 public:
  using GradientFn = std::function<std::vector<double>()>;

  BlockScheduler(SchedulerKind kind, const BlockPartition& partition,
                 std::uint64_t master_seed);

  /// `full_gradient` is only called on gradient-guided refresh rounds;
  /// SchedulerError if it is needed and empty.
  BlockId next(std::size_t round, const GradientFn& full_gradient = {});

 private:
  SchedulerKind kind_;
  BlockPartition partition_;
  std::uint64_t master_seed_;
  std::vector<BlockId> ranking_;
  std::size_t ranked_at_ = 0;
};

/// Stateless schedules only (random, sequential, reverse, fixed).
BlockId next_block(const SchedulerKind& kind, std::size_t round,
                   std::size_t num_blocks, std::uint64_t master_seed);

// ---------------------------------------------------------------------------
// Participation

struct FullParticipation {};
/// m clients per round, uniformly without replacement.
struct SampledParticipation {
  std::size_t m = 1;
  std::optional<std::uint64_t> seed;
};
using Participation = std::variant<FullParticipation, SampledParticipation>;

/// Ascending client ids taking part in `round`.
std::vector<std::size_t> draw_cohort(const Participation& participation,
                                     std::size_t num_clients,
                                     std::size_t round,
                                     std::uint64_t master_seed);

// ---------------------------------------------------------------------------
// Configuration and state

struct FedConfig {
  std::size_t num_clients = 1;
  std::size_t rounds = 1;
  std::size_t local_steps = 1;
  double eta = 1.0;
  LocalOptimizer optimizer = SgdConfig{};
  BlockPartition partition = make_partition(1, EqualBlocks{1});
  SchedulerKind scheduler = RandomSchedule{};
  std::size_t staleness = 1;  // 0 = synchronous
  Participation participation = FullParticipation{};
  std::optional<TopKConfig> compression;
  std::size_t batch_size = 0;  // minibatch rows for data objectives; 0 = all
  bool full_broadcast = false;  // FedCyBGD sync sends the whole model
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

struct RoundTrace {
  std::size_t round = 0;
  std::size_t block_id = 0;  // one-based
  double train_loss = 0.0;
  double block_grad_norm_sq = 0.0;  // ‖∇_{b_t} f(θ_t)‖², exact gradient
  double delta_norm_sq = 0.0;       // ‖Δ_t‖²
  double mean_client_delta_norm_sq = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
  double compute_time = 0.0;
  double comm_time = 0.0;
  double round_wall = 0.0;
  double cum_wall = 0.0;
  std::vector<std::size_t> participants;
};

struct AppliedDelta {
  std::size_t round = 0;
  BlockId block;
  std::vector<double> delta;  // aggregate Δ_round
};

struct ServerState {
  double eta = 1.0;
  ParamVector theta0;
  ParamVector theta;
  std::vector<AppliedDelta> log;
  BlockPartition partition = make_partition(1, EqualBlocks{1});

  /// θ_0 with every logged aggregate applied in log order.
  ParamVector replay() const;
};

struct PendingDelta {
  std::size_t round = 0;
  BlockId block;
  std::vector<double> delta;  // empty when the client sat the round out
};

struct ClientState {
  std::size_t id = 0;
  ParamVector theta;
  std::deque<PendingDelta> pending;
};

/// Everything an observer may inspect after a round (or after the final
/// flush, with `final` set and `round` equal to the number of rounds).
struct RoundSnapshot {
  std::size_t round = 0;
  BlockId block;
  bool final = false;
  const FedConfig* config = nullptr;
  std::span<const ClientState> clients;
  const ServerState* server = nullptr;
  std::span<const std::size_t> cohort;
  std::span<const std::vector<double>> local_deltas;  // indexed by client
  std::span<const double> aggregate;
};

class RoundObserver {
 public:
  virtual ~RoundObserver() = default;
  virtual void on_round(const RoundSnapshot& snapshot) = 0;
};

/// Test hook: perturbs one client's correction in the given round.
struct FaultInjection {
  std::size_t round = 1;
  std::size_t client = 0;
  double offset = 1e-3;
};

struct RunOptions {
  RoundObserver* observer = nullptr;
  std::optional<FaultInjection> fault;
};

struct RunResult {
  ParamVector theta_final;
  std::vector<RoundTrace> traces;
  std::vector<BlockId> schedule;
  TimelineInputs timeline;
  ServerState server;
  std::vector<ClientState> clients;  // ParaBlock only
};

// ---------------------------------------------------------------------------
// Operations

/// K optimizer steps on block b from θ_start with fresh optimizer state;
/// returns [θ_K]_b − [θ_start]_b. Coordinates outside b are never written.
std::vector<double> local_block_training(std::span<const double> theta_start,
                                         const BlockPartition& partition,
                                         BlockId block, std::size_t local_steps,
                                         const LocalOptimizer& optimizer,
                                         GradientStream& gradients);

RunResult parablock_run(const FedConfig& cfg,
                        std::span<const Objective> objectives,
                        const ParamVector& theta0,
                        const RunOptions& options = {});

/// Synchronous federated BCD: every round trains from the current global
/// model and the aggregate is applied before the next round.
RunResult fedbcd_run(const FedConfig& cfg,
                     std::span<const Objective> objectives,
                     const ParamVector& theta0,
                     const RunOptions& options = {});

/// Cyclic single-client BCD: client (t mod N) trains block b_t and the
/// server applies its delta unaveraged.
RunResult fedcybgd_run(const FedConfig& cfg,
                       std::span<const Objective> objectives,
                       const ParamVector& theta0,
                       const RunOptions& options = {});

/// Single-process BCD on one objective, drawing gradients from client 0's
/// streams so it lines up with one-client federated runs.
RunResult sequential_bcd_run(const FedConfig& cfg, const Objective& objective,
                             const ParamVector& theta0);

RunResult run_engine(EngineKind kind, const FedConfig& cfg,
                     std::span<const Objective> objectives,
                     const ParamVector& theta0,
                     const RunOptions& options = {});

/// Runs simulate_timeline on the recorded exchanges and copies the per-round
/// timing into the traces.
TimingTrace attach_timing(RunResult& result, const LinkSpec& link,
                          const ComputeSpec& compute);

}  // namespace parablock

#endif  // PARABLOCK_ENGINE_HPP_
