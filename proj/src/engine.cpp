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

#include "parablock/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "parablock/errors.hpp"
#include "parablock/rng.hpp"

namespace parablock {

// ---------------------------------------------------------------------------
// Schedules

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

BlockId random_block(std::uint64_t seed, std::size_t round, std::size_t B) {
  Rng rng(derive_seed(seed, 0, round, StreamTag::kScheduler));
  return BlockId(1 + static_cast<std::size_t>(rng.uniform_index(B)));
}

BlockId fixed_block(const FixedSchedule& s, std::size_t round, std::size_t B) {
  if (round >= s.blocks.size()) {
    throw SchedulerError("fixed schedule has no entry for round " +
                         std::to_string(round));
  }
  const BlockId b = s.blocks[round];
  if (b.value() < 1 || b.value() > B) {
    throw SchedulerError("fixed schedule block " + std::to_string(b.value()) +
                         " outside [1," + std::to_string(B) + "]");
  }
  return b;
}

}  // namespace

BlockId next_block(const SchedulerKind& kind, std::size_t round,
                   std::size_t num_blocks, std::uint64_t master_seed) {
  if (num_blocks == 0) throw SchedulerError("no blocks to schedule");
  return std::visit(
      Overloaded{
          [&](const RandomSchedule& s) {
            return random_block(s.seed.value_or(master_seed), round,
                                num_blocks);
          },
          [&](const SequentialSchedule&) {
            return BlockId(round % num_blocks + 1);
          },
          [&](const ReverseSchedule&) {
            return BlockId(num_blocks - round % num_blocks);
          },
          [&](const FixedSchedule& s) {
            return fixed_block(s, round, num_blocks);
          },
          [&](const GradientGuidedSchedule&) -> BlockId {
            throw SchedulerError(
                "gradient-guided scheduling needs a BlockScheduler");
          },
      },
      kind);
}

BlockScheduler::BlockScheduler(SchedulerKind kind,
                               const BlockPartition& partition,
                               std::uint64_t master_seed)
    : kind_(std::move(kind)), partition_(partition), master_seed_(master_seed) {}

BlockId BlockScheduler::next(std::size_t round,
                             const GradientFn& full_gradient) {
  const auto* guided = std::get_if<GradientGuidedSchedule>(&kind_);
  if (guided == nullptr) {
    return next_block(kind_, round, partition_.num_blocks(), master_seed_);
  }
  const std::size_t B = partition_.num_blocks();
  const std::size_t refresh =
      guided->refresh_every == 0 ? B : guided->refresh_every;
  if (ranking_.empty() || round - ranked_at_ >= refresh) {
    if (!full_gradient) {
      throw SchedulerError("gradient-guided refresh at round " +
                           std::to_string(round) + " without gradient info");
    }
    const std::vector<double> g = full_gradient();
    if (g.size() != partition_.dimension()) {
      throw SchedulerError("gradient dimension does not match the partition");
    }
    std::vector<double> norms(B);
    ranking_.clear();
    for (std::size_t b = 1; b <= B; ++b) {
      norms[b - 1] = norm_sq(block_view(std::span<const double>(g), partition_,
                                        BlockId(b)));
      ranking_.emplace_back(b);
    }
    std::stable_sort(ranking_.begin(), ranking_.end(),
                     [&](BlockId a, BlockId b) {
                       return norms[a.index()] > norms[b.index()];
                     });
    ranked_at_ = round;
  }
  return ranking_[(round - ranked_at_) % B];
}

std::vector<std::size_t> draw_cohort(const Participation& participation,
                                     std::size_t num_clients,
                                     std::size_t round,
                                     std::uint64_t master_seed) {
  std::vector<std::size_t> all(num_clients);
  std::iota(all.begin(), all.end(), 0);
  const auto* sampled = std::get_if<SampledParticipation>(&participation);
  if (sampled == nullptr || sampled->m >= num_clients) return all;
  if (sampled->m == 0) throw CohortError("participation m must be >= 1");
  Rng rng(derive_seed(sampled->seed.value_or(master_seed), 0, round,
                      StreamTag::kParticipation));
  for (std::size_t k = 0; k < sampled->m; ++k) {
    const std::size_t j =
        k + static_cast<std::size_t>(rng.uniform_index(num_clients - k));
    std::swap(all[k], all[j]);
  }
  all.resize(sampled->m);
  std::sort(all.begin(), all.end());
  return all;
}

// ---------------------------------------------------------------------------
// Config

void FedConfig::validate() const {
  if (num_clients == 0) throw ConfigError("num_clients", "must be >= 1");
  if (rounds == 0) throw ConfigError("rounds", "must be >= 1");
  if (local_steps == 0) throw ConfigError("local_steps", "must be >= 1");
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ConfigError("eta", "must be > 0");
  }
  if (staleness > rounds) {
    throw ConfigError("staleness", "must not exceed the number of rounds");
  }
  parablock::validate(optimizer);
  if (compression) compression->validate();
  if (const auto* s = std::get_if<SampledParticipation>(&participation)) {
    if (s->m == 0 || s->m > num_clients) {
      throw ConfigError("participation.m", "must be in [1, num_clients]");
    }
  }
  if (const auto* f = std::get_if<FixedSchedule>(&scheduler)) {
    if (f->blocks.size() < rounds) {
      throw ConfigError("scheduler.blocks", "fewer entries than rounds");
    }
  }
}

ParamVector ServerState::replay() const {
  ParamVector theta = theta0;
  for (const AppliedDelta& entry : log) {
    axpy(eta, entry.delta, block_view(theta, partition, entry.block));
  }
  return theta;
}

// ---------------------------------------------------------------------------
// Local training

std::vector<double> local_block_training(std::span<const double> theta_start,
                                         const BlockPartition& partition,
                                         BlockId block, std::size_t local_steps,
                                         const LocalOptimizer& optimizer,
                                         GradientStream& gradients) {
  if (local_steps == 0) throw ConfigError("local_steps", "must be >= 1");
  const BlockRange range = partition.range(block);
  if (theta_start.size() != partition.dimension()) {
    throw ShapeError("model does not match the partition");
  }
  std::vector<double> theta(theta_start.begin(), theta_start.end());
  std::vector<double> grad(theta.size());
  std::span<double> active(theta.data() + range.begin, range.size());
  std::span<const double> active_grad(grad.data() + range.begin, range.size());
  OptimizerState state = OptimizerState::Fresh(range.size());

  for (std::size_t k = 0; k < local_steps; ++k) {
    try {
      gradients.next(theta, grad);
      std::visit(Overloaded{
                     [&](const SgdConfig& c) { sgd_step(active, active_grad, c); },
                     [&](const AdamWConfig& c) {
                       adamw_step(active, active_grad, state, c);
                     },
                 },
                 optimizer);
    } catch (const NumericError& e) {
      throw NumericError(e.detail(), {std::nullopt, std::nullopt, k});
    }
    for (double x : active) {
      if (!std::isfinite(x)) {
        throw NumericError("non-finite parameter after local update",
                           {std::nullopt, std::nullopt, k});
      }
    }
  }

  std::vector<double> delta(range.size());
  for (std::size_t n = 0; n < range.size(); ++n) {
    delta[n] = active[n] - theta_start[range.begin + n];
  }
  return delta;
}

// ---------------------------------------------------------------------------
// Engines

namespace {

void check_inputs(const FedConfig& cfg, std::span<const Objective> objectives,
                  const ParamVector& theta0) {
  cfg.validate();
  if (objectives.size() != cfg.num_clients) {
    throw ConfigError("num_clients", "expected " +
                                         std::to_string(cfg.num_clients) +
                                         " objectives, got " +
                                         std::to_string(objectives.size()));
  }
  if (theta0.size() != cfg.partition.dimension()) {
    throw ShapeError("initial model dimension " +
                     std::to_string(theta0.size()) +
                     " does not match the partition dimension " +
                     std::to_string(cfg.partition.dimension()));
  }
  for (const auto& o : objectives) {
    if (o.dimension() != theta0.size()) {
      throw ShapeError("objective dimension " + std::to_string(o.dimension()) +
                       " does not match the model");
    }
  }
  if (!theta0.all_finite()) throw NumericError("non-finite initial model");
}

// Trains client `client` on `block` from `theta`, with round/client context
// on numeric failures.
std::vector<double> train_client(const FedConfig& cfg,
                                 const Objective& objective,
                                 std::span<const double> theta,
                                 std::size_t client, std::size_t round,
                                 BlockId block) {
  GradientStream stream(
      objective, derive_seed(cfg.seed, client, round, StreamTag::kGradient),
      cfg.batch_size);
  try {
    return local_block_training(theta, cfg.partition, block, cfg.local_steps,
                                cfg.optimizer, stream);
  } catch (const NumericError& e) {
    throw e.WithRound(round, client);
  }
}

// Applies uplink compression in place; returns the upload payload in bytes.
std::uint64_t prepare_upload(const FedConfig& cfg, std::vector<double>& delta) {
  if (!cfg.compression) return dense_bytes(delta.size());
  delta = decompress(topk_compress(delta, *cfg.compression));
  return payload_bytes(delta.size(), *cfg.compression);
}

// Ascending-id mean of the cohort's deltas; applies downlink compression.
std::vector<double> aggregate(const FedConfig& cfg,
                              std::span<const std::vector<double>> deltas,
                              std::span<const std::size_t> cohort,
                              std::size_t block_dim,
                              std::uint64_t& download_bytes) {
  std::vector<double> sum(block_dim, 0.0);
  for (std::size_t i : cohort) {
    for (std::size_t k = 0; k < block_dim; ++k) sum[k] += deltas[i][k];
  }
  const auto m = static_cast<double>(cohort.size());
  for (double& x : sum) x /= m;
  download_bytes = dense_bytes(block_dim);
  if (cfg.compression && cfg.compression->compress_downlink) {
    sum = decompress(topk_compress(sum, *cfg.compression));
    download_bytes = payload_bytes(block_dim, *cfg.compression);
  }
  return sum;
}

RoundTrace measure(std::span<const Objective> objectives,
                   const BlockPartition& partition,
                   const ParamVector& theta, std::size_t round, BlockId block) {
  RoundTrace rt;
  rt.round = round;
  rt.block_id = block.value();
  rt.train_loss = global_loss(objectives, theta.values());
  const std::vector<double> g = global_grad(objectives, theta.values());
  rt.block_grad_norm_sq =
      norm_sq(block_view(std::span<const double>(g), partition, block));
  return rt;
}

void record_delta_stats(RoundTrace& rt,
                        std::span<const std::vector<double>> deltas,
                        std::span<const std::size_t> cohort,
                        std::span<const double> agg) {
  rt.delta_norm_sq = norm_sq(agg);
  double acc = 0.0;
  for (std::size_t i : cohort) acc += norm_sq(deltas[i]);
  rt.mean_client_delta_norm_sq = acc / static_cast<double>(cohort.size());
  rt.participants.assign(cohort.begin(), cohort.end());
}

TimelineInputs timeline_header(EngineKind kind, const FedConfig& cfg) {
  TimelineInputs tl;
  tl.kind = kind;
  tl.num_clients = cfg.num_clients;
  tl.local_steps = cfg.local_steps;
  tl.staleness = cfg.staleness;
  tl.full_broadcast = cfg.full_broadcast;
  tl.model_bytes = dense_bytes(cfg.partition.dimension());
  return tl;
}

ServerState make_server(const FedConfig& cfg, const ParamVector& theta0) {
  ServerState server;
  server.eta = cfg.eta;
  server.theta0 = theta0;
  server.theta = theta0;
  server.partition = cfg.partition;
  return server;
}

void apply_to_server(ServerState& server, std::size_t round, BlockId block,
                     std::vector<double> agg) {
  axpy(server.eta, agg, block_view(server.theta, server.partition, block));
  server.log.push_back({round, block, std::move(agg)});
}

BlockScheduler::GradientFn global_gradient_at(
    std::span<const Objective> objectives, const ParamVector& theta) {
  return [objectives, &theta] {
    return global_grad(objectives, theta.values());
  };
}

}  // namespace

RunResult parablock_run(const FedConfig& cfg,
                        std::span<const Objective> objectives,
                        const ParamVector& theta0, const RunOptions& options) {
  check_inputs(cfg, objectives, theta0);
  const std::size_t N = cfg.num_clients;
  const std::size_t S = cfg.staleness;

  RunResult result;
  result.server = make_server(cfg, theta0);
  result.timeline = timeline_header(EngineKind::kParaBlock, cfg);
  ServerState& server = result.server;
  std::vector<ClientState>& clients = result.clients;
  for (std::size_t i = 0; i < N; ++i) clients.push_back({i, theta0, {}});

  struct InFlight {
    std::size_t round;
    BlockId block;
    std::vector<double> aggregate;
  };
  std::deque<InFlight> in_flight;
  BlockScheduler scheduler(cfg.scheduler, cfg.partition, cfg.seed);

  // Client correction and server update for the oldest aggregate.
  auto settle_oldest = [&](std::size_t applying_round) {
    InFlight due = std::move(in_flight.front());
    in_flight.pop_front();
    for (ClientState& c : clients) {
      PendingDelta own = std::move(c.pending.front());
      c.pending.pop_front();
      auto view = block_view(c.theta, cfg.partition, due.block);
      for (std::size_t k = 0; k < view.size(); ++k) {
        const double mine = own.delta.empty() ? 0.0 : own.delta[k];
        view[k] += cfg.eta * (due.aggregate[k] - mine);
      }
      if (options.fault && options.fault->round == applying_round &&
          options.fault->client == c.id) {
        view[0] += options.fault->offset;
      }
    }
    apply_to_server(server, due.round, due.block, std::move(due.aggregate));
  };

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    const BlockId b =
        scheduler.next(t, global_gradient_at(objectives, server.theta));
    result.schedule.push_back(b);
    const std::vector<std::size_t> cohort =
        draw_cohort(cfg.participation, N, t, cfg.seed);
    const std::size_t block_dim = cfg.partition.block_size(b);

    // Compute thread.
    std::vector<std::vector<double>> deltas(N);
    RoundComm comm;
    comm.block = b;
    comm.cohort = cohort;
    comm.block_bytes = dense_bytes(block_dim);
    for (std::size_t i : cohort) {
      deltas[i] = train_client(cfg, objectives[i], clients[i].theta.values(), i,
                               t, b);
      comm.upload_bytes.push_back(prepare_upload(cfg, deltas[i]));
    }
    std::vector<double> agg =
        aggregate(cfg, deltas, cohort, block_dim, comm.download_bytes);
    result.timeline.rounds.push_back(std::move(comm));

    RoundTrace rt;
    record_delta_stats(rt, deltas, cohort, agg);
    in_flight.push_back({t, b, agg});

    // Aggregates from earlier rounds land before this round's local delta.
    if (S > 0 && t >= S) settle_oldest(t);
    for (ClientState& c : clients) {
      if (!deltas[c.id].empty()) {
        axpy(cfg.eta, deltas[c.id], block_view(c.theta, cfg.partition, b));
      }
      c.pending.push_back({t, b, deltas[c.id]});
    }
    if (S == 0) settle_oldest(t);

    RoundTrace m = measure(objectives, cfg.partition, server.theta, t, b);
    m.delta_norm_sq = rt.delta_norm_sq;
    m.mean_client_delta_norm_sq = rt.mean_client_delta_norm_sq;
    m.participants = std::move(rt.participants);
    result.traces.push_back(std::move(m));

    if (options.observer) {
      RoundSnapshot snap;
      snap.round = t;
      snap.block = b;
      snap.config = &cfg;
      snap.clients = clients;
      snap.server = &server;
      snap.cohort = cohort;
      snap.local_deltas = deltas;
      snap.aggregate = agg;
      options.observer->on_round(snap);
    }
  }

  // Final flush: remaining aggregates in round order.
  std::size_t flush_round = cfg.rounds;
  while (!in_flight.empty()) settle_oldest(flush_round++);
  if (options.observer) {
    RoundSnapshot snap;
    snap.round = cfg.rounds;
    snap.final = true;
    snap.config = &cfg;
    snap.clients = clients;
    snap.server = &server;
    options.observer->on_round(snap);
  }
  result.theta_final = server.theta;
  return result;
}

namespace {

// Shared loop of the synchronous engines. `pick_cohort` returns the clients
// that train in round t; `averaged` selects mean vs. single-delta update.
template <typename CohortFn>
RunResult synchronous_run(EngineKind kind, const FedConfig& cfg,
                          std::span<const Objective> objectives,
                          const ParamVector& theta0, const RunOptions& options,
                          CohortFn pick_cohort) {
  check_inputs(cfg, objectives, theta0);
  const std::size_t N = cfg.num_clients;
  RunResult result;
  result.server = make_server(cfg, theta0);
  result.timeline = timeline_header(kind, cfg);
  ServerState& server = result.server;
  BlockScheduler scheduler(cfg.scheduler, cfg.partition, cfg.seed);

  for (std::size_t t = 0; t < cfg.rounds; ++t) {
    const BlockId b =
        scheduler.next(t, global_gradient_at(objectives, server.theta));
    result.schedule.push_back(b);
    const std::vector<std::size_t> cohort = pick_cohort(t);
    const std::size_t block_dim = cfg.partition.block_size(b);
    RoundTrace rt = measure(objectives, cfg.partition, server.theta, t, b);

    std::vector<std::vector<double>> deltas(N);
    RoundComm comm;
    comm.block = b;
    comm.cohort = cohort;
    comm.block_bytes = dense_bytes(block_dim);
    for (std::size_t i : cohort) {
      deltas[i] = train_client(cfg, objectives[i], server.theta.values(), i, t,
                               b);
      comm.upload_bytes.push_back(prepare_upload(cfg, deltas[i]));
    }
    std::vector<double> agg =
        aggregate(cfg, deltas, cohort, block_dim, comm.download_bytes);
    result.timeline.rounds.push_back(std::move(comm));
    record_delta_stats(rt, deltas, cohort, agg);
    apply_to_server(server, t, b, agg);
    result.traces.push_back(std::move(rt));

    if (options.observer) {
      RoundSnapshot snap;
      snap.round = t;
      snap.block = b;
      snap.config = &cfg;
      snap.server = &server;
      snap.cohort = cohort;
      snap.local_deltas = deltas;
      snap.aggregate = agg;
      options.observer->on_round(snap);
    }
  }
  result.theta_final = server.theta;
  return result;
}

}  // namespace

RunResult fedbcd_run(const FedConfig& cfg,
                     std::span<const Objective> objectives,
                     const ParamVector& theta0, const RunOptions& options) {
  return synchronous_run(EngineKind::kFedBcd, cfg, objectives, theta0, options,
                         [&](std::size_t t) {
                           return draw_cohort(cfg.participation,
                                              cfg.num_clients, t, cfg.seed);
                         });
}

RunResult fedcybgd_run(const FedConfig& cfg,
                       std::span<const Objective> objectives,
                       const ParamVector& theta0, const RunOptions& options) {
  // A cohort of one makes the aggregate the elected client's own delta.
  return synchronous_run(EngineKind::kFedCyBgd, cfg, objectives, theta0,
                         options, [&](std::size_t t) {
                           return std::vector<std::size_t>{t % cfg.num_clients};
                         });
}

RunResult sequential_bcd_run(const FedConfig& cfg, const Objective& objective,
                             const ParamVector& theta0) {
  FedConfig single = cfg;
  single.num_clients = 1;
  single.participation = FullParticipation{};
  single.compression.reset();
  const std::span<const Objective> objectives(&objective, 1);
  check_inputs(single, objectives, theta0);

  RunResult result;
  result.server = make_server(single, theta0);
  ParamVector& theta = result.server.theta;
  BlockScheduler scheduler(single.scheduler, single.partition, single.seed);
  for (std::size_t t = 0; t < single.rounds; ++t) {
    const BlockId b = scheduler.next(t, global_gradient_at(objectives, theta));
    result.schedule.push_back(b);
    RoundTrace rt = measure(objectives, single.partition, theta, t, b);
    std::vector<double> delta =
        train_client(single, objective, theta.values(), 0, t, b);
    rt.delta_norm_sq = norm_sq(delta);
    rt.mean_client_delta_norm_sq = rt.delta_norm_sq;
    rt.participants = {0};
    apply_to_server(result.server, t, b, std::move(delta));
    result.traces.push_back(std::move(rt));
  }
  result.theta_final = theta;
  return result;
}

RunResult run_engine(EngineKind kind, const FedConfig& cfg,
                     std::span<const Objective> objectives,
                     const ParamVector& theta0, const RunOptions& options) {
  switch (kind) {
    case EngineKind::kParaBlock:
      return parablock_run(cfg, objectives, theta0, options);
    case EngineKind::kFedBcd:
      return fedbcd_run(cfg, objectives, theta0, options);
    case EngineKind::kFedCyBgd:
      return fedcybgd_run(cfg, objectives, theta0, options);
  }
  throw ConfigError("engine", "unknown engine");
}

TimingTrace attach_timing(RunResult& result, const LinkSpec& link,
                          const ComputeSpec& compute) {
  TimingTrace timing = simulate_timeline(result.timeline, link, compute);
  for (std::size_t t = 0; t < result.traces.size(); ++t) {
    RoundTrace& rt = result.traces[t];
    const RoundTiming& rtm = timing.rounds.at(t);
    rt.bytes_up = rtm.bytes_up;
    rt.bytes_down = rtm.bytes_down;
    rt.compute_time = rtm.compute_time;
    rt.comm_time = rtm.comm_time;
    rt.round_wall = rtm.round_wall;
    rt.cum_wall = rtm.cum_wall;
  }
  return timing;
}

}  // namespace parablock
