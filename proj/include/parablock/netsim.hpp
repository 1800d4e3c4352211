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

// Simulated wall-clock accounting of federated rounds.
//
// Nothing here reads a clock: round times are pure functions of per-client
// compute cost, payload sizes and link specs. Bandwidths are bytes/second.
//
//   single-thread round   compute, then upload, then aggregate, then
//                         broadcast:
//                           max_i(p_i + up_i) + max_i(down_i) + 2·latency
//   overlapped round      the previous round's exchange runs beside this
//                         round's compute:
//                           max_i max(p_i, max_j up_j + down_i + 2·latency)

#ifndef PARABLOCK_NETSIM_HPP_
#define PARABLOCK_NETSIM_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "parablock/param.hpp"

namespace parablock {

enum class EngineKind { kParaBlock, kFedBcd, kFedCyBgd };

std::string to_string(EngineKind kind);
EngineKind parse_engine_kind(const std::string& name);

struct LinkSpec {
  std::vector<double> up_bw;    // bytes/second, per client
  std::vector<double> down_bw;  // bytes/second, per client
  double latency = 0.0;         // seconds per message

  static LinkSpec Homogeneous(std::size_t clients, double up, double down,
                              double latency = 0.0);
  void validate(std::size_t clients) const;
};

struct ComputeSpec {
  std::vector<double> sec_per_local_step;  // per client, at reference_batch
  double batch_size = 1.0;
  double reference_batch = 1.0;

  static ComputeSpec Homogeneous(std::size_t clients, double sec_per_step,
                                 double batch_size = 1.0,
                                 double reference_batch = 1.0);
  void validate(std::size_t clients) const;
  /// K local steps, scaled linearly by batch_size / reference_batch.
  double round_compute(std::size_t client, std::size_t local_steps) const;
};

/// Throws CohortError on an empty cohort or mismatched lengths.
double round_time_singlethread(std::span<const double> compute,
                               std::span<const double> upload,
                               std::span<const double> download,
                               double latency = 0.0);

/// `upload_prev` and `download_prev` empty means there is no exchange this
/// round (the first round of an overlapped run).
double round_time_parallel(std::span<const double> compute,
                           std::span<const double> upload_prev,
                           std::span<const double> download_prev,
                           double latency = 0.0);

/// What one round put on the wire, as recorded by an engine.
struct RoundComm {
  BlockId block;
  std::vector<std::size_t> cohort;           // clients that trained
  std::vector<std::uint64_t> upload_bytes;   // per cohort member
  std::uint64_t download_bytes = 0;          // aggregate sent to each client
  std::uint64_t block_bytes = 0;             // dense size of the block
};

struct TimelineInputs {
  EngineKind kind = EngineKind::kParaBlock;
  std::size_t num_clients = 1;
  std::size_t local_steps = 1;
  std::size_t staleness = 1;
  bool full_broadcast = false;
  std::uint64_t model_bytes = 0;
  std::vector<RoundComm> rounds;
};

struct RoundTiming {
  double compute_time = 0.0;
  double comm_time = 0.0;
  double round_wall = 0.0;
  double cum_wall = 0.0;
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
};

struct TimingTrace {
  std::vector<RoundTiming> rounds;
  double flush_time = 0.0;  // exchanges after the last round
  std::uint64_t flush_bytes_up = 0;
  std::uint64_t flush_bytes_down = 0;
  double total_wall = 0.0;  // Σ round_wall + flush_time

  std::uint64_t total_bytes_up() const;
  std::uint64_t total_bytes_down() const;
  double total_compute() const;
};

/// ParaBlock (staleness S ≥ 1): overlapped rounds, exchange of round t−S
/// during round t, then S serialized exchanges after the loop. S = 0 and
/// FedBCD use single-thread rounds. FedCyBGD: the elected client computes
/// and uploads, the next elected client downloads the block, and at the
/// end of every cycle of N rounds all clients download the blocks updated
/// in that cycle (the whole model with full_broadcast).
TimingTrace simulate_timeline(const TimelineInputs& inputs,
                              const LinkSpec& link,
                              const ComputeSpec& compute);

}  // namespace parablock

#endif  // PARABLOCK_NETSIM_HPP_
