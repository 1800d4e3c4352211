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

#include "parablock/netsim.hpp"

#include <algorithm>
#include <set>

#include "parablock/errors.hpp"

namespace parablock {

std::string to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::kParaBlock:
      return "parablock";
    case EngineKind::kFedBcd:
      return "fedbcd";
    case EngineKind::kFedCyBgd:
      return "fedcybgd";
  }
  return "unknown";
}

EngineKind parse_engine_kind(const std::string& name) {
  if (name == "parablock") return EngineKind::kParaBlock;
  if (name == "fedbcd") return EngineKind::kFedBcd;
  if (name == "fedcybgd") return EngineKind::kFedCyBgd;
  throw ConfigError("engine", "unknown method '" + name + "'");
}

LinkSpec LinkSpec::Homogeneous(std::size_t clients, double up, double down,
                               double latency) {
  return {std::vector<double>(clients, up), std::vector<double>(clients, down),
          latency};
}

void LinkSpec::validate(std::size_t clients) const {
  if (up_bw.size() != clients || down_bw.size() != clients) {
    throw ConfigError("link", "bandwidth lists must have one entry per client");
  }
  for (double b : up_bw) {
    if (!(b > 0.0)) throw ConfigError("link.up_bw", "must be > 0");
  }
  for (double b : down_bw) {
    if (!(b > 0.0)) throw ConfigError("link.down_bw", "must be > 0");
  }
  if (!(latency >= 0.0)) throw ConfigError("link.latency", "must be >= 0");
}

ComputeSpec ComputeSpec::Homogeneous(std::size_t clients, double sec_per_step,
                                     double batch_size,
                                     double reference_batch) {
  return {std::vector<double>(clients, sec_per_step), batch_size,
          reference_batch};
}

void ComputeSpec::validate(std::size_t clients) const {
  if (sec_per_local_step.size() != clients) {
    throw ConfigError("compute.sec_per_local_step",
                      "must have one entry per client");
  }
  for (double s : sec_per_local_step) {
    if (!(s > 0.0)) throw ConfigError("compute.sec_per_local_step", "must be > 0");
  }
  if (!(batch_size > 0.0)) throw ConfigError("batch_size", "must be > 0");
  if (!(reference_batch > 0.0)) {
    throw ConfigError("compute.reference_batch", "must be > 0");
  }
}

double ComputeSpec::round_compute(std::size_t client,
                                  std::size_t local_steps) const {
  return static_cast<double>(local_steps) * sec_per_local_step.at(client) *
         (batch_size / reference_batch);
}

namespace {

double max_of(std::span<const double> xs) {
  double m = 0.0;
  for (double x : xs) m = std::max(m, x);
  return m;
}

}  // namespace

double round_time_singlethread(std::span<const double> compute,
                               std::span<const double> upload,
                               std::span<const double> download,
                               double latency) {
  if (compute.empty()) throw CohortError("round with an empty cohort");
  if (upload.size() != compute.size() || download.size() != compute.size()) {
    throw CohortError("compute, upload and download lengths differ");
  }
  double critical = 0.0;
  for (std::size_t i = 0; i < compute.size(); ++i) {
    critical = std::max(critical, compute[i] + upload[i]);
  }
  return critical + max_of(download) + 2.0 * latency;
}

double round_time_parallel(std::span<const double> compute,
                           std::span<const double> upload_prev,
                           std::span<const double> download_prev,
                           double latency) {
  if (compute.empty()) throw CohortError("round with an empty cohort");
  if (upload_prev.empty() && download_prev.empty()) return max_of(compute);
  if (upload_prev.size() != compute.size() ||
      download_prev.size() != compute.size()) {
    throw CohortError("compute, upload and download lengths differ");
  }
  const double aggregated_at = max_of(upload_prev) + latency;
  double wall = 0.0;
  for (std::size_t i = 0; i < compute.size(); ++i) {
    const double comm_finish = aggregated_at + download_prev[i] + latency;
    wall = std::max(wall, std::max(compute[i], comm_finish));
  }
  return wall;
}

std::uint64_t TimingTrace::total_bytes_up() const {
  std::uint64_t s = flush_bytes_up;
  for (const auto& r : rounds) s += r.bytes_up;
  return s;
}

std::uint64_t TimingTrace::total_bytes_down() const {
  std::uint64_t s = flush_bytes_down;
  for (const auto& r : rounds) s += r.bytes_down;
  return s;
}

double TimingTrace::total_compute() const {
  double s = 0.0;
  for (const auto& r : rounds) s += r.compute_time;
  return s;
}

namespace {

struct Exchange {
  std::vector<double> upload;    // per client, 0 for non-senders
  std::vector<double> download;  // per client
  std::uint64_t bytes_up = 0;
  std::uint64_t bytes_down = 0;
};

Exchange exchange_of(const RoundComm& rc, std::size_t clients,
                     const LinkSpec& link) {
  if (rc.upload_bytes.size() != rc.cohort.size()) {
    throw CohortError("upload byte counts do not match the cohort");
  }
  Exchange ex;
  ex.upload.assign(clients, 0.0);
  ex.download.assign(clients, 0.0);
  for (std::size_t n = 0; n < rc.cohort.size(); ++n) {
    const std::size_t j = rc.cohort[n];
    ex.upload.at(j) = static_cast<double>(rc.upload_bytes[n]) / link.up_bw[j];
    ex.bytes_up += rc.upload_bytes[n];
  }
  for (std::size_t i = 0; i < clients; ++i) {
    ex.download[i] = static_cast<double>(rc.download_bytes) / link.down_bw[i];
  }
  ex.bytes_down = rc.download_bytes * clients;
  return ex;
}

std::vector<double> compute_of(const RoundComm& rc, std::size_t clients,
                               std::size_t local_steps,
                               const ComputeSpec& compute) {
  if (rc.cohort.empty()) throw CohortError("round with an empty cohort");
  std::vector<double> p(clients, 0.0);
  for (std::size_t i : rc.cohort) p.at(i) = compute.round_compute(i, local_steps);
  return p;
}

double serialized_exchange(const Exchange& ex, double latency) {
  return max_of(ex.upload) + latency + max_of(ex.download) + latency;
}

void simulate_overlapped(const TimelineInputs& in, const LinkSpec& link,
                         const ComputeSpec& compute, TimingTrace& out) {
  const std::size_t T = in.rounds.size();
  const std::size_t S = in.staleness;
  for (std::size_t t = 0; t < T; ++t) {
    RoundTiming rt;
    const auto p = compute_of(in.rounds[t], in.num_clients, in.local_steps,
                              compute);
    rt.compute_time = max_of(p);
    if (t >= S) {
      const Exchange ex = exchange_of(in.rounds[t - S], in.num_clients, link);
      rt.round_wall = round_time_parallel(p, ex.upload, ex.download,
                                          link.latency);
      rt.comm_time = serialized_exchange(ex, link.latency);
      rt.bytes_up = ex.bytes_up;
      rt.bytes_down = ex.bytes_down;
    } else {
      rt.round_wall = round_time_parallel(p, {}, {}, link.latency);
    }
    out.rounds.push_back(rt);
  }
  for (std::size_t t = T > S ? T - S : 0; t < T; ++t) {
    const Exchange ex = exchange_of(in.rounds[t], in.num_clients, link);
    out.flush_time += serialized_exchange(ex, link.latency);
    out.flush_bytes_up += ex.bytes_up;
    out.flush_bytes_down += ex.bytes_down;
  }
}

void simulate_single_thread(const TimelineInputs& in, const LinkSpec& link,
                            const ComputeSpec& compute, TimingTrace& out) {
  for (const RoundComm& rc : in.rounds) {
    RoundTiming rt;
    const auto p = compute_of(rc, in.num_clients, in.local_steps, compute);
    const Exchange ex = exchange_of(rc, in.num_clients, link);
    rt.compute_time = max_of(p);
    rt.round_wall = round_time_singlethread(p, ex.upload, ex.download,
                                            link.latency);
    rt.comm_time = serialized_exchange(ex, link.latency);
    rt.bytes_up = ex.bytes_up;
    rt.bytes_down = ex.bytes_down;
    out.rounds.push_back(rt);
  }
}

void simulate_cyclic(const TimelineInputs& in, const LinkSpec& link,
                     const ComputeSpec& compute, TimingTrace& out) {
  const std::size_t N = in.num_clients;
  std::set<std::size_t> cycle_blocks;
  std::uint64_t cycle_bytes = 0;
  for (std::size_t t = 0; t < in.rounds.size(); ++t) {
    const RoundComm& rc = in.rounds[t];
    if (rc.cohort.size() != 1 || rc.upload_bytes.size() != 1) {
      throw CohortError("cyclic rounds have exactly one participant");
    }
    const std::size_t elected = rc.cohort.front();
    const std::size_t next = (elected + 1) % N;
    RoundTiming rt;
    const double p = compute.round_compute(elected, in.local_steps);
    const double up = static_cast<double>(rc.upload_bytes[0]) /
                      link.up_bw.at(elected);
    const double down = static_cast<double>(rc.block_bytes) / link.down_bw[next];
    rt.compute_time = p;
    rt.round_wall = round_time_singlethread(std::span(&p, 1), std::span(&up, 1),
                                            std::span(&down, 1), link.latency);
    rt.comm_time = up + down + 2.0 * link.latency;
    rt.bytes_up = rc.upload_bytes[0];
    rt.bytes_down = rc.block_bytes;

    if (cycle_blocks.insert(rc.block.value()).second) {
      cycle_bytes += rc.block_bytes;
    }
    if ((t + 1) % N == 0) {
      const std::uint64_t sync_bytes =
          in.full_broadcast ? in.model_bytes : cycle_bytes;
      double sync = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        sync = std::max(sync, static_cast<double>(sync_bytes) / link.down_bw[i]);
      }
      sync += link.latency;
      rt.round_wall += sync;
      rt.comm_time += sync;
      rt.bytes_down += sync_bytes * N;
      cycle_blocks.clear();
      cycle_bytes = 0;
    }
    out.rounds.push_back(rt);
  }
}

}  // namespace

TimingTrace simulate_timeline(const TimelineInputs& inputs,
                              const LinkSpec& link,
                              const ComputeSpec& compute) {
  if (inputs.num_clients == 0) throw CohortError("no clients");
  link.validate(inputs.num_clients);
  compute.validate(inputs.num_clients);
  if (inputs.kind == EngineKind::kParaBlock &&
      inputs.staleness > inputs.rounds.size()) {
    throw ConfigError("staleness", "exceeds the number of rounds");
  }

  TimingTrace out;
  switch (inputs.kind) {
    case EngineKind::kParaBlock:
      if (inputs.staleness == 0) {
        simulate_single_thread(inputs, link, compute, out);
      } else {
        simulate_overlapped(inputs, link, compute, out);
      }
      break;
    case EngineKind::kFedBcd:
      simulate_single_thread(inputs, link, compute, out);
      break;
    case EngineKind::kFedCyBgd:
      simulate_cyclic(inputs, link, compute, out);
      break;
  }
  double cum = 0.0;
  for (auto& r : out.rounds) {
    cum += r.round_wall;
    r.cum_wall = cum;
  }
  out.total_wall = cum + out.flush_time;
  return out;
}

}  // namespace parablock
