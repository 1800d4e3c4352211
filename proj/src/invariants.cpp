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

#include "parablock/invariants.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace parablock {

std::string to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kReplay:
      return "replay";
    case ViolationKind::kAggregation:
      return "aggregation";
    case ViolationKind::kConsistency:
      return "consistency";
  }
  return "unknown";
}

std::string Violation::describe() const {
  std::string out = to_string(kind) + " violation";
  out += final ? " after final flush" : " at round " + std::to_string(round);
  if (client) out += ", client " + std::to_string(*client);
  out += ", block " + std::to_string(block.value());
  out += ", coordinate " + std::to_string(coordinate);
  char buf[64];
  std::snprintf(buf, sizeof buf, ", rel error %.3e", rel_error);
  return out + buf;
}

ConsistencyChecker::ConsistencyChecker(double rel_tol) : rel_tol_(rel_tol) {}

std::optional<Violation> ConsistencyChecker::first_violation() const {
  if (violations_.empty()) return std::nullopt;
  return violations_.front();
}

void ConsistencyChecker::compare(double actual, double expected,
                                 std::size_t coord, const RoundSnapshot& snap,
                                 ViolationKind kind,
                                 std::optional<std::size_t> client,
                                 BlockId block) {
  if (actual == expected) return;
  const double scale =
      std::max(budget_[coord], std::numeric_limits<double>::min());
  const double rel = std::isfinite(actual) && std::isfinite(expected)
                         ? std::fabs(actual - expected) / scale
                         : std::numeric_limits<double>::infinity();
  max_rel_error_ = std::max(max_rel_error_, rel);
  if (rel > rel_tol_) {
    violations_.push_back(
        {kind, snap.round, snap.final, client, block, coord, rel});
  }
}

void ConsistencyChecker::on_round(const RoundSnapshot& snap) {
  const ServerState& server = *snap.server;
  const BlockPartition& partition = server.partition;
  const double eta = server.eta;
  const std::size_t d = partition.dimension();
  if (budget_.empty()) {
    budget_.resize(d);
    for (std::size_t k = 0; k < d; ++k) budget_[k] = std::fabs(server.theta0[k]);
  }
  ++snapshots_;

  if (!snap.final) {
    const BlockRange r = partition.range(snap.block);
    for (std::size_t n = 0; n < r.size(); ++n) {
      double widest = 0.0;
      for (std::size_t i : snap.cohort) {
        widest = std::max(widest, std::fabs(snap.local_deltas[i][n]));
      }
      budget_[r.begin + n] +=
          std::fabs(eta) * (std::fabs(snap.aggregate[n]) + 2.0 * widest);
    }

    const bool downlink_compressed =
        snap.config != nullptr && snap.config->compression &&
        snap.config->compression->compress_downlink;
    if (!downlink_compressed && !snap.cohort.empty()) {
      std::vector<double> mean(r.size(), 0.0);
      for (std::size_t i : snap.cohort) {
        for (std::size_t n = 0; n < r.size(); ++n) {
          mean[n] += snap.local_deltas[i][n];
        }
      }
      for (std::size_t n = 0; n < r.size(); ++n) {
        mean[n] /= static_cast<double>(snap.cohort.size());
        compare(snap.aggregate[n], mean[n], r.begin + n, snap,
                ViolationKind::kAggregation, std::nullopt, snap.block);
      }
    }
  }

  const ParamVector replayed = server.replay();
  for (std::size_t k = 0; k < d; ++k) {
    compare(server.theta[k], replayed[k], k, snap, ViolationKind::kReplay,
            std::nullopt, BlockId(1));
  }
  // Report the block of the offending coordinate, not block 1.
  for (auto& v : violations_) {
    if (v.kind == ViolationKind::kReplay && v.round == snap.round &&
        v.final == snap.final) {
      for (std::size_t b = 1; b <= partition.num_blocks(); ++b) {
        const BlockRange r = partition.range(BlockId(b));
        if (v.coordinate >= r.begin && v.coordinate < r.end) v.block = BlockId(b);
      }
    }
  }

  for (const ClientState& c : snap.clients) {
    std::vector<double> expected(server.theta.values().begin(),
                                 server.theta.values().end());
    for (const PendingDelta& p : c.pending) {
      if (p.delta.empty()) continue;
      const BlockRange r = partition.range(p.block);
      for (std::size_t n = 0; n < r.size(); ++n) {
        expected[r.begin + n] += eta * p.delta[n];
      }
    }
    for (std::size_t b = 1; b <= partition.num_blocks(); ++b) {
      const BlockRange r = partition.range(BlockId(b));
      for (std::size_t k = r.begin; k < r.end; ++k) {
        compare(c.theta[k], expected[k], k, snap, ViolationKind::kConsistency,
                c.id, BlockId(b));
      }
    }
  }
}

BatteryReport run_invariant_battery(const FedConfig& cfg,
                                    std::span<const Objective> objectives,
                                    const ParamVector& theta0,
                                    std::optional<FaultInjection> fault,
                                    double rel_tol) {
  BatteryReport report;
  ConsistencyChecker checker(rel_tol);
  RunOptions options;
  options.observer = &checker;
  options.fault = fault;
  parablock_run(cfg, objectives, theta0, options);
  report.consistency_ok = checker.ok();
  report.first_violation = checker.first_violation();
  report.max_rel_error = checker.max_rel_error();

  FedConfig single = cfg;
  single.num_clients = 1;
  single.participation = FullParticipation{};
  single.compression.reset();
  const RunResult fed = parablock_run(single, objectives.first(1), theta0);
  single.scheduler = FixedSchedule{fed.schedule};
  const RunResult seq = sequential_bcd_run(single, objectives[0], theta0);
  report.reduction_ok = fed.theta_final == seq.theta_final;
  if (!report.reduction_ok) {
    for (std::size_t k = 0; k < theta0.size(); ++k) {
      if (fed.theta_final[k] != seq.theta_final[k]) {
        report.reduction_detail = "coordinate " + std::to_string(k) + ": " +
                                  std::to_string(fed.theta_final[k]) +
                                  " vs " + std::to_string(seq.theta_final[k]);
        break;
      }
    }
  }
  return report;
}

}  // namespace parablock
