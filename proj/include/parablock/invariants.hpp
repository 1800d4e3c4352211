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

// Round-by-round checks of the replicated-model identities.
//
// After every round, for every client i and block b:
//
//   θ^i[b] = θ[b] + η Σ_{pending (s, b_s = b)} Δ^i_s
//
// where θ is the server model and the sum runs over the client's own deltas
// whose aggregate has not been applied yet. With S = 1 and b_t ≠ b_{t−1} this
// is the plain statement that every client holds the server's block b_{t−1}.
// The server model must also equal θ_0 with its applied-delta log replayed.
//
// Floating-point comparisons are relative to an accumulated magnitude budget
// per coordinate (|θ_0| plus η|Δ| for every delta that touched it), since the
// client and server sums associate differently.

#ifndef PARABLOCK_INVARIANTS_HPP_
#define PARABLOCK_INVARIANTS_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "parablock/engine.hpp"

namespace parablock {

enum class ViolationKind {
  kReplay,       // server model differs from the replayed log
  kAggregation,  // aggregate differs from the ascending-id mean
  kConsistency,  // a client block differs from the server block
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::kConsistency;
  std::size_t round = 0;  // equals the number of rounds for the final flush
  bool final = false;
  std::optional<std::size_t> client;
  BlockId block;
  std::size_t coordinate = 0;  // global index
  double rel_error = 0.0;

  std::string describe() const;
};

class ConsistencyChecker : public RoundObserver {
 public:
  explicit ConsistencyChecker(double rel_tol = 1e-12);

  void on_round(const RoundSnapshot& snapshot) override;

  bool ok() const noexcept { return violations_.empty(); }
  const std::vector<Violation>& violations() const noexcept {
    return violations_;
  }
  std::optional<Violation> first_violation() const;
  /// Largest relative error seen across every comparison.
  double max_rel_error() const noexcept { return max_rel_error_; }
  std::size_t snapshots_checked() const noexcept { return snapshots_; }

 private:
  // Returns the relative error and records a violation above tolerance.
  void compare(double actual, double expected, std::size_t coord,
               const RoundSnapshot& snap, ViolationKind kind,
               std::optional<std::size_t> client, BlockId block);

  double rel_tol_;
  std::vector<double> budget_;
  std::vector<Violation> violations_;
  double max_rel_error_ = 0.0;
  std::size_t snapshots_ = 0;
};

struct BatteryReport {
  bool consistency_ok = true;  // client/server identity, aggregation, replay
  bool reduction_ok = true;    // one client matches sequential BCD bit-for-bit
  std::optional<Violation> first_violation;
  double max_rel_error = 0.0;
  std::string reduction_detail;

  bool ok() const noexcept { return consistency_ok && reduction_ok; }
};

/// Runs ParaBlock on the instance under a ConsistencyChecker, then the
/// single-client reduction on client 0's objective with the same schedule.
BatteryReport run_invariant_battery(
    const FedConfig& cfg, std::span<const Objective> objectives,
    const ParamVector& theta0,
    std::optional<FaultInjection> fault = std::nullopt,
    double rel_tol = 1e-12);

}  // namespace parablock

#endif  // PARABLOCK_INVARIANTS_HPP_
