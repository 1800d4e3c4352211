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

// Convergence bound for the overlapped block-coordinate method under local
// SGD, the step-size conditions it needs, and the √T step-size schedule.

#ifndef PARABLOCK_THEORY_HPP_
#define PARABLOCK_THEORY_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace parablock {

struct RoundTrace;

struct Feasibility {
  bool local_ok = true;   // η_l ≤ 1/(22KL)
  bool global_ok = true;  // η·η_l ≤ 1/(4KL)

  bool ok() const noexcept { return local_ok && global_ok; }
  std::vector<std::string> violations() const;
};

Feasibility lr_feasible(double eta, double eta_l, std::size_t K, double L);

struct BoundInputs {
  double eta = 1.0;
  double eta_l = 0.01;
  std::size_t T = 1;
  std::size_t K = 1;
  std::size_t N = 1;
  double L = 1.0;
  double sigma = 0.0;
  double sigma_g = 0.0;
  double F = 0.0;  // f(θ_0) − f_*

  /// Throws InputError on nonpositive T, K, N, η, η_l, L or negative
  /// σ, σ_g, F.
  void validate() const;
};

/// The four additive pieces of the bound, summed by total().
struct BoundTerms {
  double optimization = 0.0;  // 8F / (η η_l T K)
  double local_drift = 0.0;   // 40 η_l² L² K (σ² + 6K σ_g²)
  double noise = 0.0;         // (8 η² η_l L² K + η L / 2) (η_l / N) σ²
  double staleness = 0.0;     // 64 η² η_l² L² K [σ² + 10 η_l² L² K (σ² + K σ_g²)]

  double total() const noexcept {
    return optimization + local_drift + noise + staleness;
  }
};

BoundTerms theorem1_terms(const BoundInputs& in);
/// Upper bound on (1/T) Σ_t E‖∇_{b_t} f(θ_t)‖².
double theorem1_rhs(const BoundInputs& in);

struct StepSizes {
  double eta = 0.0;
  double eta_l = 0.0;
  int halvings = 0;  // how often c_etal was halved to reach feasibility
};

/// η = c_eta·√(KN), η_l = c_etal/(√T·K); c_etal is halved until the pair is
/// feasible for smoothness L (at most 60 times, then ScheduleError).
StepSizes corollary_schedule(std::size_t T, std::size_t K, std::size_t N,
                             double L, double c_eta = 1.0,
                             double c_etal = 1.0);

struct BoundReport {
  std::size_t rounds = 0;
  double measured_avg = 0.0;  // (1/T) Σ_t ‖∇_{b_t} f(θ_t)‖²
  double rhs = 0.0;
  double ratio = 0.0;         // measured_avg / rhs
  Feasibility feasibility;
  BoundTerms terms;

  bool within_bound() const noexcept { return measured_avg <= rhs; }
};

/// Averages the exact block-gradient channel over every executed round.
/// Throws TraceError when the trace is empty or the channel is missing.
BoundReport trace_vs_bound(std::span<const RoundTrace> trace,
                           const BoundInputs& in);

}  // namespace parablock

#endif  // PARABLOCK_THEORY_HPP_
