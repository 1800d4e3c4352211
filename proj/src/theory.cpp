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

#include "parablock/theory.hpp"

#include <cmath>
#include <limits>

#include "parablock/engine.hpp"
#include "parablock/errors.hpp"

namespace parablock {

std::vector<std::string> Feasibility::violations() const {
  std::vector<std::string> out;
  if (!local_ok) out.emplace_back("eta_l <= 1/(22KL)");
  if (!global_ok) out.emplace_back("eta*eta_l <= 1/(4KL)");
  return out;
}

Feasibility lr_feasible(double eta, double eta_l, std::size_t K, double L) {
  const double kl = static_cast<double>(K) * L;
  Feasibility f;
  f.local_ok = eta_l <= 1.0 / (22.0 * kl);
  f.global_ok = eta * eta_l <= 1.0 / (4.0 * kl);
  return f;
}

void BoundInputs::validate() const {
  if (T == 0 || K == 0 || N == 0) throw InputError("T, K and N must be >= 1");
  if (!(eta > 0.0) || !(eta_l > 0.0)) {
    throw InputError("learning rates must be > 0");
  }
  if (!(L > 0.0)) throw InputError("L must be > 0");
  if (!(sigma >= 0.0) || !(sigma_g >= 0.0) || !(F >= 0.0)) {
    throw InputError("sigma, sigma_g and F must be >= 0");
  }
}

BoundTerms theorem1_terms(const BoundInputs& in) {
  in.validate();
  const double T = static_cast<double>(in.T);
  const double K = static_cast<double>(in.K);
  const double N = static_cast<double>(in.N);
  const double s2 = in.sigma * in.sigma;
  const double g2 = in.sigma_g * in.sigma_g;
  const double L2 = in.L * in.L;
  const double el2 = in.eta_l * in.eta_l;
  const double e2 = in.eta * in.eta;

  BoundTerms t;
  t.optimization = 8.0 * in.F / (in.eta * in.eta_l * T * K);
  t.local_drift = 40.0 * el2 * L2 * K * (s2 + 6.0 * K * g2);
  t.noise = (8.0 * e2 * in.eta_l * L2 * K + in.eta * in.L / 2.0) *
            (in.eta_l / N) * s2;
  t.staleness = 64.0 * e2 * el2 * L2 * K *
                (s2 + 10.0 * el2 * L2 * K * (s2 + K * g2));
  return t;
}

double theorem1_rhs(const BoundInputs& in) { return theorem1_terms(in).total(); }

StepSizes corollary_schedule(std::size_t T, std::size_t K, std::size_t N,
                             double L, double c_eta, double c_etal) {
  if (T == 0 || K == 0 || N == 0) throw InputError("T, K and N must be >= 1");
  if (!(L > 0.0) || !(c_eta > 0.0) || !(c_etal > 0.0)) {
    throw InputError("L and the schedule constants must be > 0");
  }
  constexpr int kMaxHalvings = 60;
  StepSizes s;
  s.eta = c_eta * std::sqrt(static_cast<double>(K * N));
  for (s.halvings = 0; s.halvings <= kMaxHalvings; ++s.halvings) {
    s.eta_l = c_etal / (std::sqrt(static_cast<double>(T)) *
                        static_cast<double>(K));
    if (lr_feasible(s.eta, s.eta_l, K, L).ok()) return s;
    c_etal /= 2.0;
  }
  throw ScheduleError("no feasible local learning rate after 60 halvings");
}

BoundReport trace_vs_bound(std::span<const RoundTrace> trace,
                           const BoundInputs& in) {
  if (trace.empty()) throw TraceError("empty trace");
  BoundReport r;
  double acc = 0.0;
  for (const RoundTrace& rt : trace) {
    if (!std::isfinite(rt.block_grad_norm_sq)) {
      throw TraceError("round " + std::to_string(rt.round) +
                       " has no block gradient norm");
    }
    acc += rt.block_grad_norm_sq;
  }
  r.rounds = trace.size();
  r.measured_avg = acc / static_cast<double>(trace.size());
  r.terms = theorem1_terms(in);
  r.rhs = r.terms.total();
  r.feasibility = lr_feasible(in.eta, in.eta_l, in.K, in.L);
  r.ratio = r.rhs > 0.0 ? r.measured_avg / r.rhs
                        : (r.measured_avg == 0.0
                               ? 0.0
                               : std::numeric_limits<double>::infinity());
  return r;
}

}  // namespace parablock
