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
#include <vector>

#include "gtest/gtest.h"
#include "parablock/engine.hpp"
#include "parablock/errors.hpp"

namespace parablock {
namespace {

TEST(LrFeasibleTest, UnitCaseIsFeasible) {
  EXPECT_TRUE(lr_feasible(1.0, 0.01, 1, 1.0).ok());
}

TEST(LrFeasibleTest, LocalRateTooLarge) {
  const Feasibility f = lr_feasible(1.0, 0.1, 1, 1.0);
  EXPECT_FALSE(f.local_ok);
  EXPECT_TRUE(f.global_ok);
  EXPECT_EQ(f.violations().size(), 1u);
}

TEST(LrFeasibleTest, BoundaryIsInclusive) {
  for (std::size_t K : {1u, 3u, 7u}) {
    for (double L : {0.5, 1.0, 3.0}) {
      EXPECT_TRUE(lr_feasible(1.0, 1.0 / (22.0 * K * L), K, L).local_ok)
          << "K=" << K << " L=" << L;
    }
  }
}

TEST(LrFeasibleTest, ProductConstraint) {
  const Feasibility f = lr_feasible(20.0, 0.04, 1, 1.0);
  EXPECT_TRUE(f.local_ok);
  EXPECT_FALSE(f.global_ok);
}

BoundInputs Inputs(double F, double sigma, double sigma_g, std::size_t K,
                   std::size_t N, std::size_t T, double eta, double eta_l) {
  BoundInputs in;
  in.F = F;
  in.L = 1.0;
  in.sigma = sigma;
  in.sigma_g = sigma_g;
  in.K = K;
  in.N = N;
  in.T = T;
  in.eta = eta;
  in.eta_l = eta_l;
  return in;
}

TEST(BoundRhsTest, ZeroVarianceLeavesOptimizationTerm) {
  EXPECT_DOUBLE_EQ(theorem1_rhs(Inputs(1, 0, 0, 1, 1, 100, 1, 0.01)), 8.0);
}

TEST(BoundRhsTest, AlreadyOptimal) {
  EXPECT_EQ(theorem1_rhs(Inputs(0, 0, 0, 3, 2, 10, 1, 0.01)), 0.0);
}

// Term values evaluated independently and frozen:
//   8·1/(1·0.005·100·2)                         = 8
//   40·0.005²·2·(1 + 6·2)                        = 0.026
//   (8·0.005·2 + 1/2)·(0.005/4)                  = 0.000725
//   64·0.005²·2·(1 + 10·0.005²·2·(1 + 2))        = 0.0032048
TEST(BoundRhsTest, FullInputsTermByTerm) {
  const BoundInputs in = Inputs(1, 1, 1, 2, 4, 100, 1, 0.005);
  const BoundTerms t = theorem1_terms(in);
  EXPECT_NEAR(t.optimization, 8.0, 1e-14);
  EXPECT_NEAR(t.local_drift, 0.026, 1e-15);
  EXPECT_NEAR(t.noise, 0.000725, 1e-16);
  EXPECT_NEAR(t.staleness, 0.0032048, 1e-16);
  EXPECT_NEAR(theorem1_rhs(in), 8.0299298, 1e-13);
}

TEST(BoundRhsTest, RejectsInvalidInputs) {
  EXPECT_THROW(theorem1_rhs(Inputs(1, 0, 0, 0, 1, 1, 1, 0.01)), InputError);
  EXPECT_THROW(theorem1_rhs(Inputs(-1, 0, 0, 1, 1, 1, 1, 0.01)), InputError);
  EXPECT_THROW(theorem1_rhs(Inputs(1, -1, 0, 1, 1, 1, 1, 0.01)), InputError);
  EXPECT_THROW(theorem1_rhs(Inputs(1, 0, 0, 1, 1, 1, 0, 0.01)), InputError);
}

TEST(StepScheduleTest, UnitCase) {
  const StepSizes s = corollary_schedule(100, 1, 1, 0.001);
  EXPECT_EQ(s.eta, 1.0);
  EXPECT_EQ(s.halvings, 0);
  EXPECT_DOUBLE_EQ(s.eta_l, 0.1);
}

TEST(StepScheduleTest, FourTimesTheRoundsHalvesTheLocalRate) {
  const StepSizes a = corollary_schedule(400, 2, 3, 0.01);
  const StepSizes b = corollary_schedule(1600, 2, 3, 0.01);
  ASSERT_EQ(a.halvings, b.halvings);
  EXPECT_DOUBLE_EQ(b.eta_l, a.eta_l / 2);
  EXPECT_EQ(a.eta, b.eta);
}

TEST(StepScheduleTest, HalvesUntilFeasible) {
  const StepSizes s = corollary_schedule(4, 5, 4, 1.0);
  EXPECT_GT(s.halvings, 0);
  EXPECT_TRUE(lr_feasible(s.eta, s.eta_l, 5, 1.0).ok());
  // One fewer halving would be infeasible.
  EXPECT_FALSE(lr_feasible(s.eta, 2 * s.eta_l, 5, 1.0).ok());
}

TEST(StepScheduleTest, GivesUpAfterSixtyHalvings) {
  EXPECT_THROW(corollary_schedule(1, 1, 1, 1e300), ScheduleError);
}

TEST(StepScheduleTest, BoundIsNonincreasingInT) {
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t T : {100u, 1000u, 10000u, 100000u}) {
    const StepSizes s = corollary_schedule(T, 5, 4, 1.0);
    BoundInputs in = Inputs(2.0, 0.5, 1.0, 5, 4, T, s.eta, s.eta_l);
    const double rhs = theorem1_rhs(in);
    EXPECT_LE(rhs, previous) << "T=" << T;
    previous = rhs;
  }
}

TEST(TraceVsBoundTest, AveragesTheChannel) {
  std::vector<RoundTrace> trace(2);
  trace[0].block_grad_norm_sq = 1.0;
  trace[1].block_grad_norm_sq = 3.0;
  const BoundReport r = trace_vs_bound(trace, Inputs(1, 0, 0, 1, 1, 2, 1, 0.01));
  EXPECT_EQ(r.rounds, 2u);
  EXPECT_EQ(r.measured_avg, 2.0);
  EXPECT_DOUBLE_EQ(r.rhs, 400.0);
  EXPECT_TRUE(std::isfinite(r.ratio));
  EXPECT_TRUE(r.within_bound());
}

TEST(TraceVsBoundTest, RejectsEmptyOrMissingChannel) {
  std::vector<RoundTrace> trace;
  EXPECT_THROW(trace_vs_bound(trace, BoundInputs{}), TraceError);
  trace.resize(1);
  trace[0].block_grad_norm_sq = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(trace_vs_bound(trace, BoundInputs{}), TraceError);
}

}  // namespace
}  // namespace parablock
