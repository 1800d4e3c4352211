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

// Central finite-difference checks of the analytic objective gradients.

#ifndef PARABLOCK_GRADCHECK_HPP_
#define PARABLOCK_GRADCHECK_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "parablock/objectives.hpp"

namespace parablock {

/// Central differences of the full-batch loss with step h·max(1, |θ_k|).
std::vector<double> finite_difference_grad(const Objective& objective,
                                           std::span<const double> theta,
                                           double h = 1e-6);

/// ‖g − g_fd‖ / max(‖g‖, ‖g_fd‖, floor).
double gradient_rel_error(std::span<const double> analytic,
                          std::span<const double> numeric,
                          double floor = 1e-8);

struct GradCheckCase {
  ObjectiveKind kind = ObjectiveKind::kQuadratic;
  std::size_t point = 0;
  double rel_error = 0.0;
};

/// Small instances of every objective kind, `points` random evaluation
/// points each, all derived from `seed`.
std::vector<GradCheckCase> gradcheck_battery(std::uint64_t seed,
                                             std::size_t points = 10);

}  // namespace parablock

#endif  // PARABLOCK_GRADCHECK_HPP_
