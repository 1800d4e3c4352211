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

#include "parablock/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "parablock/param.hpp"
#include "parablock/rng.hpp"

namespace parablock {

std::vector<double> finite_difference_grad(const Objective& objective,
                                           std::span<const double> theta,
                                           double h) {
  std::vector<double> x(theta.begin(), theta.end());
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double step = h * std::max(1.0, std::fabs(x[k]));
    const double saved = x[k];
    x[k] = saved + step;
    const double up = objective.loss(x);
    x[k] = saved - step;
    const double down = objective.loss(x);
    x[k] = saved;
    g[k] = (up - down) / (2.0 * step);
  }
  return g;
}

double gradient_rel_error(std::span<const double> analytic,
                          std::span<const double> numeric, double floor) {
  double diff = 0.0;
  for (std::size_t k = 0; k < analytic.size(); ++k) {
    const double r = analytic[k] - numeric[k];
    diff += r * r;
  }
  const double scale = std::max(
      {std::sqrt(norm_sq(analytic)), std::sqrt(norm_sq(numeric)), floor});
  return std::sqrt(diff) / scale;
}

std::vector<GradCheckCase> gradcheck_battery(std::uint64_t seed,
                                             std::size_t points) {
  Rng rng(derive_seed(seed, 0, 0, StreamTag::kTest));
  std::vector<Objective> objectives;

  {
    std::vector<double> a(6), c(6);
    for (double& v : a) v = 0.5 + rng.uniform();
    for (double& v : c) v = rng.normal();
    objectives.push_back(Objective::Quadratic(0, a, c));
  }
  MixtureSpec mix;
  mix.samples = 40;
  mix.features = 4;
  mix.classes = 3;
  mix.seed = derive_seed(seed, 0, 0, StreamTag::kData);
  auto data = std::make_shared<SyntheticDataset>(make_gaussian_mixture(mix));
  std::vector<std::size_t> rows(data->size());
  for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = j;
  objectives.push_back(Objective::Logistic(0, data, rows));
  objectives.push_back(Objective::Mlp(0, data, rows, 5));

  std::vector<GradCheckCase> out;
  for (const Objective& obj : objectives) {
    for (std::size_t p = 0; p < points; ++p) {
      std::vector<double> theta(obj.dimension());
      for (double& v : theta) v = 0.5 * rng.normal();
      const std::vector<double> g = obj.grad(theta);
      const std::vector<double> fd = finite_difference_grad(obj, theta);
      out.push_back({obj.kind(), p, gradient_rel_error(g, fd)});
    }
  }
  return out;
}

}  // namespace parablock
