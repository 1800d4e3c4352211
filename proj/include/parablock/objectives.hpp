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

// Per-client synthetic objectives f_i with analytic gradients.
//
//   quadratic  f(θ) = ½ (θ − c)ᵀ diag(a) (θ − c)
//   logistic   multinomial cross-entropy with linear logits; class 0 is the
//              reference class with logit fixed at 0, so θ holds
//              (C − 1) × p weights (binary logistic regression for C = 2)
//   mlp        one tanh hidden layer followed by softmax cross-entropy;
//              θ = [W1 (H×p), b1 (H), W2 (C×H), b2 (C)], row-major
//
// Objectives are immutable once built. Stochastic gradients come from a
// GradientStream that owns its random state.

#ifndef PARABLOCK_OBJECTIVES_HPP_
#define PARABLOCK_OBJECTIVES_HPP_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "parablock/rng.hpp"

namespace parablock {

enum class ObjectiveKind { kQuadratic, kLogistic, kMlp };

std::string to_string(ObjectiveKind kind);
/// Throws ConfigError for an unknown name.
ObjectiveKind parse_objective_kind(const std::string& name);

/// Stochastic-gradient noise. Each coordinate receives N(0, σ²/d) so that
/// E‖g − ∇f‖² = σ² exactly.
struct NoiseSpec {
  double sigma = 0.0;
};

struct SyntheticDataset {
  std::size_t num_features = 0;
  std::size_t num_classes = 0;
  std::vector<double> features;  // row-major, size() × num_features
  std::vector<int> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t j) const {
    return std::span<const double>(features).subspan(j * num_features,
                                                     num_features);
  }
  std::vector<std::size_t> class_counts() const;
  /// Throws ShapeError on inconsistent sizes or out-of-range labels.
  void validate() const;
};

struct MixtureSpec {
  std::size_t samples = 0;
  std::size_t features = 0;
  std::size_t classes = 2;
  double separation = 2.0;  // std of the class means
  bool unit_norm = false;   // rescale every feature row to norm 1
  std::uint64_t seed = 0;
};

/// Gaussian mixture with balanced labels (label j mod C).
SyntheticDataset make_gaussian_mixture(const MixtureSpec& spec);

/// CSV with header feature_0,...,feature_{p-1},label.
void write_dataset_csv(const SyntheticDataset& ds, std::ostream& out);
SyntheticDataset read_dataset_csv(std::istream& in);

struct DirichletPartition {
  double alpha = 0.0;
  std::size_t num_clients = 0;
  std::vector<std::size_t> assignment;  // client index per sample

  std::vector<std::vector<std::size_t>> client_samples() const;
  std::vector<std::size_t> client_counts() const;
  /// histogram[i][c] = samples of class c held by client i.
  std::vector<std::vector<std::size_t>> class_histogram(
      const SyntheticDataset& ds) const;
};

/// Label-skewed split: per class, client shares ~ Dirichlet(alpha · 1_N)
/// allocated by largest-remainder rounding. Degenerate draws (an empty
/// client) are redrawn up to 100 times, after which empty clients take one
/// sample each from the largest client.
DirichletPartition dirichlet_partition(const SyntheticDataset& ds,
                                       double alpha, std::size_t num_clients,
                                       std::uint64_t seed);

/// Either the objective's full local sample set or explicit dataset rows.
struct Batch {
  static Batch Full() { return Batch{}; }
  static Batch Of(std::span<const std::size_t> rows) {
    Batch b;
    b.full = false;
    b.rows = rows;
    return b;
  }

  bool full = true;
  std::span<const std::size_t> rows;
};

class Objective {
 public:
  static Objective Quadratic(std::size_t client_id,
                             std::vector<double> curvature,
                             std::vector<double> center, NoiseSpec noise = {});
  static Objective Logistic(std::size_t client_id,
                            std::shared_ptr<const SyntheticDataset> data,
                            std::vector<std::size_t> samples,
                            NoiseSpec noise = {});
  static Objective Mlp(std::size_t client_id,
                       std::shared_ptr<const SyntheticDataset> data,
                       std::vector<std::size_t> samples, std::size_t hidden,
                       NoiseSpec noise = {});

  ObjectiveKind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dimension_; }
  std::size_t client_id() const noexcept { return client_id_; }
  const NoiseSpec& noise() const noexcept { return noise_; }

  std::span<const double> curvature() const noexcept { return curvature_; }
  std::span<const double> center() const noexcept { return center_; }
  const std::shared_ptr<const SyntheticDataset>& dataset() const noexcept {
    return data_;
  }
  std::span<const std::size_t> samples() const noexcept { return samples_; }
  std::size_t hidden_units() const noexcept { return hidden_; }

  double loss(std::span<const double> theta,
              const Batch& batch = Batch::Full()) const;
  /// Exact (noise-free) gradient of loss() over the batch.
  std::vector<double> grad(std::span<const double> theta,
                           const Batch& batch = Batch::Full()) const;
  /// Writes the gradient into `grad_out` and returns the loss.
  double loss_and_grad(std::span<const double> theta, const Batch& batch,
                       std::span<double> grad_out) const;

 private:
  Objective() = default;

  std::span<const std::size_t> resolve(const Batch& batch) const;
  double quadratic_eval(std::span<const double> theta,
                        std::span<double> grad_out) const;
  double logistic_eval(std::span<const double> theta,
                       std::span<const std::size_t> rows,
                       std::span<double> grad_out) const;
  double mlp_eval(std::span<const double> theta,
                  std::span<const std::size_t> rows,
                  std::span<double> grad_out) const;

  ObjectiveKind kind_ = ObjectiveKind::kQuadratic;
  std::size_t client_id_ = 0;
  std::size_t dimension_ = 0;
  NoiseSpec noise_;
  std::vector<double> curvature_;
  std::vector<double> center_;
  std::shared_ptr<const SyntheticDataset> data_;
  std::vector<std::size_t> samples_;
  std::size_t hidden_ = 0;
};

/// Stochastic gradients of one objective. Data objectives draw minibatches
/// without replacement from a per-stream permutation of the local samples,
/// reshuffled at every epoch boundary; batch_size 0 means full batch.
class GradientStream {
 public:
  GradientStream(const Objective& objective, std::uint64_t seed,
                 std::size_t batch_size = 0);

  void next(std::span<const double> theta, std::span<double> grad_out);

 private:
  const Objective* objective_;
  Rng rng_;
  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::vector<std::size_t> batch_;
};

/// f(θ) = (1/N) Σ_i f_i(θ), each over its full local data.
double global_loss(std::span<const Objective> objectives,
                   std::span<const double> theta);
std::vector<double> global_grad(std::span<const Objective> objectives,
                                std::span<const double> theta);

/// (1/N) Σ_i ‖∇f_i(θ) − ∇f(θ)‖² with exact gradients.
double estimate_sigma_g(std::span<const Objective> objectives,
                        std::span<const double> theta);

struct SmoothnessEstimate {
  double value = 0.0;
  bool is_estimate = false;
};

/// Quadratic: max curvature. Logistic: κ · max ‖x‖² over local rows, with
/// κ = 1/4 for two classes and 1/2 otherwise (an upper bound on the softmax
/// Hessian). MLP: power iteration on finite-difference Hessian-vector
/// products at a few random points; flagged as an estimate.
SmoothnessEstimate smoothness_constant(std::span<const Objective> objectives,
                                       std::uint64_t seed = 0);

/// min_θ f(θ) for a suite of quadratics; nullopt for other kinds.
std::optional<double> quadratic_min_value(
    std::span<const Objective> objectives);

struct QuadraticSuiteSpec {
  std::size_t clients = 1;
  std::size_t dimension = 1;
  double curvature_min = 0.5;
  double curvature_max = 1.0;
  double heterogeneity = 1.0;  // client centers ~ N(0, h² I)
  bool shared_curvature = true;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

std::vector<Objective> make_quadratic_suite(const QuadraticSuiteSpec& spec);

struct DataSuiteSpec {
  ObjectiveKind kind = ObjectiveKind::kLogistic;
  MixtureSpec data;
  std::size_t clients = 1;
  double alpha = 1.0;
  std::size_t hidden = 8;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct DataSuite {
  std::shared_ptr<const SyntheticDataset> dataset;
  DirichletPartition partition;
  std::vector<Objective> objectives;
};

DataSuite make_data_suite(const DataSuiteSpec& spec);

/// Parameter count of a data objective of the given shape.
std::size_t data_objective_dimension(ObjectiveKind kind, std::size_t features,
                                     std::size_t classes, std::size_t hidden);

}  // namespace parablock

#endif  // PARABLOCK_OBJECTIVES_HPP_
