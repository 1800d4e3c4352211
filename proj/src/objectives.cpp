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

#include "parablock/objectives.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "parablock/errors.hpp"
#include "parablock/param.hpp"

namespace parablock {

namespace {

constexpr std::size_t kMaxMlpFeatures = 32;
constexpr std::size_t kMaxMlpHidden = 32;
constexpr std::size_t kMaxMlpClasses = 8;

void require_dimension(std::size_t got, std::size_t want) {
  if (got != want) {
    throw ShapeError("parameter dimension " + std::to_string(got) +
                     ", objective expects " + std::to_string(want));
  }
}

// logsumexp over z, numerically stable.
double log_sum_exp(std::span<const double> z) {
  const double m = *std::max_element(z.begin(), z.end());
  double acc = 0.0;
  for (double v : z) acc += std::exp(v - m);
  return m + std::log(acc);
}

// Replaces z with softmax(z) and returns logsumexp(z).
double softmax_inplace(std::span<double> z) {
  const double lse = log_sum_exp(z);
  for (double& v : z) v = std::exp(v - lse);
  return lse;
}

}  // namespace

std::string to_string(ObjectiveKind kind) {
  switch (kind) {
    case ObjectiveKind::kQuadratic:
      return "quadratic";
    case ObjectiveKind::kLogistic:
      return "logistic";
    case ObjectiveKind::kMlp:
      return "mlp";
  }
  return "unknown";
}

ObjectiveKind parse_objective_kind(const std::string& name) {
  if (name == "quadratic") return ObjectiveKind::kQuadratic;
  if (name == "logistic") return ObjectiveKind::kLogistic;
  if (name == "mlp") return ObjectiveKind::kMlp;
  throw ConfigError("objective.kind", "unknown objective kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// Datasets

std::vector<std::size_t> SyntheticDataset::class_counts() const {
  std::vector<std::size_t> counts(num_classes, 0);
  for (int y : labels) ++counts[static_cast<std::size_t>(y)];
  return counts;
}

void SyntheticDataset::validate() const {
  if (num_features == 0) throw ShapeError("dataset has no features");
  if (num_classes == 0) throw ShapeError("dataset has no classes");
  if (features.size() != labels.size() * num_features) {
    throw ShapeError("feature matrix has " + std::to_string(features.size()) +
                     " entries for " + std::to_string(labels.size()) +
                     " samples of width " + std::to_string(num_features));
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= num_classes) {
      throw ShapeError("label " + std::to_string(y) + " outside [0," +
                       std::to_string(num_classes) + ")");
    }
  }
}

SyntheticDataset make_gaussian_mixture(const MixtureSpec& spec) {
  if (spec.samples == 0 || spec.features == 0 || spec.classes == 0) {
    throw ShapeError("mixture needs samples, features and classes > 0");
  }
  Rng rng(derive_seed(spec.seed, 0, 0, StreamTag::kData));
  std::vector<double> means(spec.classes * spec.features);
  for (double& m : means) m = spec.separation * rng.normal();

  SyntheticDataset ds;
  ds.num_features = spec.features;
  ds.num_classes = spec.classes;
  ds.features.resize(spec.samples * spec.features);
  ds.labels.resize(spec.samples);
  for (std::size_t j = 0; j < spec.samples; ++j) {
    const std::size_t c = j % spec.classes;
    ds.labels[j] = static_cast<int>(c);
    double* x = ds.features.data() + j * spec.features;
    for (std::size_t k = 0; k < spec.features; ++k) {
      x[k] = means[c * spec.features + k] + rng.normal();
    }
    if (spec.unit_norm) {
      const double n = std::sqrt(norm_sq({x, spec.features}));
      if (n > 0.0) {
        for (std::size_t k = 0; k < spec.features; ++k) x[k] /= n;
      }
    }
  }
  return ds;
}

void write_dataset_csv(const SyntheticDataset& ds, std::ostream& out) {
  for (std::size_t k = 0; k < ds.num_features; ++k) {
    out << "feature_" << k << ',';
  }
  out << "label\n";
  char buf[32];
  for (std::size_t j = 0; j < ds.size(); ++j) {
    for (double x : ds.row(j)) {
      std::snprintf(buf, sizeof(buf), "%.17g", x);
      out << buf << ',';
    }
    out << ds.labels[j] << '\n';
  }
}

SyntheticDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("dataset CSV is empty");
  std::size_t columns = 1 + static_cast<std::size_t>(
                                std::count(line.begin(), line.end(), ','));
  std::istringstream header(line);
  std::string name;
  for (std::size_t k = 0; k + 1 < columns; ++k) {
    std::getline(header, name, ',');
    if (name != "feature_" + std::to_string(k)) {
      throw ShapeError("dataset CSV header column " + std::to_string(k) +
                       " is '" + name + "'");
    }
  }
  std::getline(header, name);
  if (name != "label") throw ShapeError("dataset CSV must end with 'label'");

  SyntheticDataset ds;
  ds.num_features = columns - 1;
  int max_label = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    for (std::size_t k = 0; k < columns; ++k) {
      const char* stop = std::find(p, end, ',');
      if (k + 1 < columns) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(p, stop, v);
        if (ec != std::errc() || ptr != stop) {
          throw ShapeError("bad feature value on line " +
                           std::to_string(line_no));
        }
        ds.features.push_back(v);
      } else {
        int y = 0;
        auto [ptr, ec] = std::from_chars(p, stop, y);
        if (ec != std::errc() || ptr != stop || stop != end || y < 0) {
          throw ShapeError("bad label on line " + std::to_string(line_no));
        }
        ds.labels.push_back(y);
        max_label = std::max(max_label, y);
      }
      p = stop == end ? end : stop + 1;
    }
  }
  ds.num_classes = static_cast<std::size_t>(max_label + 1);
  ds.validate();
  return ds;
}

// ---------------------------------------------------------------------------
// Dirichlet partition

std::vector<std::vector<std::size_t>> DirichletPartition::client_samples()
    const {
  std::vector<std::vector<std::size_t>> out(num_clients);
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    out[assignment[j]].push_back(j);
  }
  return out;
}

std::vector<std::size_t> DirichletPartition::client_counts() const {
  std::vector<std::size_t> counts(num_clients, 0);
  for (std::size_t a : assignment) ++counts[a];
  return counts;
}

std::vector<std::vector<std::size_t>> DirichletPartition::class_histogram(
    const SyntheticDataset& ds) const {
  std::vector<std::vector<std::size_t>> h(
      num_clients, std::vector<std::size_t>(ds.num_classes, 0));
  for (std::size_t j = 0; j < assignment.size(); ++j) {
    ++h[assignment[j]][static_cast<std::size_t>(ds.labels[j])];
  }
  return h;
}

namespace {

std::vector<double> dirichlet_draw(Rng& rng, double alpha, std::size_t n) {
  std::vector<double> p(n);
  double sum = 0.0;
  // Tiny alpha can underflow every component; redraw in that case.
  while (!(sum > 0.0)) {
    sum = 0.0;
    for (double& x : p) {
      x = rng.gamma(alpha);
      sum += x;
    }
  }
  for (double& x : p) x /= sum;
  return p;
}

// Largest-remainder rounding of shares * total; ties go to the lower index.
std::vector<std::size_t> round_shares(std::span<const double> shares,
                                      std::size_t total) {
  std::vector<std::size_t> counts(shares.size());
  std::vector<double> remainder(shares.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = shares[i] * static_cast<double>(total);
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    remainder[i] = exact - std::floor(exact);
    assigned += counts[i];
  }
  // Floating error can push the floor sum past the total by one.
  while (assigned > total) {
    auto it = std::max_element(counts.begin(), counts.end());
    --*it;
    --assigned;
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                   std::size_t b) {
    return remainder[a] > remainder[b];
  });
  for (std::size_t k = 0; assigned < total; k = (k + 1) % order.size()) {
    ++counts[order[k]];
    ++assigned;
  }
  return counts;
}

}  // namespace

DirichletPartition dirichlet_partition(const SyntheticDataset& ds,
                                       double alpha, std::size_t num_clients,
                                       std::uint64_t seed) {
  if (!(alpha > 0.0)) throw PartitionError("Dirichlet alpha must be > 0");
  if (num_clients == 0) throw PartitionError("need at least one client");
  if (ds.size() == 0) throw PartitionError("cannot partition an empty dataset");
  if (num_clients > ds.size()) {
    throw PartitionError(std::to_string(num_clients) + " clients for " +
                         std::to_string(ds.size()) + " samples");
  }

  DirichletPartition part;
  part.alpha = alpha;
  part.num_clients = num_clients;
  part.assignment.assign(ds.size(), 0);
  if (num_clients == 1) return part;

  std::vector<std::vector<std::size_t>> by_class(ds.num_classes);
  for (std::size_t j = 0; j < ds.size(); ++j) {
    by_class[static_cast<std::size_t>(ds.labels[j])].push_back(j);
  }

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    Rng rng(derive_seed(seed, 0, static_cast<std::uint64_t>(attempt),
                        StreamTag::kPartition));
    std::vector<std::size_t> counts(num_clients, 0);
    for (const auto& members : by_class) {
      std::vector<std::size_t> shuffled = members;
      rng.shuffle(std::span<std::size_t>(shuffled));
      const std::vector<double> shares =
          dirichlet_draw(rng, alpha, num_clients);
      const std::vector<std::size_t> take =
          round_shares(shares, shuffled.size());
      std::size_t cursor = 0;
      for (std::size_t i = 0; i < num_clients; ++i) {
        for (std::size_t k = 0; k < take[i]; ++k) {
          part.assignment[shuffled[cursor++]] = i;
        }
        counts[i] += take[i];
      }
    }
    if (std::find(counts.begin(), counts.end(), 0) == counts.end()) {
      return part;
    }
  }

  // Fallback: each empty client takes the highest-index sample of the
  // currently largest client.
  std::vector<std::size_t> counts = part.client_counts();
  for (std::size_t i = 0; i < num_clients; ++i) {
    if (counts[i] != 0) continue;
    const std::size_t donor = static_cast<std::size_t>(
        std::max_element(counts.begin(), counts.end()) - counts.begin());
    for (std::size_t j = ds.size(); j-- > 0;) {
      if (part.assignment[j] == donor) {
        part.assignment[j] = i;
        break;
      }
    }
    --counts[donor];
    ++counts[i];
  }
  return part;
}

// ---------------------------------------------------------------------------
// Objectives

std::size_t data_objective_dimension(ObjectiveKind kind, std::size_t features,
                                     std::size_t classes, std::size_t hidden) {
  switch (kind) {
    case ObjectiveKind::kLogistic:
      return (classes - 1) * features;
    case ObjectiveKind::kMlp:
      return hidden * features + hidden + classes * hidden + classes;
    case ObjectiveKind::kQuadratic:
      break;
  }
  throw ShapeError("quadratic objectives have no data-derived dimension");
}

Objective Objective::Quadratic(std::size_t client_id,
                               std::vector<double> curvature,
                               std::vector<double> center, NoiseSpec noise) {
  if (curvature.empty()) throw ShapeError("quadratic of dimension 0");
  if (curvature.size() != center.size()) {
    throw ShapeError("curvature and center dimensions differ");
  }
  for (double a : curvature) {
    if (!(a >= 0.0) || !std::isfinite(a)) {
      throw ShapeError("quadratic curvature entries must be finite and >= 0");
    }
  }
  if (!(noise.sigma >= 0.0)) throw ShapeError("noise sigma must be >= 0");
  Objective o;
  o.kind_ = ObjectiveKind::kQuadratic;
  o.client_id_ = client_id;
  o.dimension_ = curvature.size();
  o.noise_ = noise;
  o.curvature_ = std::move(curvature);
  o.center_ = std::move(center);
  return o;
}

Objective Objective::Logistic(std::size_t client_id,
                              std::shared_ptr<const SyntheticDataset> data,
                              std::vector<std::size_t> samples,
                              NoiseSpec noise) {
  if (!data) throw ShapeError("logistic objective without a dataset");
  data->validate();
  if (data->num_classes < 2) throw ShapeError("logistic needs >= 2 classes");
  for (std::size_t j : samples) {
    if (j >= data->size()) throw ShapeError("sample index out of range");
  }
  if (!(noise.sigma >= 0.0)) throw ShapeError("noise sigma must be >= 0");
  Objective o;
  o.kind_ = ObjectiveKind::kLogistic;
  o.client_id_ = client_id;
  o.dimension_ = data_objective_dimension(ObjectiveKind::kLogistic,
                                          data->num_features,
                                          data->num_classes, 0);
  o.noise_ = noise;
  o.data_ = std::move(data);
  o.samples_ = std::move(samples);
  return o;
}

Objective Objective::Mlp(std::size_t client_id,
                         std::shared_ptr<const SyntheticDataset> data,
                         std::vector<std::size_t> samples, std::size_t hidden,
                         NoiseSpec noise) {
  if (!data) throw ShapeError("mlp objective without a dataset");
  data->validate();
  if (data->num_features > kMaxMlpFeatures || hidden == 0 ||
      hidden > kMaxMlpHidden || data->num_classes > kMaxMlpClasses ||
      data->num_classes < 2) {
    throw ShapeError("mlp shape outside p<=32, 1<=H<=32, 2<=C<=8");
  }
  for (std::size_t j : samples) {
    if (j >= data->size()) throw ShapeError("sample index out of range");
  }
  if (!(noise.sigma >= 0.0)) throw ShapeError("noise sigma must be >= 0");
  Objective o;
  o.kind_ = ObjectiveKind::kMlp;
  o.client_id_ = client_id;
  o.dimension_ = data_objective_dimension(
      ObjectiveKind::kMlp, data->num_features, data->num_classes, hidden);
  o.noise_ = noise;
  o.data_ = std::move(data);
  o.samples_ = std::move(samples);
  o.hidden_ = hidden;
  return o;
}

std::span<const std::size_t> Objective::resolve(const Batch& batch) const {
  std::span<const std::size_t> rows = batch.full ? samples_ : batch.rows;
  if (kind_ != ObjectiveKind::kQuadratic && rows.empty()) {
    throw BatchError("empty batch for client " + std::to_string(client_id_));
  }
  if (kind_ == ObjectiveKind::kQuadratic && !batch.full && rows.empty()) {
    throw BatchError("empty batch for client " + std::to_string(client_id_));
  }
  return rows;
}

double Objective::loss(std::span<const double> theta,
                       const Batch& batch) const {
  require_dimension(theta.size(), dimension_);
  std::vector<double> scratch(dimension_);
  return loss_and_grad(theta, batch, scratch);
}

std::vector<double> Objective::grad(std::span<const double> theta,
                                    const Batch& batch) const {
  std::vector<double> g(dimension_);
  loss_and_grad(theta, batch, g);
  return g;
}

double Objective::loss_and_grad(std::span<const double> theta,
                                const Batch& batch,
                                std::span<double> grad_out) const {
  require_dimension(theta.size(), dimension_);
  require_dimension(grad_out.size(), dimension_);
  const auto rows = resolve(batch);
  switch (kind_) {
    case ObjectiveKind::kQuadratic:
      return quadratic_eval(theta, grad_out);
    case ObjectiveKind::kLogistic:
      return logistic_eval(theta, rows, grad_out);
    case ObjectiveKind::kMlp:
      return mlp_eval(theta, rows, grad_out);
  }
  return 0.0;
}

double Objective::quadratic_eval(std::span<const double> theta,
                                 std::span<double> grad_out) const {
  double loss = 0.0;
  for (std::size_t k = 0; k < dimension_; ++k) {
    const double r = theta[k] - center_[k];
    grad_out[k] = curvature_[k] * r;
    loss += curvature_[k] * r * r;
  }
  return 0.5 * loss;
}

double Objective::logistic_eval(std::span<const double> theta,
                                std::span<const std::size_t> rows,
                                std::span<double> grad_out) const {
  const std::size_t p = data_->num_features;
  const std::size_t C = data_->num_classes;
  std::fill(grad_out.begin(), grad_out.end(), 0.0);
  std::vector<double> z(C);
  double total = 0.0;
  for (std::size_t j : rows) {
    const auto x = data_->row(j);
    const auto y = static_cast<std::size_t>(data_->labels[j]);
    z[0] = 0.0;
    for (std::size_t c = 1; c < C; ++c) {
      z[c] = dot(theta.subspan((c - 1) * p, p), x);
    }
    const double zy = z[y];
    total += softmax_inplace(z) - zy;
    for (std::size_t c = 1; c < C; ++c) {
      const double r = z[c] - (c == y ? 1.0 : 0.0);
      axpy(r, x, grad_out.subspan((c - 1) * p, p));
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad_out) g *= inv;
  return total * inv;
}

double Objective::mlp_eval(std::span<const double> theta,
                           std::span<const std::size_t> rows,
                           std::span<double> grad_out) const {
  const std::size_t p = data_->num_features;
  const std::size_t C = data_->num_classes;
  const std::size_t H = hidden_;
  const auto w1 = theta.subspan(0, H * p);
  const auto b1 = theta.subspan(H * p, H);
  const auto w2 = theta.subspan(H * p + H, C * H);
  const auto b2 = theta.subspan(H * p + H + C * H, C);
  auto gw1 = grad_out.subspan(0, H * p);
  auto gb1 = grad_out.subspan(H * p, H);
  auto gw2 = grad_out.subspan(H * p + H, C * H);
  auto gb2 = grad_out.subspan(H * p + H + C * H, C);
  std::fill(grad_out.begin(), grad_out.end(), 0.0);

  std::vector<double> h(H), z(C), dh(H);
  double total = 0.0;
  for (std::size_t j : rows) {
    const auto x = data_->row(j);
    const auto y = static_cast<std::size_t>(data_->labels[j]);
    for (std::size_t u = 0; u < H; ++u) {
      h[u] = std::tanh(dot(w1.subspan(u * p, p), x) + b1[u]);
    }
    for (std::size_t c = 0; c < C; ++c) {
      z[c] = dot(w2.subspan(c * H, H), h) + b2[c];
    }
    const double zy = z[y];
    total += softmax_inplace(z) - zy;
    std::fill(dh.begin(), dh.end(), 0.0);
    for (std::size_t c = 0; c < C; ++c) {
      const double r = z[c] - (c == y ? 1.0 : 0.0);
      gb2[c] += r;
      axpy(r, h, gw2.subspan(c * H, H));
      axpy(r, w2.subspan(c * H, H), dh);
    }
    for (std::size_t u = 0; u < H; ++u) {
      const double a = dh[u] * (1.0 - h[u] * h[u]);
      gb1[u] += a;
      axpy(a, x, gw1.subspan(u * p, p));
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& g : grad_out) g *= inv;
  return total * inv;
}

// ---------------------------------------------------------------------------
// Stochastic gradients

GradientStream::GradientStream(const Objective& objective, std::uint64_t seed,
                               std::size_t batch_size)
    : objective_(&objective), rng_(seed), batch_size_(batch_size) {
  if (objective.kind() != ObjectiveKind::kQuadratic && batch_size_ > 0) {
    const auto s = objective.samples();
    order_.assign(s.begin(), s.end());
    cursor_ = order_.size();  // forces a shuffle on first use
  }
}

void GradientStream::next(std::span<const double> theta,
                          std::span<double> grad_out) {
  const bool minibatch =
      objective_->kind() != ObjectiveKind::kQuadratic && batch_size_ > 0;
  if (minibatch) {
    if (order_.empty()) {
      throw BatchError("client " + std::to_string(objective_->client_id()) +
                       " has no samples");
    }
    const std::size_t take = std::min(batch_size_, order_.size());
    batch_.clear();
    while (batch_.size() < take) {
      if (cursor_ == order_.size()) {
        rng_.shuffle(std::span<std::size_t>(order_));
        cursor_ = 0;
      }
      batch_.push_back(order_[cursor_++]);
    }
    objective_->loss_and_grad(theta, Batch::Of(batch_), grad_out);
  } else {
    objective_->loss_and_grad(theta, Batch::Full(), grad_out);
  }
  const double sigma = objective_->noise().sigma;
  if (sigma > 0.0) {
    const double scale =
        sigma / std::sqrt(static_cast<double>(objective_->dimension()));
    for (double& g : grad_out) g += scale * rng_.normal();
  }
}

// ---------------------------------------------------------------------------
// Suite-level quantities

namespace {

void require_nonempty(std::span<const Objective> objectives) {
  if (objectives.empty()) throw ShapeError("empty objective suite");
  for (const auto& o : objectives) {
    require_dimension(o.dimension(), objectives.front().dimension());
  }
}

}  // namespace

double global_loss(std::span<const Objective> objectives,
                   std::span<const double> theta) {
  require_nonempty(objectives);
  double acc = 0.0;
  for (const auto& o : objectives) acc += o.loss(theta);
  return acc / static_cast<double>(objectives.size());
}

std::vector<double> global_grad(std::span<const Objective> objectives,
                                std::span<const double> theta) {
  require_nonempty(objectives);
  std::vector<double> g(theta.size(), 0.0);
  std::vector<double> gi(theta.size());
  for (const auto& o : objectives) {
    o.loss_and_grad(theta, Batch::Full(), gi);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += gi[k];
  }
  const double inv = 1.0 / static_cast<double>(objectives.size());
  for (double& v : g) v *= inv;
  return g;
}

double estimate_sigma_g(std::span<const Objective> objectives,
                        std::span<const double> theta) {
  require_nonempty(objectives);
  // (1/N) Σ_i ‖g_i − ḡ‖² = (1/(2N²)) Σ_{i,j} ‖g_i − g_j‖². The pairwise form
  // is exactly zero for identical clients.
  const std::size_t n = objectives.size();
  std::vector<std::vector<double>> g(n, std::vector<double>(theta.size()));
  for (std::size_t i = 0; i < n; ++i) {
    objectives[i].loss_and_grad(theta, Batch::Full(), g[i]);
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      for (std::size_t k = 0; k < theta.size(); ++k) {
        const double r = g[i][k] - g[j][k];
        acc += r * r;
      }
    }
  }
  const double nn = static_cast<double>(n);
  return acc / (nn * nn);
}

namespace {

double mlp_power_iteration(const Objective& o, Rng& rng) {
  constexpr int kProbePoints = 3;
  constexpr int kIterations = 60;
  constexpr double kStep = 1e-5;
  const std::size_t d = o.dimension();
  std::vector<double> theta(d), v(d), hv(d), gp(d), gm(d), probe(d);
  double best = 0.0;
  for (int point = 0; point < kProbePoints; ++point) {
    for (double& t : theta) t = 0.5 * rng.normal();
    for (double& x : v) x = rng.normal();
    double lambda = 0.0;
    for (int it = 0; it < kIterations; ++it) {
      const double nv = std::sqrt(norm_sq(v));
      if (nv == 0.0) break;
      for (double& x : v) x /= nv;
      for (std::size_t k = 0; k < d; ++k) probe[k] = theta[k] + kStep * v[k];
      o.loss_and_grad(probe, Batch::Full(), gp);
      for (std::size_t k = 0; k < d; ++k) probe[k] = theta[k] - kStep * v[k];
      o.loss_and_grad(probe, Batch::Full(), gm);
      for (std::size_t k = 0; k < d; ++k) {
        hv[k] = (gp[k] - gm[k]) / (2.0 * kStep);
      }
      lambda = std::sqrt(norm_sq(hv));
      v = hv;
    }
    best = std::max(best, lambda);
  }
  return best;
}

}  // namespace

SmoothnessEstimate smoothness_constant(std::span<const Objective> objectives,
                                       std::uint64_t seed) {
  require_nonempty(objectives);
  SmoothnessEstimate est;
  Rng rng(derive_seed(seed, 0, 0, StreamTag::kObjective));
  for (const auto& o : objectives) {
    switch (o.kind()) {
      case ObjectiveKind::kQuadratic:
        for (double a : o.curvature()) est.value = std::max(est.value, a);
        break;
      case ObjectiveKind::kLogistic: {
        const auto& ds = *o.dataset();
        const double kappa = ds.num_classes == 2 ? 0.25 : 0.5;
        double max_row = 0.0;
        for (std::size_t j : o.samples()) {
          max_row = std::max(max_row, norm_sq(ds.row(j)));
        }
        est.value = std::max(est.value, kappa * max_row);
        break;
      }
      case ObjectiveKind::kMlp:
        est.value = std::max(est.value, mlp_power_iteration(o, rng));
        est.is_estimate = true;
        break;
    }
  }
  return est;
}

std::optional<double> quadratic_min_value(
    std::span<const Objective> objectives) {
  require_nonempty(objectives);
  for (const auto& o : objectives) {
    if (o.kind() != ObjectiveKind::kQuadratic) return std::nullopt;
  }
  // Coordinates decouple: minimize (1/N) Σ_i ½ a_ik (θ_k − c_ik)².
  const std::size_t d = objectives.front().dimension();
  std::vector<double> minimizer(d, 0.0);
  for (std::size_t k = 0; k < d; ++k) {
    double sa = 0.0, sac = 0.0;
    for (const auto& o : objectives) {
      sa += o.curvature()[k];
      sac += o.curvature()[k] * o.center()[k];
    }
    minimizer[k] = sa > 0.0 ? sac / sa : 0.0;
  }
  return global_loss(objectives, minimizer);
}

std::vector<Objective> make_quadratic_suite(const QuadraticSuiteSpec& spec) {
  if (spec.clients == 0 || spec.dimension == 0) {
    throw ShapeError("quadratic suite needs clients and dimension > 0");
  }
  if (!(spec.curvature_min >= 0.0) ||
      !(spec.curvature_max >= spec.curvature_min)) {
    throw ShapeError("quadratic suite needs 0 <= curvature_min <= max");
  }
  Rng rng(derive_seed(spec.seed, 0, 0, StreamTag::kObjective));
  auto draw_curvature = [&] {
    std::vector<double> a(spec.dimension);
    for (double& x : a) {
      x = spec.curvature_min +
          (spec.curvature_max - spec.curvature_min) * rng.uniform();
    }
    return a;
  };
  const std::vector<double> shared = draw_curvature();
  std::vector<Objective> suite;
  suite.reserve(spec.clients);
  for (std::size_t i = 0; i < spec.clients; ++i) {
    std::vector<double> a = spec.shared_curvature ? shared : draw_curvature();
    std::vector<double> c(spec.dimension);
    for (double& x : c) x = spec.heterogeneity * rng.normal();
    suite.push_back(Objective::Quadratic(i, std::move(a), std::move(c),
                                         NoiseSpec{spec.sigma}));
  }
  return suite;
}

DataSuite make_data_suite(const DataSuiteSpec& spec) {
  if (spec.kind == ObjectiveKind::kQuadratic) {
    throw ShapeError("make_data_suite builds logistic or mlp suites");
  }
  DataSuite suite;
  auto data = std::make_shared<SyntheticDataset>(make_gaussian_mixture(
      spec.data));
  suite.partition = dirichlet_partition(*data, spec.alpha, spec.clients,
                                        spec.seed);
  suite.dataset = data;
  auto samples = suite.partition.client_samples();
  for (std::size_t i = 0; i < spec.clients; ++i) {
    if (spec.kind == ObjectiveKind::kLogistic) {
      suite.objectives.push_back(Objective::Logistic(
          i, suite.dataset, std::move(samples[i]), NoiseSpec{spec.sigma}));
    } else {
      suite.objectives.push_back(
          Objective::Mlp(i, suite.dataset, std::move(samples[i]), spec.hidden,
                         NoiseSpec{spec.sigma}));
    }
  }
  return suite;
}

}  // namespace parablock
