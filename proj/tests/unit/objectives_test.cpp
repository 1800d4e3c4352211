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

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gtest/gtest.h"
#include "parablock/errors.hpp"
#include "parablock/gradcheck.hpp"
#include "parablock/param.hpp"

namespace parablock {
namespace {

std::vector<std::size_t> AllRows(const SyntheticDataset& ds) {
  std::vector<std::size_t> rows(ds.size());
  for (std::size_t j = 0; j < rows.size(); ++j) rows[j] = j;
  return rows;
}

std::shared_ptr<const SyntheticDataset> Mixture(std::size_t n, std::size_t p,
                                                std::size_t classes,
                                                std::uint64_t seed,
                                                bool unit_norm = false) {
  MixtureSpec spec;
  spec.samples = n;
  spec.features = p;
  spec.classes = classes;
  spec.seed = seed;
  spec.unit_norm = unit_norm;
  return std::make_shared<SyntheticDataset>(make_gaussian_mixture(spec));
}

// ---------------------------------------------------------------------------
// Loss and gradient values

TEST(QuadraticTest, LossAtKnownPoint) {
  const auto f = Objective::Quadratic(0, {1, 1}, {0, 0});
  EXPECT_EQ(f.loss(std::vector<double>{3, 4}), 12.5);
}

TEST(QuadraticTest, ZeroAtCenter) {
  const auto f = Objective::Quadratic(0, {2, 3}, {1, -1});
  EXPECT_EQ(f.loss(std::vector<double>{1, -1}), 0.0);
  EXPECT_EQ(f.grad(std::vector<double>{1, -1}), (std::vector<double>{0, 0}));
}

TEST(QuadraticTest, GradientOfHalfSquaredNorm) {
  const auto f = Objective::Quadratic(0, {1, 1}, {0, 0});
  EXPECT_EQ(f.grad(std::vector<double>{3, 4}), (std::vector<double>{3, 4}));
}

TEST(QuadraticTest, RejectsNegativeCurvatureAndBadShapes) {
  EXPECT_THROW(Objective::Quadratic(0, {1, -1}, {0, 0}), ShapeError);
  EXPECT_THROW(Objective::Quadratic(0, {1}, {0, 0}), ShapeError);
  const auto f = Objective::Quadratic(0, {1, 1}, {0, 0});
  EXPECT_THROW(f.loss(std::vector<double>{1}), ShapeError);
}

TEST(LogisticTest, EmptyBatchIsAnError) {
  const auto ds = Mixture(20, 3, 2, 1);
  const auto f = Objective::Logistic(0, ds, AllRows(*ds));
  const std::vector<std::size_t> none;
  std::vector<double> theta(f.dimension(), 0.0);
  EXPECT_THROW(f.loss(theta, Batch::Of(none)), BatchError);
}

TEST(LogisticTest, ZeroModelGivesLogC) {
  const auto ds = Mixture(30, 3, 3, 2);
  const auto f = Objective::Logistic(0, ds, AllRows(*ds));
  EXPECT_EQ(f.dimension(), 6u);
  std::vector<double> theta(f.dimension(), 0.0);
  EXPECT_NEAR(f.loss(theta), std::log(3.0), 1e-15);
}

// Straight-line forward pass: explicit index arithmetic, no shared helpers.
double MlpLossOracle(const SyntheticDataset& ds, std::size_t H,
                     const std::vector<double>& th) {
  const std::size_t p = ds.num_features, C = ds.num_classes;
  double total = 0.0;
  for (std::size_t j = 0; j < ds.size(); ++j) {
    std::vector<double> h(H);
    for (std::size_t u = 0; u < H; ++u) {
      double a = th[H * p + u];
      for (std::size_t k = 0; k < p; ++k) {
        a += th[u * p + k] * ds.features[j * p + k];
      }
      h[u] = std::tanh(a);
    }
    std::vector<double> z(C);
    double zmax = -INFINITY;
    for (std::size_t c = 0; c < C; ++c) {
      double a = th[H * p + H + C * H + c];
      for (std::size_t u = 0; u < H; ++u) a += th[H * p + H + c * H + u] * h[u];
      z[c] = a;
      zmax = std::max(zmax, a);
    }
    double se = 0.0;
    for (std::size_t c = 0; c < C; ++c) se += std::exp(z[c] - zmax);
    total += zmax + std::log(se) - z[static_cast<std::size_t>(ds.labels[j])];
  }
  return total / static_cast<double>(ds.size());
}

TEST(MlpTest, MatchesIndependentForwardPass) {
  const auto ds = Mixture(8, 4, 3, 3);
  const auto f = Objective::Mlp(0, ds, AllRows(*ds), 5);
  ASSERT_EQ(f.dimension(), 5u * 4 + 5 + 3 * 5 + 3);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> dist(0.0, 0.7);
  for (int trial = 0; trial < 5; ++trial) {
    std::vector<double> theta(f.dimension());
    for (double& v : theta) v = dist(gen);
    const double expected = MlpLossOracle(*ds, 5, theta);
    EXPECT_NEAR(f.loss(theta), expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(MlpTest, GradientMatchesFiniteDifferences) {
  const auto ds = Mixture(24, 4, 3, 5);
  const auto f = Objective::Mlp(0, ds, AllRows(*ds), 6);
  std::mt19937_64 gen(5);
  std::normal_distribution<double> dist(0.0, 0.5);
  std::vector<double> theta(f.dimension());
  for (double& v : theta) v = dist(gen);
  const auto g = f.grad(theta);
  const auto fd = finite_difference_grad(f, theta, 1e-5);
  EXPECT_LE(gradient_rel_error(g, fd), 1e-5);
}

TEST(MlpTest, RejectsOversizedShapes) {
  const auto wide = Mixture(10, 33, 2, 1);
  EXPECT_THROW(Objective::Mlp(0, wide, AllRows(*wide), 4), ShapeError);
  const auto ds = Mixture(10, 3, 2, 1);
  EXPECT_THROW(Objective::Mlp(0, ds, AllRows(*ds), 33), ShapeError);
}

TEST(GradCheckTest, BatteryPassesForEveryKind) {
  for (const auto& c : gradcheck_battery(1, 4)) {
    EXPECT_LE(c.rel_error, 1e-5) << to_string(c.kind) << " point " << c.point;
  }
}

TEST(ObjectiveKindTest, ParseRoundTrip) {
  for (auto k : {ObjectiveKind::kQuadratic, ObjectiveKind::kLogistic,
                 ObjectiveKind::kMlp}) {
    EXPECT_EQ(parse_objective_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_objective_kind("svm"), ConfigError);
}

// ---------------------------------------------------------------------------
// Stochastic gradients

TEST(GradientStreamTest, QuadraticNoiseIsUnbiasedWithVarianceSigmaSquared) {
  const std::vector<double> a{1, 2, 3, 4};
  const std::vector<double> c{0, 1, 0, -1};
  const auto f = Objective::Quadratic(0, a, c, NoiseSpec{0.3});
  const std::vector<double> theta{1, 1, 1, 1};
  const auto exact = f.grad(theta);
  GradientStream stream(f, 77);
  constexpr int kDraws = 40000;
  std::vector<double> mean(4, 0.0), g(4);
  double noise_sq = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    stream.next(theta, g);
    for (int k = 0; k < 4; ++k) {
      mean[k] += g[k] / kDraws;
      noise_sq += (g[k] - exact[k]) * (g[k] - exact[k]) / kDraws;
    }
  }
  // Per-coordinate std is 0.3/2; 6 standard errors of the mean.
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(mean[k], exact[k], 6 * 0.15 / std::sqrt(kDraws));
  }
  EXPECT_NEAR(noise_sq, 0.09, 0.005);
}

TEST(GradientStreamTest, EpochOfMinibatchesAveragesToFullGradient) {
  const auto ds = Mixture(40, 3, 3, 9);
  const auto f = Objective::Logistic(0, ds, AllRows(*ds));
  std::vector<double> theta(f.dimension());
  for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = 0.1 * k - 0.2;
  const auto full = f.grad(theta);
  GradientStream stream(f, 3, 8);
  std::vector<double> mean(theta.size(), 0.0), g(theta.size());
  for (int b = 0; b < 5; ++b) {
    stream.next(theta, g);
    for (std::size_t k = 0; k < g.size(); ++k) mean[k] += g[k] / 5.0;
  }
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(mean[k], full[k], 1e-14);
  }
}

TEST(GradientStreamTest, SameSeedSameDraws) {
  const auto f = Objective::Quadratic(0, {1, 1}, {0, 0}, NoiseSpec{1.0});
  GradientStream a(f, 5), b(f, 5);
  std::vector<double> ga(2), gb(2);
  const std::vector<double> theta{0.5, 0.5};
  for (int i = 0; i < 10; ++i) {
    a.next(theta, ga);
    b.next(theta, gb);
    ASSERT_EQ(ga, gb);
  }
}

// ---------------------------------------------------------------------------
// Heterogeneity and smoothness

TEST(SigmaGTest, IdenticalClientsGiveZero) {
  std::vector<Objective> fs;
  for (int i = 0; i < 3; ++i) fs.push_back(Objective::Quadratic(i, {1, 2}, {1, 1}));
  EXPECT_EQ(estimate_sigma_g(fs, std::vector<double>{0.3, -2}), 0.0);
}

TEST(SigmaGTest, SymmetricCentersGiveOne) {
  std::vector<Objective> fs{Objective::Quadratic(0, {1}, {1}),
                            Objective::Quadratic(1, {1}, {-1})};
  EXPECT_EQ(estimate_sigma_g(fs, std::vector<double>{0}), 1.0);
}

TEST(SigmaGTest, MatchesClosedFormForHeterogeneousQuadratics) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> curv(0.2, 2.0);
  std::normal_distribution<double> center;
  constexpr std::size_t kN = 5, kD = 6;
  std::vector<std::vector<double>> A(kN, std::vector<double>(kD));
  std::vector<std::vector<double>> C = A;
  std::vector<Objective> fs;
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t k = 0; k < kD; ++k) {
      A[i][k] = curv(gen);
      C[i][k] = center(gen);
    }
    fs.push_back(Objective::Quadratic(i, A[i], C[i]));
  }
  std::vector<double> theta(kD);
  for (double& v : theta) v = center(gen);

  // g_i = A_i (θ − c_i); σ_g² = (1/N) Σ_i ‖g_i − ḡ‖².
  std::vector<double> mean(kD, 0.0);
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t k = 0; k < kD; ++k) {
      mean[k] += A[i][k] * (theta[k] - C[i][k]) / kN;
    }
  }
  double expected = 0.0;
  for (std::size_t i = 0; i < kN; ++i) {
    for (std::size_t k = 0; k < kD; ++k) {
      const double r = A[i][k] * (theta[k] - C[i][k]) - mean[k];
      expected += r * r / kN;
    }
  }
  EXPECT_NEAR(estimate_sigma_g(fs, theta), expected, 1e-12 * expected);
}

TEST(SmoothnessTest, QuadraticIsMaxCurvature) {
  std::vector<Objective> fs{Objective::Quadratic(0, {2, 5}, {0, 0})};
  const auto L = smoothness_constant(fs);
  EXPECT_EQ(L.value, 5.0);
  EXPECT_FALSE(L.is_estimate);
}

TEST(SmoothnessTest, LinearFunctionHasZeroCurvature) {
  std::vector<Objective> fs{Objective::Quadratic(0, {0, 0}, {1, 1})};
  EXPECT_EQ(smoothness_constant(fs).value, 0.0);
}

TEST(SmoothnessTest, BinaryLogisticWithUnitRowsIsAtMostAQuarter) {
  const auto ds = Mixture(60, 4, 2, 21, /*unit_norm=*/true);
  std::vector<Objective> fs{Objective::Logistic(0, ds, AllRows(*ds))};
  const double L = smoothness_constant(fs).value;
  EXPECT_LE(L, 0.25 + 1e-15);

  // Largest Rayleigh quotient of finite-difference Hessian-vector products.
  std::mt19937_64 gen(21);
  std::normal_distribution<double> dist;
  const std::size_t d = fs[0].dimension();
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> theta(d), v(d);
    for (double& x : theta) x = dist(gen);
    for (double& x : v) x = dist(gen);
    const double vn = std::sqrt(norm_sq(v));
    for (double& x : v) x /= vn;
    const double h = 1e-5;
    std::vector<double> tp = theta, tm = theta;
    for (std::size_t k = 0; k < d; ++k) {
      tp[k] += h * v[k];
      tm[k] -= h * v[k];
    }
    const auto gp = fs[0].grad(tp);
    const auto gm = fs[0].grad(tm);
    double q = 0.0;
    for (std::size_t k = 0; k < d; ++k) q += v[k] * (gp[k] - gm[k]) / (2 * h);
    worst = std::max(worst, q);
  }
  EXPECT_LE(worst, L + 1e-6);
}

TEST(SmoothnessTest, MlpIsFlaggedAsEstimate) {
  const auto ds = Mixture(16, 3, 2, 4);
  std::vector<Objective> fs{Objective::Mlp(0, ds, AllRows(*ds), 4)};
  const auto L = smoothness_constant(fs, 1);
  EXPECT_TRUE(L.is_estimate);
  EXPECT_GT(L.value, 0.0);
}

TEST(QuadraticMinTest, CoordinatewiseWeightedCenter) {
  std::vector<Objective> fs{Objective::Quadratic(0, {1}, {1}),
                            Objective::Quadratic(1, {1}, {-1})};
  // Minimizer 0, each client contributes ½.
  EXPECT_EQ(quadratic_min_value(fs).value(), 0.5);
}

// ---------------------------------------------------------------------------
// Datasets and Dirichlet partitioning

TEST(DatasetTest, CsvRoundTripIsExact) {
  const auto ds = Mixture(12, 3, 3, 8);
  std::stringstream buf;
  write_dataset_csv(*ds, buf);
  const SyntheticDataset back = read_dataset_csv(buf);
  EXPECT_EQ(back.features, ds->features);
  EXPECT_EQ(back.labels, ds->labels);
  EXPECT_EQ(back.num_classes, ds->num_classes);
}

TEST(DatasetTest, MixtureIsBalanced) {
  const auto ds = Mixture(400, 2, 4, 1);
  for (std::size_t n : ds->class_counts()) EXPECT_EQ(n, 100u);
}

TEST(DirichletTest, LargeAlphaSplitsEvenly) {
  const auto ds = Mixture(10000, 2, 2, 6);
  const auto part = dirichlet_partition(*ds, 1e6, 2, 6);
  const auto hist = part.class_histogram(*ds);
  for (const auto& client : hist) {
    for (std::size_t n : client) {
      EXPECT_NEAR(static_cast<double>(n) / 5000.0, 0.5, 0.05);
    }
  }
}

TEST(DirichletTest, SingleClientGetsEverything) {
  const auto ds = Mixture(50, 2, 3, 2);
  const auto part = dirichlet_partition(*ds, 0.1, 1, 2);
  EXPECT_EQ(part.client_counts(), (std::vector<std::size_t>{50}));
}

TEST(DirichletTest, EverySampleOnceEveryClientNonempty) {
  const auto ds = Mixture(300, 2, 3, 12);
  for (double alpha : {0.01, 0.1, 1.0}) {
    const auto part = dirichlet_partition(*ds, alpha, 10, 12);
    ASSERT_EQ(part.assignment.size(), 300u);
    std::size_t total = 0;
    for (std::size_t n : part.client_counts()) {
      EXPECT_GE(n, 1u) << "alpha " << alpha;
      total += n;
    }
    EXPECT_EQ(total, 300u);
    for (std::size_t a : part.assignment) EXPECT_LT(a, 10u);
  }
}

TEST(DirichletTest, RejectsBadInputs) {
  const auto ds = Mixture(5, 2, 2, 1);
  EXPECT_THROW(dirichlet_partition(*ds, 0.0, 2, 1), PartitionError);
  EXPECT_THROW(dirichlet_partition(*ds, 1.0, 6, 1), PartitionError);
}

// Fixed-seed regression fixture. Set PARABLOCK_REGEN_GOLDEN=1 to rewrite.
TEST(DirichletTest, GoldenHistogram) {
  const auto ds = Mixture(4000, 2, 4, 13);
  const auto part = dirichlet_partition(*ds, 0.1, 4, 13);
  std::ostringstream now;
  for (const auto& client : part.class_histogram(*ds)) {
    for (std::size_t c = 0; c < client.size(); ++c) {
      now << (c ? "," : "") << client[c];
    }
    now << '\n';
  }
  const std::string path =
      std::string(PARABLOCK_GOLDEN_DIR) + "/dirichlet_alpha0.1_seed13.csv";
  if (std::getenv("PARABLOCK_REGEN_GOLDEN")) {
    std::ofstream(path) << now.str();
    GTEST_SKIP() << "rewrote " << path;
  }
  std::ifstream in(path);
  ASSERT_TRUE(in) << "missing fixture " << path;
  std::stringstream golden;
  golden << in.rdbuf();
  EXPECT_EQ(now.str(), golden.str());
}

TEST(DataSuiteTest, DimensionsMatchKinds) {
  EXPECT_EQ(data_objective_dimension(ObjectiveKind::kLogistic, 5, 3, 0), 10u);
  EXPECT_EQ(data_objective_dimension(ObjectiveKind::kMlp, 5, 3, 4),
            4u * 5 + 4 + 3 * 4 + 3);
  DataSuiteSpec spec;
  spec.kind = ObjectiveKind::kMlp;
  spec.data.samples = 60;
  spec.data.features = 3;
  spec.data.classes = 3;
  spec.clients = 3;
  spec.hidden = 4;
  spec.alpha = 0.5;
  const DataSuite suite = make_data_suite(spec);
  ASSERT_EQ(suite.objectives.size(), 3u);
  for (const auto& o : suite.objectives) {
    EXPECT_EQ(o.dimension(), data_objective_dimension(ObjectiveKind::kMlp, 3, 3, 4));
  }
}

}  // namespace
}  // namespace parablock
