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

#include "parablock/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parablock/errors.hpp"
#include "parablock/rng.hpp"

namespace parablock {

namespace {

using nlohmann::json;

// A JSON object plus its dotted path; every key read is marked so that
// leftovers can be rejected.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail("", "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] void fail(const std::string& key,
                         const std::string& message) const {
    throw ConfigError(key.empty() ? path_ : field(key), message);
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  Section sub(const std::string& key) {
    return Section(raw(key), field(key));
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(key, raw(key));
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) fail(key, "is required");
    return as<T>(key, raw(key));
  }

  template <typename T>
  std::vector<T> list(const std::string& key) {
    if (!has(key)) return {};
    const json& v = raw(key);
    if (!v.is_array()) fail(key, "expected a list");
    std::vector<T> out;
    for (const json& e : v) out.push_back(as<T>(key, e));
    return out;
  }

  /// A number or a list with one entry per client.
  std::vector<double> per_client(const std::string& key, std::size_t clients,
                                 std::optional<double> fallback) {
    if (!has(key)) {
      if (!fallback) fail(key, "is required");
      return std::vector<double>(clients, *fallback);
    }
    const json& v = raw(key);
    if (v.is_number()) return std::vector<double>(clients, v.get<double>());
    std::vector<double> out = list<double>(key);
    if (out.size() != clients) {
      fail(key, "expected " + std::to_string(clients) + " entries, got " +
                    std::to_string(out.size()));
    }
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(it.key(), "unknown key");
    }
  }

 private:
  template <typename T>
  T as(const std::string& key, const json& v) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) fail(key, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) fail(key, "expected a string");
      return v.get<std::string>();
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) fail(key, "expected a number");
      return v.get<T>();
    } else {
      if (!v.is_number_unsigned()) {
        fail(key, "expected a nonnegative integer");
      }
      return v.get<T>();
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

const json& empty_object() {
  static const json kEmpty = json::object();
  return kEmpty;
}

void positive(Section& s, const std::string& key, double v) {
  if (!(v > 0.0) || !std::isfinite(v)) s.fail(key, "must be > 0");
}

void at_least_one(Section& s, const std::string& key, std::size_t v) {
  if (v < 1) s.fail(key, "must be >= 1");
}

LocalOptimizer parse_optimizer(Section s) {
  const std::string kind = s.get<std::string>("kind", "sgd");
  LocalOptimizer out;
  if (kind == "sgd") {
    SgdConfig c;
    c.eta_l = s.get<double>("eta_l", c.eta_l);
    out = c;
  } else if (kind == "adamw") {
    AdamWConfig c;
    c.eta_l = s.get<double>("eta_l", c.eta_l);
    c.beta1 = s.get<double>("beta1", c.beta1);
    c.beta2 = s.get<double>("beta2", c.beta2);
    c.epsilon = s.get<double>("epsilon", c.epsilon);
    c.weight_decay = s.get<double>("weight_decay", c.weight_decay);
    c.bias_correction = s.get<bool>("bias_correction", c.bias_correction);
    c.eps_inside_sqrt = s.get<bool>("eps_inside_sqrt", c.eps_inside_sqrt);
    out = c;
  } else {
    s.fail("kind", "unknown optimizer '" + kind + "' (sgd, adamw)");
  }
  s.finish();
  validate(out);
  return out;
}

SchedulerKind parse_scheduler(Section s) {
  const std::string kind = s.get<std::string>("kind", "random");
  SchedulerKind out;
  if (kind == "random") {
    RandomSchedule r;
    if (s.has("seed")) r.seed = s.require<std::uint64_t>("seed");
    out = r;
  } else if (kind == "sequential") {
    out = SequentialSchedule{};
  } else if (kind == "reverse") {
    out = ReverseSchedule{};
  } else if (kind == "gradient_guided") {
    out = GradientGuidedSchedule{s.get<std::size_t>("refresh_every", 0)};
  } else if (kind == "fixed") {
    FixedSchedule f;
    for (std::size_t b : s.list<std::size_t>("blocks")) f.blocks.emplace_back(b);
    out = f;
  } else {
    s.fail("kind", "unknown scheduler '" + kind +
                       "' (random, sequential, reverse, gradient_guided, fixed)");
  }
  s.finish();
  return out;
}

Participation parse_participation(Section s, std::size_t clients) {
  const std::string kind = s.get<std::string>("kind", "full");
  Participation out;
  if (kind == "full") {
    out = FullParticipation{};
  } else if (kind == "sample") {
    SampledParticipation p;
    p.m = s.require<std::size_t>("m");
    if (p.m < 1 || p.m > clients) s.fail("m", "must be in [1, clients]");
    if (s.has("seed")) p.seed = s.require<std::uint64_t>("seed");
    out = p;
  } else {
    s.fail("kind", "unknown participation '" + kind + "' (full, sample)");
  }
  s.finish();
  return out;
}

TopKConfig parse_compression(Section s) {
  TopKConfig c;
  c.ratio = s.require<double>("ratio");
  c.index_bits = s.get<int>("index_bits", c.index_bits);
  c.value_bits = s.get<int>("value_bits", c.value_bits);
  c.compress_downlink = s.get<bool>("compress_downlink", c.compress_downlink);
  s.finish();
  c.validate();
  return c;
}

ObjectiveConfig parse_objective(Section s, std::size_t clients,
                                std::uint64_t seed,
                                const std::filesystem::path& base_dir) {
  ObjectiveConfig out;
  const std::string kind_name = s.require<std::string>("kind");
  try {
    out.kind = parse_objective_kind(kind_name);
  } catch (const Error&) {
    s.fail("kind", "unknown objective '" + kind_name +
                       "' (quadratic, logistic, mlp)");
  }
  const double sigma = s.get<double>("sigma", 0.0);
  if (!(sigma >= 0.0)) s.fail("sigma", "must be >= 0");
  const std::uint64_t obj_seed =
      s.get<std::uint64_t>("seed", derive_seed(seed, 0, 0, StreamTag::kObjective));

  if (out.kind == ObjectiveKind::kQuadratic) {
    QuadraticSuiteSpec& q = out.quadratic;
    q.clients = clients;
    q.dimension = s.require<std::size_t>("dimension");
    at_least_one(s, "dimension", q.dimension);
    q.curvature_min = s.get<double>("curvature_min", q.curvature_min);
    q.curvature_max = s.get<double>("curvature_max", q.curvature_max);
    if (!(q.curvature_min >= 0.0) || !(q.curvature_max >= q.curvature_min)) {
      s.fail("curvature_max", "need 0 <= curvature_min <= curvature_max");
    }
    q.heterogeneity = s.get<double>("heterogeneity", q.heterogeneity);
    if (!(q.heterogeneity >= 0.0)) s.fail("heterogeneity", "must be >= 0");
    q.shared_curvature = s.get<bool>("shared_curvature", q.shared_curvature);
    q.sigma = sigma;
    q.seed = obj_seed;
  } else {
    DataSuiteSpec& d = out.data;
    d.kind = out.kind;
    d.clients = clients;
    d.alpha = s.get<double>("alpha", d.alpha);
    positive(s, "alpha", d.alpha);
    d.hidden = s.get<std::size_t>("hidden", d.hidden);
    d.sigma = sigma;
    d.seed = obj_seed;
    if (s.has("dataset_csv")) {
      const std::filesystem::path p =
          base_dir / s.require<std::string>("dataset_csv");
      std::ifstream in(p);
      if (!in) s.fail("dataset_csv", "cannot open " + p.string());
      try {
        out.dataset = std::make_shared<SyntheticDataset>(read_dataset_csv(in));
      } catch (const Error& e) {
        s.fail("dataset_csv", e.what());
      }
      d.data.features = out.dataset->num_features;
      d.data.classes = out.dataset->num_classes;
      d.data.samples = out.dataset->size();
    } else {
      d.data.samples = s.require<std::size_t>("samples");
      d.data.features = s.require<std::size_t>("features");
      d.data.classes = s.get<std::size_t>("classes", d.data.classes);
      d.data.separation = s.get<double>("separation", d.data.separation);
      d.data.unit_norm = s.get<bool>("unit_norm", d.data.unit_norm);
      d.data.seed = s.get<std::uint64_t>(
          "data_seed", derive_seed(seed, 0, 0, StreamTag::kData));
      at_least_one(s, "features", d.data.features);
      if (d.data.samples < clients) s.fail("samples", "fewer samples than clients");
    }
    if (d.data.classes < 2) s.fail("classes", "must be >= 2");
    if (out.kind == ObjectiveKind::kMlp) {
      if (d.hidden < 1 || d.hidden > 32) s.fail("hidden", "must be in [1, 32]");
      if (d.data.features > 32) s.fail("features", "mlp supports at most 32");
      if (d.data.classes > 8) s.fail("classes", "mlp supports at most 8");
    }
  }
  s.finish();
  return out;
}

// Natural layer sizes of the objective: bias-free weight rows per class for
// logistic, [W1, b1, W2, b2] for the MLP.
std::vector<std::size_t> objective_layers(const ObjectiveConfig& obj) {
  const std::size_t p = obj.data.data.features;
  const std::size_t C = obj.data.data.classes;
  const std::size_t H = obj.data.hidden;
  switch (obj.kind) {
    case ObjectiveKind::kLogistic:
      return std::vector<std::size_t>(C - 1, p);
    case ObjectiveKind::kMlp:
      return {H * p, H, C * H, C};
    case ObjectiveKind::kQuadratic:
      break;
  }
  throw ConfigError("partition.kind", "quadratic objectives have no layers");
}

BlockPartition parse_partition(Section s, const ObjectiveConfig& obj,
                               std::size_t d) {
  const std::string kind = s.get<std::string>("kind", "equal");
  PartitionStrategy strategy;
  if (kind == "equal") {
    const std::size_t B = s.require<std::size_t>("blocks");
    at_least_one(s, "blocks", B);
    if (B > d) s.fail("blocks", "more blocks than parameters (d = " +
                                    std::to_string(d) + ")");
    strategy = EqualBlocks{B};
  } else if (kind == "layers") {
    if (s.has("sizes")) {
      strategy = LayerBlocks{s.list<std::size_t>("sizes")};
    } else {
      try {
        strategy = LayerBlocks{objective_layers(obj)};
      } catch (const ConfigError&) {
        s.fail("kind", "quadratic objectives need explicit 'sizes'");
      }
    }
  } else if (kind == "explicit") {
    ExplicitBlocks e;
    const json& ranges = s.raw("ranges");
    if (!ranges.is_array()) s.fail("ranges", "expected a list of [begin, end)");
    for (const json& r : ranges) {
      if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() ||
          !r[1].is_number_unsigned()) {
        s.fail("ranges", "each range is [begin, end)");
      }
      e.ranges.push_back({r[0].get<std::size_t>(), r[1].get<std::size_t>()});
    }
    strategy = e;
  } else {
    s.fail("kind", "unknown partition '" + kind + "' (equal, layers, explicit)");
  }
  s.finish();
  try {
    return make_partition(d, strategy);
  } catch (const Error& e) {
    s.fail("", e.what());
  }
}

}  // namespace

std::size_t objective_dimension(const ObjectiveConfig& cfg) {
  if (cfg.kind == ObjectiveKind::kQuadratic) return cfg.quadratic.dimension;
  return data_objective_dimension(cfg.kind, cfg.data.data.features,
                                  cfg.data.data.classes, cfg.data.hidden);
}

RunConfig parse_run_config(const std::string& json_text,
                           const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed config: ") + e.what());
  }
  Section root(doc, "");
  RunConfig cfg;
  FedConfig& fed = cfg.fed;

  const std::string engine = root.get<std::string>("engine", "parablock");
  try {
    cfg.engine = parse_engine_kind(engine);
  } catch (const ConfigError&) {
    root.fail("engine", "unknown method '" + engine +
                            "' (parablock, fedbcd, fedcybgd)");
  }
  fed.seed = root.get<std::uint64_t>("seed", 0);
  fed.num_clients = root.require<std::size_t>("clients");
  at_least_one(root, "clients", fed.num_clients);
  fed.rounds = root.require<std::size_t>("rounds");
  at_least_one(root, "rounds", fed.rounds);
  fed.local_steps = root.get<std::size_t>("local_steps", 1);
  at_least_one(root, "local_steps", fed.local_steps);
  fed.eta = root.get<double>("eta", 1.0);
  positive(root, "eta", fed.eta);
  fed.staleness = root.get<std::size_t>("staleness", 1);
  if (fed.staleness > fed.rounds) root.fail("staleness", "must be <= rounds");
  fed.batch_size = root.get<std::size_t>("batch_size", 0);
  fed.full_broadcast = root.get<bool>("full_broadcast", false);

  if (!root.has("objective")) root.fail("objective", "is required");
  cfg.objective =
      parse_objective(root.sub("objective"), fed.num_clients, fed.seed, base_dir);
  const std::size_t d = objective_dimension(cfg.objective);

  if (root.has("optimizer")) fed.optimizer = parse_optimizer(root.sub("optimizer"));
  if (!root.has("partition")) root.fail("partition", "is required");
  fed.partition = parse_partition(root.sub("partition"), cfg.objective, d);
  if (root.has("scheduler")) fed.scheduler = parse_scheduler(root.sub("scheduler"));
  if (root.has("participation")) {
    fed.participation =
        parse_participation(root.sub("participation"), fed.num_clients);
  }
  if (root.has("compression")) {
    fed.compression = parse_compression(root.sub("compression"));
  }

  if (root.has("init")) {
    Section s = root.sub("init");
    const std::string kind = s.get<std::string>("kind", "zeros");
    if (kind == "zeros") {
      cfg.init.kind = InitConfig::Kind::kZeros;
    } else if (kind == "normal") {
      cfg.init.kind = InitConfig::Kind::kNormal;
    } else {
      s.fail("kind", "unknown init '" + kind + "' (zeros, normal)");
    }
    cfg.init.scale = s.get<double>("scale", 1.0);
    if (!(cfg.init.scale >= 0.0)) s.fail("scale", "must be >= 0");
    s.finish();
  }

  {
    Section s = root.has("link") ? root.sub("link") : Section(empty_object(), "link");
    cfg.link.up_bw = s.per_client("up_bw", fed.num_clients, 1e6);
    cfg.link.down_bw = s.per_client("down_bw", fed.num_clients, 1e6);
    cfg.link.latency = s.get<double>("latency", 0.0);
    s.finish();
    cfg.link.validate(fed.num_clients);
  }
  {
    Section s = root.has("compute") ? root.sub("compute")
                                    : Section(empty_object(), "compute");
    cfg.compute.sec_per_local_step =
        s.per_client("sec_per_local_step", fed.num_clients, 1e-3);
    cfg.compute.reference_batch = s.get<double>("reference_batch", 1.0);
    cfg.compute.batch_size = s.get<double>(
        "batch_size", fed.batch_size > 0 ? static_cast<double>(fed.batch_size)
                                         : cfg.compute.reference_batch);
    s.finish();
    cfg.compute.validate(fed.num_clients);
  }

  if (root.has("output")) {
    Section s = root.sub("output");
    auto path = [&](const std::string& key) -> std::filesystem::path {
      if (!s.has(key)) return {};
      return base_dir / s.require<std::string>(key);
    };
    cfg.output.trace = path("trace");
    cfg.output.summary = path("summary");
    cfg.output.compare = path("compare");
    s.finish();
  }

  if (root.has("sweep")) {
    Section s = root.sub("sweep");
    cfg.sweep.methods = s.list<std::string>("methods");
    for (const std::string& m : cfg.sweep.methods) {
      std::string base = m;
      if (base.size() > 5 && base.ends_with("+topk")) {
        base = base.substr(0, base.size() - 5);
      }
      try {
        parse_engine_kind(base);
      } catch (const ConfigError&) {
        s.fail("methods", "unknown method '" + m + "'");
      }
    }
    cfg.sweep.bandwidths = s.list<double>("bandwidths");
    for (double b : cfg.sweep.bandwidths) positive(s, "bandwidths", b);
    cfg.sweep.batch_sizes = s.list<double>("batch_sizes");
    for (double b : cfg.sweep.batch_sizes) positive(s, "batch_sizes", b);
    cfg.sweep.topk_ratio = s.get<double>("topk_ratio", cfg.sweep.topk_ratio);
    if (!(cfg.sweep.topk_ratio > 0.0 && cfg.sweep.topk_ratio <= 1.0)) {
      s.fail("topk_ratio", "must be in (0, 1]");
    }
    s.finish();
  }

  if (root.has("schedule")) {
    Section s = root.sub("schedule");
    cfg.schedule.corollary = s.get<bool>("corollary", false);
    cfg.schedule.c_eta = s.get<double>("c_eta", 1.0);
    cfg.schedule.c_etal = s.get<double>("c_etal", 1.0);
    positive(s, "c_eta", cfg.schedule.c_eta);
    positive(s, "c_etal", cfg.schedule.c_etal);
    s.finish();
    if (cfg.schedule.corollary &&
        !std::holds_alternative<SgdConfig>(fed.optimizer)) {
      s.fail("corollary", "the step-size schedule applies to sgd only");
    }
  }
  root.finish();

  fed.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.parent_path());
}

Instance build_instance(RunConfig& cfg) {
  Instance inst;
  const ObjectiveConfig& obj = cfg.objective;
  if (obj.kind == ObjectiveKind::kQuadratic) {
    inst.objectives = make_quadratic_suite(obj.quadratic);
    inst.optimum = quadratic_min_value(inst.objectives);
  } else if (obj.dataset) {
    const DataSuiteSpec& spec = obj.data;
    inst.data_partition =
        dirichlet_partition(*obj.dataset, spec.alpha, spec.clients, spec.seed);
    auto samples = inst.data_partition->client_samples();
    for (std::size_t i = 0; i < spec.clients; ++i) {
      if (spec.kind == ObjectiveKind::kLogistic) {
        inst.objectives.push_back(Objective::Logistic(
            i, obj.dataset, std::move(samples[i]), NoiseSpec{spec.sigma}));
      } else {
        inst.objectives.push_back(Objective::Mlp(i, obj.dataset,
                                                 std::move(samples[i]),
                                                 spec.hidden,
                                                 NoiseSpec{spec.sigma}));
      }
    }
  } else {
    DataSuite suite = make_data_suite(obj.data);
    inst.data_partition = std::move(suite.partition);
    inst.objectives = std::move(suite.objectives);
  }

  const std::size_t d = objective_dimension(obj);
  inst.theta0 = ParamVector(d);
  if (cfg.init.kind == InitConfig::Kind::kNormal) {
    Rng rng(derive_seed(cfg.fed.seed, 0, 0, StreamTag::kInit));
    for (std::size_t k = 0; k < d; ++k) {
      inst.theta0[k] = cfg.init.scale * rng.normal();
    }
  }

  const SmoothnessEstimate L = smoothness_constant(
      inst.objectives, derive_seed(cfg.fed.seed, 0, 0, StreamTag::kObjective));
  inst.smoothness = L.value;
  inst.smoothness_is_estimate = L.is_estimate;

  if (cfg.schedule.corollary) {
    if (!(inst.smoothness > 0.0)) {
      throw ConfigError("schedule.corollary", "smoothness constant is zero");
    }
    inst.step_sizes =
        corollary_schedule(cfg.fed.rounds, cfg.fed.local_steps,
                           cfg.fed.num_clients, inst.smoothness,
                           cfg.schedule.c_eta, cfg.schedule.c_etal);
    cfg.fed.eta = inst.step_sizes->eta;
    cfg.fed.optimizer = SgdConfig{inst.step_sizes->eta_l};
  }
  return inst;
}

BoundInputs bound_inputs(const RunConfig& cfg, const Instance& inst) {
  BoundInputs in;
  in.eta = cfg.fed.eta;
  in.eta_l = local_learning_rate(cfg.fed.optimizer);
  in.T = cfg.fed.rounds;
  in.K = cfg.fed.local_steps;
  in.N = cfg.fed.num_clients;
  in.L = inst.smoothness;
  in.sigma = cfg.objective.kind == ObjectiveKind::kQuadratic
                 ? cfg.objective.quadratic.sigma
                 : cfg.objective.data.sigma;
  in.sigma_g =
      std::sqrt(estimate_sigma_g(inst.objectives, inst.theta0.values()));
  const double f0 = global_loss(inst.objectives, inst.theta0.values());
  in.F = std::max(0.0, f0 - inst.optimum.value_or(0.0));
  return in;
}

}  // namespace parablock
