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

// parablock: experiment runner.
//
//   parablock run CONFIG              trace CSV + summary
//   parablock compare CONFIG          method × bandwidth × batch sweep
//   parablock check CONFIG            replicated-model invariant battery
//   parablock bound ...               bound terms, feasibility, schedules
//   parablock gradcheck               finite-difference battery
//   parablock partition-preview ...   per-client class histograms
//
// Exit codes: 0 ok, 2 config error, 3 numeric error, 4 invariant violation.
// PARABLOCK_LOG sets the log level (trace, debug, info, warn, error, off).

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "parablock/config.hpp"
#include "parablock/engine.hpp"
#include "parablock/errors.hpp"
#include "parablock/gradcheck.hpp"
#include "parablock/invariants.hpp"
#include "parablock/theory.hpp"
#include "parablock/trace_io.hpp"

namespace pb = parablock;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInvariant = 4;

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("parablock");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* level = std::getenv("PARABLOCK_LOG")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void warn_if_infeasible(const pb::RunConfig& cfg, const pb::Instance& inst) {
  if (!std::holds_alternative<pb::SgdConfig>(cfg.fed.optimizer)) return;
  const double eta_l = pb::local_learning_rate(cfg.fed.optimizer);
  const pb::Feasibility f = pb::lr_feasible(cfg.fed.eta, eta_l,
                                            cfg.fed.local_steps,
                                            inst.smoothness);
  if (f.ok()) return;
  std::string list;
  for (const auto& v : f.violations()) list += (list.empty() ? "" : ", ") + v;
  spdlog::warn("feasibility warning: eta={} eta_l={} K={} L={}{} violates {}",
               cfg.fed.eta, eta_l, cfg.fed.local_steps, inst.smoothness,
               inst.smoothness_is_estimate ? " (estimated)" : "", list);
}

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path);
  if (!out) throw pb::ConfigError("output", "cannot write " + path.string());
  return out;
}

std::filesystem::path default_output(const std::string& config_path,
                                     const std::string& suffix) {
  return std::filesystem::path(config_path).stem().string() + suffix;
}

// ---------------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string trace;
  std::string summary;
  std::string engine;
};

int cmd_run(const RunArgs& args) {
  pb::RunConfig cfg = pb::load_run_config(args.config);
  if (!args.engine.empty()) cfg.engine = pb::parse_engine_kind(args.engine);
  pb::Instance inst = pb::build_instance(cfg);
  if (inst.step_sizes) {
    spdlog::info("step sizes: eta={} eta_l={} ({} halvings)",
                 inst.step_sizes->eta, inst.step_sizes->eta_l,
                 inst.step_sizes->halvings);
  }
  warn_if_infeasible(cfg, inst);
  spdlog::info("{}: N={} T={} K={} d={} B={}", pb::to_string(cfg.engine),
               cfg.fed.num_clients, cfg.fed.rounds, cfg.fed.local_steps,
               inst.theta0.size(), cfg.fed.partition.num_blocks());

  pb::RunResult result =
      pb::run_engine(cfg.engine, cfg.fed, inst.objectives, inst.theta0);
  const pb::TimingTrace timing =
      pb::attach_timing(result, cfg.link, cfg.compute);
  const pb::RunSummary summary =
      pb::summarize(cfg.engine, inst.objectives, result, timing);

  const std::filesystem::path trace_path =
      !args.trace.empty()          ? std::filesystem::path(args.trace)
      : !cfg.output.trace.empty() ? cfg.output.trace
                                  : default_output(args.config, ".trace.csv");
  {
    std::ofstream out = open_output(trace_path);
    pb::write_trace_csv(out, result.traces);
  }
  const std::filesystem::path summary_path =
      !args.summary.empty()          ? std::filesystem::path(args.summary)
      : !cfg.output.summary.empty() ? cfg.output.summary
                                    : default_output(args.config,
                                                     ".summary.json");
  {
    std::ofstream out = open_output(summary_path);
    pb::write_summary_json(out, summary);
  }
  spdlog::info("trace: {}", trace_path.string());
  spdlog::info("summary: {}", summary_path.string());
  pb::write_summary_json(std::cout, summary);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CompareArgs {
  std::string config;
  std::vector<std::string> methods;
  std::string out;
};

int cmd_compare(const CompareArgs& args) {
  pb::RunConfig cfg = pb::load_run_config(args.config);
  pb::Instance inst = pb::build_instance(cfg);
  warn_if_infeasible(cfg, inst);

  std::vector<std::string> methods =
      !args.methods.empty()        ? args.methods
      : !cfg.sweep.methods.empty() ? cfg.sweep.methods
                                   : std::vector<std::string>{
                                         pb::to_string(cfg.engine)};
  std::vector<double> bandwidths = cfg.sweep.bandwidths;
  std::vector<double> batches = cfg.sweep.batch_sizes;
  if (batches.empty()) batches.push_back(cfg.compute.batch_size);

  std::ostringstream csv;
  csv << "method,bandwidth,batch_size,total_wall,compute_share,comm_share,"
         "bytes_up,bytes_down,final_loss\n";
  for (const std::string& method : methods) {
    std::string base = method;
    const bool topk = base.ends_with("+topk");
    if (topk) base = base.substr(0, base.size() - 5);
    const pb::EngineKind kind = pb::parse_engine_kind(base);
    for (double batch : batches) {
      pb::FedConfig fed = cfg.fed;
      if (cfg.objective.kind != pb::ObjectiveKind::kQuadratic) {
        fed.batch_size = static_cast<std::size_t>(batch);
      }
      if (topk) {
        pb::TopKConfig c = fed.compression.value_or(pb::TopKConfig{});
        c.ratio = cfg.sweep.topk_ratio;
        fed.compression = c;
      }
      const pb::RunResult result =
          pb::run_engine(kind, fed, inst.objectives, inst.theta0);
      const double final_loss =
          pb::global_loss(inst.objectives, result.theta_final.values());
      pb::ComputeSpec compute = cfg.compute;
      compute.batch_size = batch;

      std::vector<std::optional<double>> points;
      if (bandwidths.empty()) points.push_back(std::nullopt);
      for (double bw : bandwidths) points.emplace_back(bw);
      for (const auto& bw : points) {
        const pb::LinkSpec link =
            bw ? pb::LinkSpec::Homogeneous(fed.num_clients, *bw, *bw,
                                           cfg.link.latency)
               : cfg.link;
        const pb::TimingTrace timing =
            pb::simulate_timeline(result.timeline, link, compute);
        double comm = timing.flush_time;
        for (const auto& r : timing.rounds) comm += r.comm_time;
        const double wall = timing.total_wall;
        csv << method << ',' << (bw ? pb::format_double(*bw) : "config")
            << ',' << pb::format_double(batch) << ','
            << pb::format_double(wall) << ','
            << pb::format_double(wall > 0 ? timing.total_compute() / wall : 0)
            << ',' << pb::format_double(wall > 0 ? comm / wall : 0) << ','
            << timing.total_bytes_up() << ',' << timing.total_bytes_down()
            << ',' << pb::format_double(final_loss) << '\n';
      }
    }
  }

  const std::filesystem::path out_path =
      !args.out.empty() ? std::filesystem::path(args.out) : cfg.output.compare;
  if (out_path.empty()) {
    std::cout << csv.str();
  } else {
    std::ofstream out = open_output(out_path);
    out << csv.str();
    spdlog::info("comparison: {}", out_path.string());
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CheckArgs {
  std::string config;
  std::string fault;  // ROUND[:CLIENT[:OFFSET]]
};

std::optional<pb::FaultInjection> parse_fault(const std::string& spec) {
  if (spec.empty()) return std::nullopt;
  pb::FaultInjection f;
  std::stringstream ss(spec);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, ':')) parts.push_back(part);
  try {
    if (parts.empty() || parts.size() > 3) throw std::invalid_argument("");
    f.round = std::stoull(parts[0]);
    if (parts.size() > 1) f.client = std::stoull(parts[1]);
    if (parts.size() > 2) f.offset = std::stod(parts[2]);
  } catch (const std::logic_error&) {
    throw pb::ConfigError("--inject-fault", "expected ROUND[:CLIENT[:OFFSET]]");
  }
  return f;
}

int cmd_check(const CheckArgs& args) {
  pb::RunConfig cfg = pb::load_run_config(args.config);
  pb::Instance inst = pb::build_instance(cfg);
  const auto fault = parse_fault(args.fault);
  if (fault) {
    spdlog::warn("injecting fault: round {} client {} offset {}", fault->round,
                 fault->client, fault->offset);
  }
  const pb::BatteryReport report =
      pb::run_invariant_battery(cfg.fed, inst.objectives, inst.theta0, fault);

  std::cout << "consistency/untouched/replay: "
            << (report.consistency_ok ? "ok" : "FAILED")
            << " (max rel error " << report.max_rel_error << ")\n";
  std::cout << "single-client reduction: "
            << (report.reduction_ok ? "ok" : "FAILED") << '\n';
  if (report.first_violation) {
    std::cout << "first failure: " << report.first_violation->describe()
              << '\n';
  }
  if (!report.reduction_ok) {
    std::cout << "reduction mismatch: " << report.reduction_detail << '\n';
  }
  return report.ok() ? kExitOk : kExitInvariant;
}

// ---------------------------------------------------------------------------

struct BoundArgs {
  std::string config;
  pb::BoundInputs in;
  bool corollary = false;
  double c_eta = 1.0;
  double c_etal = 1.0;
};

void print_bound(const pb::BoundInputs& in) {
  const pb::BoundTerms t = pb::theorem1_terms(in);
  const pb::Feasibility f = pb::lr_feasible(in.eta, in.eta_l, in.K, in.L);
  std::cout << "inputs: eta=" << pb::format_double(in.eta)
            << " eta_l=" << pb::format_double(in.eta_l) << " T=" << in.T
            << " K=" << in.K << " N=" << in.N
            << " L=" << pb::format_double(in.L)
            << " sigma=" << pb::format_double(in.sigma)
            << " sigma_g=" << pb::format_double(in.sigma_g)
            << " F=" << pb::format_double(in.F) << '\n';
  std::cout << "optimization term: " << pb::format_double(t.optimization)
            << '\n'
            << "local drift term:  " << pb::format_double(t.local_drift) << '\n'
            << "noise term:        " << pb::format_double(t.noise) << '\n'
            << "staleness term:    " << pb::format_double(t.staleness) << '\n'
            << "rhs:               " << pb::format_double(t.total()) << '\n';
  std::cout << "feasible: " << (f.ok() ? "yes" : "no");
  for (const auto& v : f.violations()) std::cout << " [violates " << v << ']';
  std::cout << '\n';
}

int cmd_bound(BoundArgs args) {
  if (args.config.empty()) {
    if (args.corollary) {
      const pb::StepSizes s = pb::corollary_schedule(
          args.in.T, args.in.K, args.in.N, args.in.L, args.c_eta, args.c_etal);
      std::cout << "schedule: eta=" << pb::format_double(s.eta)
                << " eta_l=" << pb::format_double(s.eta_l)
                << " halvings=" << s.halvings << '\n';
      args.in.eta = s.eta;
      args.in.eta_l = s.eta_l;
    }
    print_bound(args.in);
    return kExitOk;
  }

  pb::RunConfig cfg = pb::load_run_config(args.config);
  pb::Instance inst = pb::build_instance(cfg);
  const pb::BoundInputs in = pb::bound_inputs(cfg, inst);
  print_bound(in);
  const pb::RunResult result =
      pb::run_engine(cfg.engine, cfg.fed, inst.objectives, inst.theta0);
  const pb::BoundReport report = pb::trace_vs_bound(result.traces, in);
  std::cout << "measured average: " << pb::format_double(report.measured_avg)
            << " over " << report.rounds << " rounds\n"
            << "ratio to rhs: " << pb::format_double(report.ratio) << '\n'
            << "within bound: " << (report.within_bound() ? "yes" : "no")
            << '\n';
  if (in.sigma > 0.0) {
    std::cout << "note: with sigma > 0 the bound holds in expectation; a "
                 "single run is a diagnostic\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
  std::uint64_t seed = 0;
  std::size_t points = 10;
  double tolerance = 1e-5;
};

int cmd_gradcheck(const GradcheckArgs& args) {
  const auto cases = pb::gradcheck_battery(args.seed, args.points);
  bool ok = true;
  for (pb::ObjectiveKind kind :
       {pb::ObjectiveKind::kQuadratic, pb::ObjectiveKind::kLogistic,
        pb::ObjectiveKind::kMlp}) {
    double worst = 0.0;
    std::size_t n = 0;
    for (const auto& c : cases) {
      if (c.kind != kind) continue;
      worst = std::max(worst, c.rel_error);
      ++n;
    }
    const bool pass = worst <= args.tolerance;
    ok = ok && pass;
    std::cout << pb::to_string(kind) << ": " << n
              << " points, max rel error " << worst << " -> "
              << (pass ? "ok" : "FAILED") << '\n';
  }
  return ok ? kExitOk : kExitInvariant;
}

// ---------------------------------------------------------------------------

struct PreviewArgs {
  std::string config;
  pb::MixtureSpec mix;
  double alpha = 0.5;
  std::size_t clients = 4;
  std::uint64_t seed = 0;
};

int cmd_partition_preview(PreviewArgs args) {
  pb::SyntheticDataset ds;
  pb::DirichletPartition part;
  if (!args.config.empty()) {
    pb::RunConfig cfg = pb::load_run_config(args.config);
    if (cfg.objective.kind == pb::ObjectiveKind::kQuadratic) {
      throw pb::ConfigError("objective.kind",
                            "partition preview needs a logistic or mlp config");
    }
    pb::Instance inst = pb::build_instance(cfg);
    ds = *inst.objectives.front().dataset();
    part = *inst.data_partition;
  } else {
    args.mix.seed = args.seed;
    ds = pb::make_gaussian_mixture(args.mix);
    part = pb::dirichlet_partition(ds, args.alpha, args.clients, args.seed);
  }
  const auto hist = part.class_histogram(ds);
  std::cout << "client";
  for (std::size_t c = 0; c < ds.num_classes; ++c) std::cout << ",class_" << c;
  std::cout << ",total\n";
  for (std::size_t i = 0; i < hist.size(); ++i) {
    std::size_t total = 0;
    std::cout << i;
    for (std::size_t n : hist[i]) {
      std::cout << ',' << n;
      total += n;
    }
    std::cout << ',' << total << '\n';
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"ParaBlock lab: federated block-coordinate training simulator"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run the configured engine");
  run_cmd->add_option("config", run.config, "JSON config")->required();
  run_cmd->add_option("--trace", run.trace, "Trace CSV path");
  run_cmd->add_option("--summary", run.summary, "Summary JSON path");
  run_cmd->add_option("--engine", run.engine,
                      "Override engine (parablock, fedbcd, fedcybgd)");

  CompareArgs compare;
  auto* compare_cmd =
      app.add_subcommand("compare", "Wall-clock sweep over methods");
  compare_cmd->add_option("config", compare.config, "JSON config")->required();
  compare_cmd->add_option("--methods", compare.methods,
                          "Methods, e.g. parablock fedbcd parablock+topk")
      ->delimiter(',');
  compare_cmd->add_option("--out", compare.out, "Comparison CSV path");

  CheckArgs check;
  auto* check_cmd =
      app.add_subcommand("check", "Replicated-model invariant battery");
  check_cmd->add_option("config", check.config, "JSON config")->required();
  check_cmd->add_option("--inject-fault", check.fault,
                        "Test hook: ROUND[:CLIENT[:OFFSET]] perturbs one "
                        "client's correction");

  BoundArgs bound;
  auto* bound_cmd =
      app.add_subcommand("bound", "Evaluate the convergence bound");
  bound_cmd->add_option("--config", bound.config,
                        "Derive inputs from a config and run it");
  bound_cmd->add_option("--eta", bound.in.eta);
  bound_cmd->add_option("--eta-l", bound.in.eta_l);
  bound_cmd->add_option("-T,--rounds", bound.in.T);
  bound_cmd->add_option("-K,--local-steps", bound.in.K);
  bound_cmd->add_option("-N,--clients", bound.in.N);
  bound_cmd->add_option("-L,--smoothness", bound.in.L);
  bound_cmd->add_option("--sigma", bound.in.sigma);
  bound_cmd->add_option("--sigma-g", bound.in.sigma_g);
  bound_cmd->add_option("-F,--gap", bound.in.F, "f(theta_0) - f_*");
  bound_cmd->add_flag("--corollary", bound.corollary,
                      "Use the sqrt(T) step-size schedule");
  bound_cmd->add_option("--c-eta", bound.c_eta);
  bound_cmd->add_option("--c-etal", bound.c_etal);

  GradcheckArgs gradcheck;
  auto* gradcheck_cmd = app.add_subcommand(
      "gradcheck", "Finite-difference check of every objective kind");
  gradcheck_cmd->add_option("--seed", gradcheck.seed);
  gradcheck_cmd->add_option("--points", gradcheck.points);
  gradcheck_cmd->add_option("--tol", gradcheck.tolerance);

  PreviewArgs preview;
  preview.mix.samples = 1000;
  preview.mix.features = 4;
  preview.mix.classes = 4;
  auto* preview_cmd = app.add_subcommand(
      "partition-preview", "Per-client class histograms of a Dirichlet split");
  preview_cmd->add_option("--config", preview.config);
  preview_cmd->add_option("--alpha", preview.alpha);
  preview_cmd->add_option("--clients", preview.clients);
  preview_cmd->add_option("--samples", preview.mix.samples);
  preview_cmd->add_option("--features", preview.mix.features);
  preview_cmd->add_option("--classes", preview.mix.classes);
  preview_cmd->add_option("--seed", preview.seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*compare_cmd) return cmd_compare(compare);
    if (*check_cmd) return cmd_check(check);
    if (*bound_cmd) return cmd_bound(bound);
    if (*gradcheck_cmd) return cmd_gradcheck(gradcheck);
    if (*preview_cmd) return cmd_partition_preview(preview);
  } catch (const pb::NumericError& e) {
    spdlog::error("numeric error: {}", e.what());
    return kExitNumeric;
  } catch (const pb::Error& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    spdlog::error("internal error: {}", e.what());
    return 1;
  }
  return kExitOk;
}
