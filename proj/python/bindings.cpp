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

// Python module parablock._core. Results come back as plain dicts and lists.

#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "parablock/compression.hpp"
#include "parablock/config.hpp"
#include "parablock/engine.hpp"
#include "parablock/errors.hpp"
#include "parablock/gradcheck.hpp"
#include "parablock/invariants.hpp"
#include "parablock/netsim.hpp"
#include "parablock/theory.hpp"
#include "parablock/trace_io.hpp"

namespace py = pybind11;
namespace pb = parablock;

namespace {

pb::BoundInputs make_inputs(double eta, double eta_l, std::size_t T,
                            std::size_t K, std::size_t N, double L,
                            double sigma, double sigma_g, double F) {
  pb::BoundInputs in;
  in.eta = eta;
  in.eta_l = eta_l;
  in.T = T;
  in.K = K;
  in.N = N;
  in.L = L;
  in.sigma = sigma;
  in.sigma_g = sigma_g;
  in.F = F;
  return in;
}

py::dict trace_row(const pb::RoundTrace& t) {
  py::dict d;
  d["round"] = t.round;
  d["block_id"] = t.block_id;
  d["train_loss"] = t.train_loss;
  d["block_grad_norm_sq"] = t.block_grad_norm_sq;
  d["delta_norm_sq"] = t.delta_norm_sq;
  d["mean_client_delta_norm_sq"] = t.mean_client_delta_norm_sq;
  d["bytes_up"] = t.bytes_up;
  d["bytes_down"] = t.bytes_down;
  d["compute_time"] = t.compute_time;
  d["comm_time"] = t.comm_time;
  d["round_wall"] = t.round_wall;
  d["cum_wall"] = t.cum_wall;
  d["participants"] = t.participants;
  return d;
}

py::dict run(const std::string& config_json, const std::string& engine,
             const std::string& base_dir) {
  pb::RunConfig cfg = pb::parse_run_config(config_json, base_dir);
  if (!engine.empty()) cfg.engine = pb::parse_engine_kind(engine);
  pb::Instance inst = pb::build_instance(cfg);
  pb::RunResult result;
  pb::TimingTrace timing;
  {
    py::gil_scoped_release release;
    result = pb::run_engine(cfg.engine, cfg.fed, inst.objectives, inst.theta0);
    timing = pb::attach_timing(result, cfg.link, cfg.compute);
  }
  const pb::RunSummary s =
      pb::summarize(cfg.engine, inst.objectives, result, timing);
  py::list traces;
  for (const auto& t : result.traces) traces.append(trace_row(t));
  py::dict summary;
  summary["engine"] = s.engine;
  summary["rounds"] = s.rounds;
  summary["final_loss"] = s.final_loss;
  summary["total_wall"] = s.total_wall;
  summary["flush_time"] = s.flush_time;
  summary["total_compute"] = s.total_compute;
  summary["total_bytes_up"] = s.total_bytes_up;
  summary["total_bytes_down"] = s.total_bytes_down;
  std::vector<std::size_t> schedule;
  for (const auto& b : result.schedule) schedule.push_back(b.value());
  py::dict out;
  out["theta0"] = inst.theta0.vector();
  out["theta_final"] = result.theta_final.vector();
  out["schedule"] = schedule;
  out["traces"] = traces;
  out["summary"] = summary;
  return out;
}

py::dict check(const std::string& config_json,
               std::optional<std::size_t> fault_round, std::size_t fault_client,
               double fault_offset, const std::string& base_dir) {
  pb::RunConfig cfg = pb::parse_run_config(config_json, base_dir);
  pb::Instance inst = pb::build_instance(cfg);
  std::optional<pb::FaultInjection> fault;
  if (fault_round) {
    fault = pb::FaultInjection{*fault_round, fault_client, fault_offset};
  }
  pb::BatteryReport report;
  {
    py::gil_scoped_release release;
    report = pb::run_invariant_battery(cfg.fed, inst.objectives, inst.theta0,
                                       fault);
  }
  py::dict out;
  out["ok"] = report.ok();
  out["consistency_ok"] = report.consistency_ok;
  out["reduction_ok"] = report.reduction_ok;
  out["max_rel_error"] = report.max_rel_error;
  if (report.first_violation) {
    const pb::Violation& v = *report.first_violation;
    py::dict d;
    d["kind"] = pb::to_string(v.kind);
    d["round"] = v.round;
    d["final"] = v.final;
    d["client"] = v.client;
    d["block"] = v.block.value();
    d["coordinate"] = v.coordinate;
    d["rel_error"] = v.rel_error;
    d["description"] = v.describe();
    out["first_violation"] = d;
  } else {
    out["first_violation"] = py::none();
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ParaBlock federated block-coordinate lab";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error;
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object>
      config_error;
  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object>
      numeric_error;
  error.call_once_and_store_result([&] {
    return py::exception<pb::Error>(m, "Error", PyExc_RuntimeError);
  });
  config_error.call_once_and_store_result([&] {
    return py::exception<pb::ConfigError>(m, "ConfigError",
                                          error.get_stored().ptr());
  });
  numeric_error.call_once_and_store_result([&] {
    return py::exception<pb::NumericError>(m, "NumericError",
                                           error.get_stored().ptr());
  });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pb::ConfigError& e) {
      py::set_error(config_error.get_stored(), e.what());
    } catch (const pb::NumericError& e) {
      py::set_error(numeric_error.get_stored(), e.what());
    } catch (const pb::Error& e) {
      py::set_error(error.get_stored(), e.what());
    }
  });

  m.def(
      "lr_feasible",
      [](double eta, double eta_l, std::size_t K, double L) {
        const pb::Feasibility f = pb::lr_feasible(eta, eta_l, K, L);
        py::dict d;
        d["ok"] = f.ok();
        d["local_ok"] = f.local_ok;
        d["global_ok"] = f.global_ok;
        d["violations"] = f.violations();
        return d;
      },
      py::arg("eta"), py::arg("eta_l"), py::arg("K"), py::arg("L"));

  m.def(
      "theorem1_terms",
      [](double eta, double eta_l, std::size_t T, std::size_t K,
         std::size_t N, double L, double sigma, double sigma_g, double F) {
        const pb::BoundTerms t = pb::theorem1_terms(
            make_inputs(eta, eta_l, T, K, N, L, sigma, sigma_g, F));
        py::dict d;
        d["optimization"] = t.optimization;
        d["local_drift"] = t.local_drift;
        d["noise"] = t.noise;
        d["staleness"] = t.staleness;
        d["total"] = t.total();
        return d;
      },
      py::kw_only(), py::arg("eta"), py::arg("eta_l"), py::arg("T"),
      py::arg("K"), py::arg("N"), py::arg("L"), py::arg("sigma"),
      py::arg("sigma_g"), py::arg("F"));

  m.def(
      "theorem1_rhs",
      [](double eta, double eta_l, std::size_t T, std::size_t K,
         std::size_t N, double L, double sigma, double sigma_g, double F) {
        return pb::theorem1_rhs(
            make_inputs(eta, eta_l, T, K, N, L, sigma, sigma_g, F));
      },
      py::kw_only(), py::arg("eta"), py::arg("eta_l"), py::arg("T"),
      py::arg("K"), py::arg("N"), py::arg("L"), py::arg("sigma"),
      py::arg("sigma_g"), py::arg("F"));

  m.def(
      "corollary_schedule",
      [](std::size_t T, std::size_t K, std::size_t N, double L, double c_eta,
         double c_etal) {
        const pb::StepSizes s = pb::corollary_schedule(T, K, N, L, c_eta, c_etal);
        py::dict d;
        d["eta"] = s.eta;
        d["eta_l"] = s.eta_l;
        d["halvings"] = s.halvings;
        return d;
      },
      py::arg("T"), py::arg("K"), py::arg("N"), py::arg("L"),
      py::arg("c_eta") = 1.0, py::arg("c_etal") = 1.0);

  m.def(
      "topk_compress",
      [](const std::vector<double>& delta, double ratio) {
        const pb::SparseDelta s = pb::topk_compress(delta, pb::TopKConfig{ratio});
        return py::make_tuple(s.indices, s.values);
      },
      py::arg("delta"), py::arg("ratio"),
      "Returns (indices, values) of the kept entries, indices ascending.");
  m.def("topk_count", &pb::topk_count, py::arg("dim"), py::arg("ratio"));

  m.def(
      "round_time_singlethread",
      [](const std::vector<double>& p, const std::vector<double>& up,
         const std::vector<double>& down, double latency) {
        return pb::round_time_singlethread(p, up, down, latency);
      },
      py::arg("compute"), py::arg("upload"), py::arg("download"),
      py::arg("latency") = 0.0);
  m.def(
      "round_time_parallel",
      [](const std::vector<double>& p, const std::vector<double>& up,
         const std::vector<double>& down, double latency) {
        return pb::round_time_parallel(p, up, down, latency);
      },
      py::arg("compute"), py::arg("upload"), py::arg("download"),
      py::arg("latency") = 0.0);

  m.def("run", &run, py::arg("config_json"), py::arg("engine") = "",
        py::arg("base_dir") = ".",
        "Runs a JSON config; returns theta, schedule, traces and summary.");
  m.def("check", &check, py::arg("config_json"),
        py::arg("fault_round") = py::none(), py::arg("fault_client") = 0,
        py::arg("fault_offset") = 1e-3, py::arg("base_dir") = ".",
        "Runs the invariant battery on a JSON config.");

  m.def(
      "gradcheck",
      [](std::uint64_t seed, std::size_t points) {
        py::list out;
        for (const auto& c : pb::gradcheck_battery(seed, points)) {
          py::dict d;
          d["kind"] = pb::to_string(c.kind);
          d["point"] = c.point;
          d["rel_error"] = c.rel_error;
          out.append(d);
        }
        return out;
      },
      py::arg("seed") = 0, py::arg("points") = 10);
}
