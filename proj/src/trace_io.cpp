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

#include "parablock/trace_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "parablock/errors.hpp"

namespace parablock {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_trace_csv(std::ostream& out, std::span<const RoundTrace> traces) {
  out << kTraceHeader << '\n';
  for (const RoundTrace& t : traces) {
    out << t.round << ',' << t.block_id << ',' << format_double(t.train_loss)
        << ',' << format_double(t.block_grad_norm_sq) << ','
        << format_double(t.delta_norm_sq) << ','
        << format_double(t.mean_client_delta_norm_sq) << ',' << t.bytes_up
        << ',' << t.bytes_down << ',' << format_double(t.compute_time) << ','
        << format_double(t.comm_time) << ',' << format_double(t.round_wall)
        << ',' << format_double(t.cum_wall) << '\n';
  }
}

std::vector<RoundTrace> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) {
    throw TraceError("trace header does not match the fixed schema");
  }
  std::vector<RoundTrace> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 12) {
      throw TraceError("row " + std::to_string(row) + " has " +
                       std::to_string(f.size()) + " fields, expected 12");
    }
    try {
      RoundTrace t;
      t.round = std::stoull(f[0]);
      t.block_id = std::stoull(f[1]);
      t.train_loss = std::stod(f[2]);
      t.block_grad_norm_sq = std::stod(f[3]);
      t.delta_norm_sq = std::stod(f[4]);
      t.mean_client_delta_norm_sq = std::stod(f[5]);
      t.bytes_up = std::stoull(f[6]);
      t.bytes_down = std::stoull(f[7]);
      t.compute_time = std::stod(f[8]);
      t.comm_time = std::stod(f[9]);
      t.round_wall = std::stod(f[10]);
      t.cum_wall = std::stod(f[11]);
      out.push_back(std::move(t));
    } catch (const std::logic_error&) {
      throw TraceError("row " + std::to_string(row) + " is malformed");
    }
  }
  return out;
}

RunSummary summarize(EngineKind kind, std::span<const Objective> objectives,
                     const RunResult& result, const TimingTrace& timing) {
  RunSummary s;
  s.engine = to_string(kind);
  s.rounds = result.traces.size();
  s.final_loss = global_loss(objectives, result.theta_final.values());
  s.total_wall = timing.total_wall;
  s.flush_time = timing.flush_time;
  s.total_compute = timing.total_compute();
  s.total_bytes_up = timing.total_bytes_up();
  s.total_bytes_down = timing.total_bytes_down();
  return s;
}

void write_summary_json(std::ostream& out, const RunSummary& s) {
  nlohmann::ordered_json j;
  j["engine"] = s.engine;
  j["rounds"] = s.rounds;
  j["final_loss"] = s.final_loss;
  j["total_wall"] = s.total_wall;
  j["flush_time"] = s.flush_time;
  j["total_compute"] = s.total_compute;
  j["total_bytes_up"] = s.total_bytes_up;
  j["total_bytes_down"] = s.total_bytes_down;
  out << j.dump(2) << '\n';
}

}  // namespace parablock
