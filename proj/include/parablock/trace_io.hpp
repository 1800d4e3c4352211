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

// Per-round trace CSV and run summaries. Floating values use 17 significant
// digits so a trace round-trips exactly.

#ifndef PARABLOCK_TRACE_IO_HPP_
#define PARABLOCK_TRACE_IO_HPP_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "parablock/engine.hpp"

namespace parablock {

inline constexpr std::string_view kTraceHeader =
    "round,block_id,train_loss,block_grad_norm_sq,delta_norm_sq,"
    "mean_client_delta_norm_sq,bytes_up,bytes_down,compute_time,comm_time,"
    "round_wall,cum_wall";

/// Shortest-round-trip-safe "%.17g".
std::string format_double(double x);

void write_trace_csv(std::ostream& out, std::span<const RoundTrace> traces);
/// Throws TraceError on a bad header or malformed row.
std::vector<RoundTrace> read_trace_csv(std::istream& in);

struct RunSummary {
  std::string engine;
  std::size_t rounds = 0;
  double final_loss = 0.0;
  double total_wall = 0.0;
  double flush_time = 0.0;
  double total_compute = 0.0;
  std::uint64_t total_bytes_up = 0;
  std::uint64_t total_bytes_down = 0;
};

RunSummary summarize(EngineKind kind, std::span<const Objective> objectives,
                     const RunResult& result, const TimingTrace& timing);

/// One JSON object.
void write_summary_json(std::ostream& out, const RunSummary& summary);

}  // namespace parablock

#endif  // PARABLOCK_TRACE_IO_HPP_
