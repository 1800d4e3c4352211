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

#ifndef PARABLOCK_ERRORS_HPP_
#define PARABLOCK_ERRORS_HPP_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace parablock {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid block partition or out-of-range block id.
class PartitionError : public Error {
 public:
  using Error::Error;
};

/// Mismatched vector dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Empty or otherwise unusable sample batch.
class BatchError : public Error {
 public:
  using Error::Error;
};

class SchedulerError : public Error {
 public:
  using Error::Error;
};

class CohortError : public Error {
 public:
  using Error::Error;
};

/// Invalid run configuration. `field` names the offending key path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message)
      : Error(field.empty() ? message : field + ": " + message),
        field_(std::move(field)),
        message_(message) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

/// Bad numeric input to the bound / schedule evaluators.
class InputError : public Error {
 public:
  using Error::Error;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

/// Trace is missing a channel required by an analysis.
class TraceError : public Error {
 public:
  using Error::Error;
};

/// A non-finite loss, gradient or parameter. Carries whatever context the
/// raising layer knew about; outer layers fill in round and client.
class NumericError : public Error {
 public:
  struct Context {
    std::optional<std::size_t> round;
    std::optional<std::size_t> client;
    std::optional<std::size_t> step;
  };

  NumericError(const std::string& what, Context context)
      : Error(Format(what, context)), detail_(what), context_(context) {}
  explicit NumericError(const std::string& what)
      : NumericError(what, Context{}) {}

  const std::string& detail() const noexcept { return detail_; }
  const Context& context() const noexcept { return context_; }

  NumericError WithRound(std::size_t round, std::size_t client) const {
    Context c = context_;
    c.round = round;
    c.client = client;
    return NumericError(detail_, c);
  }

 private:
  static std::string Format(const std::string& what, const Context& c) {
    std::string out = what;
    if (c.round) out += " [round " + std::to_string(*c.round) + "]";
    if (c.client) out += " [client " + std::to_string(*c.client) + "]";
    if (c.step) out += " [local step " + std::to_string(*c.step) + "]";
    return out;
  }

  std::string detail_;
  Context context_;
};

}  // namespace parablock

#endif  // PARABLOCK_ERRORS_HPP_
