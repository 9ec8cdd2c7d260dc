// Copyright 2026 The twoblock Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TWOBLOCK__ERROR_HPP_
#define TWOBLOCK__ERROR_HPP_

#include <stdexcept>
#include <string>

namespace twoblock
{

// Process exit codes used by the command-line harness.
enum class ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumeric = 4 };

class Error : public std::runtime_error
{
public:
  Error(ExitCode code, const std::string & what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

// Operand dimensions disagree.
struct ShapeError : Error
{
  explicit ShapeError(const std::string & what) : Error(ExitCode::kNumeric, "shape error: " + what) {}
};

// API or command line misuse.
struct UsageError : Error
{
  explicit UsageError(const std::string & what) : Error(ExitCode::kUsage, "usage error: " + what) {}
};

struct ParseError : Error
{
  ParseError(const std::string & source, std::size_t line, const std::string & what)
  : Error(
      ExitCode::kData,
      "parse error: " + source + ":" + std::to_string(line) + ": " + what),
    line_(line)
  {
  }
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

struct DataError : Error
{
  explicit DataError(const std::string & what) : Error(ExitCode::kData, "data error: " + what) {}
};

struct IoError : Error
{
  explicit IoError(const std::string & what) : Error(ExitCode::kData, "I/O error: " + what) {}
};

// Model file does not match the requested configuration.
struct CompatibilityError : Error
{
  explicit CompatibilityError(const std::string & what)
  : Error(ExitCode::kData, "compatibility error: " + what)
  {
  }
};

struct ImputationError : Error
{
  explicit ImputationError(const std::string & what)
  : Error(ExitCode::kData, "imputation error: " + what)
  {
  }
};

// Non-finite loss or gradient during optimization.
struct TrainingError : Error
{
  explicit TrainingError(const std::string & what)
  : Error(ExitCode::kNumeric, "training error: " + what)
  {
  }
};

struct FilterError : Error
{
  explicit FilterError(const std::string & what)
  : Error(ExitCode::kNumeric, "filter error: " + what)
  {
  }
};

// Gradient check could not evaluate the objective.
struct CheckError : Error
{
  explicit CheckError(const std::string & what) : Error(ExitCode::kNumeric, "check error: " + what)
  {
  }
};

}  // namespace twoblock

#endif  // TWOBLOCK__ERROR_HPP_
