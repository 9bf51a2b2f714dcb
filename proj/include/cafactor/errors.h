// Copyright 2026 The cafactor Authors.
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

#ifndef CAFACTOR_ERRORS_H_
#define CAFACTOR_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cafactor {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kDegenerate = 3,
};

// Base class for all library errors. Carries the exit code the CLI maps it to.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kData)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

// Malformed or inconsistent input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(what, ExitCode::kData) {}
};

// Input bytes that cannot be decoded in the declared encoding.
class DecodeError : public DataError {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : DataError(what + " at byte offset " + std::to_string(offset)),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

// An argument outside its permitted range.
class BoundsError : public Error {
 public:
  explicit BoundsError(const std::string& what)
      : Error(what, ExitCode::kUsage) {}
};

// Label sets that do not line up (supplementary tables, coordinate sets).
class AlignmentError : public DataError {
 public:
  explicit AlignmentError(const std::string& what) : DataError(what) {}
};

// Numerically degenerate input, e.g. fewer than two non-empty rows.
class DegenerateError : public Error {
 public:
  explicit DegenerateError(const std::string& what)
      : Error(what, ExitCode::kDegenerate) {}
};

}  // namespace cafactor

#endif  // CAFACTOR_ERRORS_H_
