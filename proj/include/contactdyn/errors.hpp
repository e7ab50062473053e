// Copyright 2026 The contactdyn Authors
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

#ifndef CONTACTDYN_ERRORS_HPP_
#define CONTACTDYN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace contactdyn {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad model description, wrong dimensions, bad parameters.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Data-file problems (CSV schema, missing columns, length mismatch).
class DataError : public Error {
 public:
  using Error::Error;
};

// Numerical breakdown: singular systems, failed factorizations, barrier
// overshoot that step halving could not resolve.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what, double condition = 0.0)
      : Error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

class RankError : public NumericError {
 public:
  RankError(const std::string& what, int rank, int expected)
      : NumericError(what), rank_(rank), expected_(expected) {}
  int rank() const { return rank_; }
  int expected() const { return expected_; }

 private:
  int rank_;
  int expected_;
};

// TanBarrier evaluated at or beyond its asymptote.
class BarrierViolation : public Error {
 public:
  using Error::Error;
};

// ZMP requested while the total normal load is below threshold (airborne).
class UndefinedZmp : public Error {
 public:
  using Error::Error;
};

}  // namespace contactdyn

#endif  // CONTACTDYN_ERRORS_HPP_
