// Copyright 2026 The fedamp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace fedamp {

// Parameter outside the domain of the operation (negative sigma, p > 1, NaN).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A bracketed root search was given endpoints without a sign change.
class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An iterative method ran out of iterations.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature could not meet the requested absolute tolerance.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double estimate)
      : std::runtime_error(what), error_estimate_(estimate) {}
  double error_estimate() const { return error_estimate_; }

 private:
  double error_estimate_;
};

// The z* equation has no positive region inside the scan window.
class DegenerateRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No noise level in the calibration bracket reaches the privacy target.
class CalibrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite loss during simulated training.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Shortest %g rendering, for diagnostics.
inline std::string Num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

inline void RequireFinite(double x, const char* what) {
  if (!std::isfinite(x)) {
    throw DomainError(std::string(what) + " must be finite");
  }
}

inline void RequirePositive(double x, const char* what) {
  if (!std::isfinite(x) || !(x > 0.0)) {
    throw DomainError(std::string(what) + " must be finite and positive");
  }
}

inline void RequireProbability(double x, const char* what) {
  if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
    throw DomainError(std::string(what) + " must lie in [0, 1]");
  }
}

}  // namespace detail
}  // namespace fedamp
