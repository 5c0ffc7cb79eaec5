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
#include <cstdint>
#include <string>
#include <string_view>

#include "fedamp/error.hpp"

namespace fedamp {

// One accounting query: client participation probability p, local Poisson
// sampling probability q, local dataset size d (excluding the differing
// element), per-sample sensitivity C and noise standard deviation sigma.
struct SamplingParams {
  double p = 1.0;
  double q = 1.0;
  std::int64_t d = 0;
  double C = 1.0;
  double sigma = 1.0;

  void validate() const {
    if (!std::isfinite(p) || !(p > 0.0) || p > 1.0) {
      throw DomainError("p must lie in (0, 1]");
    }
    if (!std::isfinite(q) || !(q > 0.0) || q > 1.0) {
      throw DomainError("q must lie in (0, 1]");
    }
    if (d < 0) throw DomainError("d must be non-negative");
    detail::RequirePositive(C, "C");
    detail::RequirePositive(sigma, "sigma");
  }
};

enum class Scheme { kMain, kOnlyLocal, kUpperBound, kLowerBound, kGaussianMechanism };

inline std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::kMain:
      return "main";
    case Scheme::kOnlyLocal:
      return "ols";
    case Scheme::kUpperBound:
      return "ub";
    case Scheme::kLowerBound:
      return "lb";
    case Scheme::kGaussianMechanism:
      return "gaussian";
  }
  return "unknown";
}

inline Scheme parse_scheme(std::string_view name) {
  if (name == "main") return Scheme::kMain;
  if (name == "ols") return Scheme::kOnlyLocal;
  if (name == "ub") return Scheme::kUpperBound;
  if (name == "lb") return Scheme::kLowerBound;
  if (name == "gaussian") return Scheme::kGaussianMechanism;
  throw DomainError("unknown scheme '" + std::string(name) + "'");
}

// An (eps, delta) guarantee together with the scheme that produced it.
struct PrivacyPoint {
  double eps = 0.0;
  double delta = 0.0;
  Scheme scheme = Scheme::kMain;
  // Value before clamping to [0, 1]; differs only by rounding residue.
  double raw_delta = 0.0;
};

}  // namespace fedamp
