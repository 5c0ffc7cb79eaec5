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


// Calibrates per-round noise for two deployments and prints the privacy
// profile of each scheme at the calibrated sigma.

#include <cstdio>

#include "fedamp/accountant.hpp"

int main() {
  using namespace fedamp;
  struct Deployment {
    const char* name;
    SamplingParams params;
  };
  const Deployment deployments[] = {
      {"many small clients", {0.001, 0.1, 30, 1.0, 1.0}},
      {"few large clients", {0.1, 0.001, 1000, 1.0, 1.0}},
  };
  const double eps = 0.015;
  const double delta = 1e-6;
  for (const auto& dep : deployments) {
    std::printf("%s: p=%g q=%g d=%lld, target (eps=%g, delta=%g)\n", dep.name, dep.params.p,
                dep.params.q, static_cast<long long>(dep.params.d), eps, delta);
    for (Scheme s : {Scheme::kMain, Scheme::kUpperBound, Scheme::kOnlyLocal, Scheme::kLowerBound}) {
      SamplingParams at = dep.params;
      at.sigma = calibrate_sigma(s, dep.params, eps, delta);
      std::printf("  %-4s sigma=%-10.5g delta(eps)=%.3g\n", scheme_name(s).data(), at.sigma,
                  delta_for(s, at, eps).delta);
    }
  }
  return 0;
}
