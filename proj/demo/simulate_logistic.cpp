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


// Trains logistic regression with DP-DSGD under random participation,
// once per accounting scheme, and prints the loss every 100 rounds.

#include <cstdio>

#include "fedamp/simulator.hpp"

int main() {
  using namespace fedamp;
  SimConfig config;
  config.N = 1000;
  config.d = 30;
  config.p = 0.001;
  config.q = 0.1;
  config.T = 1000;
  config.eta = 0.01;
  config.m = 10;
  config.seed = 7;
  for (Scheme s : {Scheme::kMain, Scheme::kUpperBound, Scheme::kOnlyLocal}) {
    const TrainingResult r = run_training(config, {.task = Task::kLogisticRegression,
                                                   .scheme = s,
                                                   .eps_round = 0.015,
                                                   .delta_round = 1e-6,
                                                   .calibrate = true});
    std::printf("%-4s sigma=%.4g:", scheme_name(s).data(), r.sigma);
    for (std::size_t t = 99; t < r.rows.size(); t += 100) std::printf(" %.3f", r.rows[t].loss);
    std::printf("\n");
  }
  return 0;
}
