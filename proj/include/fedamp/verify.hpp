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

// Cross-checks of the accountant against independent routes: brute-force
// quadrature of the main-bound integrand, the hockey-stick divergence of the
// constructed output pair, a dense sign scan, and the scheme ordering.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "fedamp/accountant.hpp"
#include "fedamp/mixture.hpp"
#include "fedamp/numerics.hpp"
#include "fedamp/params.hpp"
#include "fedamp/sweep.hpp"

namespace fedamp {

inline constexpr double kOracleTolerance = 1e-10;
inline constexpr double kOrderingSlack = 1e-12;
inline constexpr double kSoundnessSlack = 2e-13;

// pq * int [f(z)]_+ dz over [-12 sigma, (d+1) C + 12 sigma + sigma^2 eps'/C]
// by adaptive quadrature alone; does not consult z*.
inline QuadratureResult main_bound_by_quadrature(const SamplingParams& params, double eps,
                                                 double abs_tol = kDefaultQuadratureTolerance) {
  const AmplificationConstants k = derive_constants(eps, params);
  const MainBoundIntegrand f(k, params);
  const auto [lo, hi] = f.scan_window();
  const int panels =
      static_cast<int>(std::clamp((hi - lo) / params.sigma, 16.0, 4096.0));
  QuadratureResult r = integrate_adaptive([&f](double z) { return std::max(0.0, f(z)); }, lo, hi,
                                          {.abs_tol = abs_tol, .max_evaluations = 20'000'000,
                                           .initial_panels = panels});
  r.value *= params.p * params.q;
  r.error_estimate *= params.p * params.q;
  return r;
}

// Number of strict sign changes of the integrand on n uniform points of the
// z* scan window. The sign is taken from the log-ratio so underflowed tails
// do not register as zeros.
inline int count_sign_changes(const SamplingParams& params, double eps, int n = 10'000) {
  const MainBoundIntegrand f(derive_constants(eps, params), params);
  const auto [lo, hi] = f.scan_window();
  int changes = 0;
  int prev_sign = 0;
  for (int k = 0; k < n; ++k) {
    const double z = lo + (hi - lo) * k / (n - 1);
    const double g = f.log_ratio(z);
    const int sign = g > 0.0 ? 1 : (g < 0.0 ? -1 : 0);
    if (sign == 0) continue;
    if (prev_sign != 0 && sign != prev_sign) ++changes;
    prev_sign = sign;
  }
  return changes;
}

// D_{e^eps}(xi || xi') for the constructed worst-case pair.
inline double pair_divergence(const SamplingParams& params, double eps,
                              double abs_tol = kDivergenceTolerance) {
  auto [xi, xi_prime] = worst_case_pair(params);
  return hockey_stick({std::exp(eps), std::move(xi), std::move(xi_prime)}, abs_tol);
}

struct VerifyRow {
  SamplingParams params;
  double eps = 0.0;
  double delta_closed_form = 0.0;
  double delta_quadrature = 0.0;
  double abs_diff = 0.0;
  bool single_crossing_ok = false;
  double delta_lb = 0.0;
  double delta_ub = 0.0;
  double delta_ols = 0.0;
  bool ordering_ok = false;
  double delta_pair = 0.0;
  bool soundness_ok = false;
  std::string error;

  bool oracle_ok() const { return error.empty() && abs_diff <= kOracleTolerance; }
  bool all_ok() const {
    return oracle_ok() && single_crossing_ok && ordering_ok && soundness_ok;
  }
};

inline VerifyRow verify_point(const SamplingParams& params, double eps) {
  VerifyRow row;
  row.params = params;
  row.eps = eps;
  try {
    row.delta_closed_form = delta_main(params, eps).delta;
    row.delta_quadrature = main_bound_by_quadrature(params, eps).value;
    row.abs_diff = std::abs(row.delta_closed_form - row.delta_quadrature);
    row.single_crossing_ok = count_sign_changes(params, eps) == 1;
    row.delta_lb = delta_lower_bound(params, eps).delta;
    row.delta_ub = delta_upper_bound(params, eps).delta;
    row.delta_ols = delta_only_local(params.q, params.sigma, params.C, eps).delta;
    row.ordering_ok = row.delta_lb <= row.delta_closed_form + kOrderingSlack &&
                      row.delta_closed_form <= row.delta_ub + kOrderingSlack &&
                      row.delta_ub <= row.delta_ols + kOrderingSlack;
    row.delta_pair = pair_divergence(params, eps);
    row.soundness_ok = row.delta_pair <= row.delta_closed_form + kSoundnessSlack;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

struct VerifyGrid {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<std::int64_t> d;
  std::vector<double> sigma;
  std::vector<double> eps;
  double C = 1.0;
};

// p, q in {0.01, 0.1, 0.5}; d in {1, 10, 30, 100}; sigma in {0.5, 1, 2, 5};
// eps in {0.015, 0.1, 0.5, 1}; C = 1.
inline VerifyGrid default_verify_grid() {
  return {{0.01, 0.1, 0.5}, {0.01, 0.1, 0.5}, {1, 10, 30, 100},
          {0.5, 1.0, 2.0, 5.0}, {0.015, 0.1, 0.5, 1.0}, 1.0};
}

inline std::vector<VerifyRow> verify_grid(const VerifyGrid& grid, unsigned threads = 0) {
  struct Point {
    SamplingParams params;
    double eps;
  };
  std::vector<Point> points;
  for (double p : grid.p)
    for (double q : grid.q)
      for (std::int64_t d : grid.d)
        for (double sigma : grid.sigma)
          for (double eps : grid.eps) points.push_back({{p, q, d, grid.C, sigma}, eps});
  std::vector<VerifyRow> rows(points.size());
  parallel_for(points.size(), threads, [&](std::size_t i) {
    rows[i] = verify_point(points[i].params, points[i].eps);
  });
  return rows;
}

struct AjcCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_diff = 0.0;
};

// Advanced joint convexity on seeded random mixture triples (1-3 components
// each, shared sigma, means in [-3, 3]).
inline std::vector<AjcCheck> ajc_spot_check(int cases, std::uint64_t seed,
                                            double abs_tol = kDivergenceTolerance) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mean(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_real_distribution<double> sigma_dist(0.5, 2.0);
  std::uniform_real_distribution<double> gamma_dist(0.01, 0.99);
  std::uniform_real_distribution<double> log_alpha(0.0, 2.0);
  std::vector<AjcCheck> out;
  for (int c = 0; c < cases; ++c) {
    const double sigma = sigma_dist(rng);
    auto random_mixture = [&] {
      std::vector<MixtureComponent> comps(static_cast<std::size_t>(count(rng)));
      double total = 0.0;
      for (auto& comp : comps) {
        comp = {mean(rng), unit(rng)};
        total += comp.weight;
      }
      for (auto& comp : comps) comp.weight /= total;
      return GaussianMixture1D(std::move(comps), sigma);
    };
    const GaussianMixture1D mu0 = random_mixture();
    const GaussianMixture1D mu1 = random_mixture();
    const GaussianMixture1D mu1p = random_mixture();
    const double gamma = gamma_dist(rng);
    const double alpha = std::exp(log_alpha(rng));
    const AjcSides s = ajc_decompose(mu0, mu1, mu1p, gamma, alpha, abs_tol);
    out.push_back({s.lhs, s.rhs, std::abs(s.lhs - s.rhs)});
  }
  return out;
}

}  // namespace fedamp
