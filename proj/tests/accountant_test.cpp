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


#include "fedamp/accountant.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fedamp/error.hpp"
#include "fedamp/mixture.hpp"
#include "fedamp/numerics.hpp"
#include "fedamp/params.hpp"

namespace fedamp {
namespace {

// Largest sign change (negative to positive) of f on a dense uniform grid,
// refined by plain bisection.
template <typename F>
double ScanLastCrossing(F f, double lo, double hi, int n) {
  double a = NAN;
  double b = NAN;
  double prev = f(lo);
  for (int k = 1; k <= n; ++k) {
    const double z = lo + (hi - lo) * k / n;
    const double v = f(z);
    if (prev <= 0.0 && v > 0.0) {
      a = lo + (hi - lo) * (k - 1) / n;
      b = z;
    }
    prev = v;
  }
  for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
    const double m = 0.5 * (a + b);
    (f(m) > 0.0 ? b : a) = m;
  }
  return 0.5 * (a + b);
}

TEST(Constants, NoAmplificationAtFullSampling) {
  const auto k = derive_constants(0.7, {1.0, 1.0, 5, 1.0, 1.0});
  EXPECT_NEAR(k.eps_prime, 0.7, 1e-15);
  EXPECT_NEAR(k.beta, 1.0, 1e-15);
  EXPECT_NEAR(k.c1_bar, 0.0, 1e-15);
  EXPECT_NEAR(k.c2_bar, 1.0, 1e-15);
}

TEST(Constants, SmallEpsLimit) {
  const auto k = derive_constants(1e-12, {0.3, 0.2, 5, 1.0, 1.0});
  EXPECT_LT(k.eps_prime, 1e-10);
  EXPECT_NEAR(k.beta, 1.0, 1e-10);
  const auto z = derive_constants(0.0, {0.3, 0.2, 5, 1.0, 1.0});
  EXPECT_EQ(z.eps_prime, 0.0);
}

TEST(Constants, ScenarioAEpsPrime) {
  const SamplingParams params{0.001, 0.1, 30, 1.0, 1.0};
  const auto k = derive_constants(0.015, params);
  EXPECT_NEAR(k.eps_prime, 5.024739665867515, 1e-13);
  const auto back = derive_constants_from_eps_prime(k.eps_prime, params);
  EXPECT_NEAR(back.eps, 0.015, 1e-12);
}

TEST(Constants, Definitions) {
  const SamplingParams params{0.3, 0.2, 5, 1.0, 1.0};
  const auto k = derive_constants(0.4, params);
  EXPECT_NEAR(std::log1p(0.06 * std::expm1(k.eps_prime)), 0.4, 1e-15);
  EXPECT_NEAR(k.c1, 0.7 / 0.94, 1e-15);
  EXPECT_NEAR(k.c2, 0.3 * 0.8 / 0.94, 1e-15);
  EXPECT_NEAR(k.c1_bar, (1 - k.beta) * k.c1, 1e-15);
  EXPECT_NEAR(k.c2_bar, k.c2 * (1 - k.beta) + k.beta, 1e-15);
  EXPECT_NEAR(k.eps_double_prime, k.eps_prime + std::log(k.c2_bar), 1e-15);
}

TEST(Constants, RejectsBadInput) {
  EXPECT_THROW(derive_constants(-0.1, {}), DomainError);
  EXPECT_THROW(derive_constants(0.1, {0.0, 0.5, 1, 1.0, 1.0}), DomainError);
  EXPECT_THROW(derive_constants(0.1, {0.5, 1.5, 1, 1.0, 1.0}), DomainError);
  EXPECT_THROW(derive_constants(0.1, {0.5, 0.5, -1, 1.0, 1.0}), DomainError);
}

TEST(Integrand, VanishesInLeftTail) {
  const SamplingParams params{0.1, 0.1, 30, 1.0, 1.0};
  const auto k = derive_constants(0.1, params);
  EXPECT_LT(std::abs(main_integrand(-12.0, k, params)), 1e-30);
}

TEST(Integrand, SingleComponentCrossing) {
  const SamplingParams params{1.0, 0.5, 0, 1.0, 1.0};
  const auto k = derive_constants_from_eps_prime(1.0, params);
  EXPECT_NEAR(main_integrand(1.5, k, params), 0.0, 1e-15);
  EXPECT_NEAR(main_integrand(0.3, k, params),
              gaussian_pdf(0.3, 1.0, 1.0) - std::exp(1.0) * gaussian_pdf(0.3, 0.0, 1.0), 1e-15);
}

TEST(Integrand, LogRatioAgreesWithSign) {
  const SamplingParams params{0.1, 0.1, 30, 1.0, 1.0};
  const MainBoundIntegrand f(derive_constants(0.1, params), params);
  for (double z = -5.0; z < 40.0; z += 0.37) {
    const double v = f(z);
    if (std::abs(v) < 1e-300) continue;
    EXPECT_EQ(f.log_ratio(z) > 0.0, v > 0.0) << z;
  }
}

TEST(ZStar, AnalyticFullParticipation) {
  const SamplingParams params{1.0, 0.5, 0, 1.0, 1.0};
  const RootResult r = find_z_star(derive_constants_from_eps_prime(1.0, params), params);
  EXPECT_NEAR(r.root, 1.5, 1e-12);
}

TEST(ZStar, AnalyticSingleComponent) {
  const SamplingParams params{0.3, 0.2, 0, 1.0, 1.5};
  const RootResult r = find_z_star(derive_constants(0.4, params), params);
  EXPECT_NEAR(r.root, 5.492493177979988, 1e-11);
}

TEST(ZStar, MatchesDenseScan) {
  const SamplingParams params{0.1, 0.1, 30, 1.0, 1.0};
  const auto k = derive_constants(0.1, params);
  const MainBoundIntegrand f(k, params);
  const double oracle = ScanLastCrossing([&](double z) { return f(z); }, -12.0, 43.0, 1'000'000);
  EXPECT_NEAR(find_z_star(k, params).root, oracle, 1e-9);
}

TEST(DeltaMain, SingleComponentClosedForm) {
  EXPECT_NEAR(delta_main({0.3, 0.2, 0, 1.0, 1.5}, 0.4).delta, 1.3195402033214477e-05, 1e-17);
}

TEST(DeltaMain, FullSamplingIsGaussianMechanism) {
  for (std::int64_t d : {0, 3, 20}) {
    for (double sigma : {0.5, 1.0, 2.0}) {
      for (double eps : {0.0, 0.1, 1.0}) {
        EXPECT_NEAR(delta_main({1.0, 1.0, d, 1.0, sigma}, eps).delta,
                    gaussian_mechanism_delta(eps, sigma, 1.0), 1e-12)
            << d << " " << sigma << " " << eps;
      }
    }
  }
}

TEST(DeltaMain, MatchesBruteForceIntegral) {
  for (const SamplingParams& params :
       {SamplingParams{0.1, 0.5, 1, 1.0, 1.0}, SamplingParams{0.5, 0.1, 10, 1.0, 2.0},
        SamplingParams{0.01, 0.5, 30, 1.0, 0.5}}) {
    for (double eps : {0.015, 0.5}) {
      const MainBoundIntegrand f(derive_constants(eps, params), params);
      const auto [lo, hi] = f.scan_window();
      const double z = ScanLastCrossing([&](double x) { return f(x); }, lo, hi, 200000);
      const int n = 400000;
      const double h = (hi - z) / n;
      double s = f(z) + f(hi);
      for (int j = 1; j < n; ++j) s += (j % 2 ? 4.0 : 2.0) * f(z + j * h);
      const double oracle = params.p * params.q * s * h / 3.0;
      EXPECT_NEAR(delta_main(params, eps).delta, oracle, 1e-12) << params.d << " " << eps;
    }
  }
}

TEST(DeltaMain, BoundsTheConstructedPair) {
  for (const SamplingParams& params :
       {SamplingParams{0.1, 0.1, 1, 1.0, 1.0}, SamplingParams{0.5, 0.5, 10, 1.0, 0.5},
        SamplingParams{0.01, 0.1, 30, 1.0, 2.0}}) {
    for (double eps : {0.1, 1.0}) {
      auto [xi, xi_prime] = worst_case_pair(params);
      const double pair = hockey_stick({std::exp(eps), xi, xi_prime});
      EXPECT_LE(pair, delta_main(params, eps).delta + 2e-13);
    }
  }
}

TEST(DeltaMain, NonincreasingInSigmaAndEps) {
  const SamplingParams base{0.1, 0.1, 10, 1.0, 1.0};
  double prev = 1.0;
  for (double sigma = 0.3; sigma < 6.0; sigma *= 1.3) {
    SamplingParams p = base;
    p.sigma = sigma;
    const double d = delta_main(p, 0.1).delta;
    EXPECT_LE(d, prev + 1e-15);
    prev = d;
  }
  prev = 1.0;
  for (double eps = 0.0; eps < 3.0; eps += 0.2) {
    const double d = delta_main(base, eps).delta;
    EXPECT_LE(d, prev + 1e-15);
    prev = d;
  }
}

TEST(DeltaMain, NeverExceedsOnlyLocalAtFullParticipation) {
  for (double q : {0.01, 0.1, 0.5}) {
    for (std::int64_t d : {1, 10, 30}) {
      for (double sigma : {0.5, 1.0, 2.0}) {
        for (double eps : {0.015, 0.5}) {
          EXPECT_LE(delta_main({1.0, q, d, 1.0, sigma}, eps).delta,
                    delta_only_local(q, sigma, 1.0, eps).delta + 1e-12);
        }
      }
    }
  }
}

TEST(DeltaMain, LowerBoundBelowMainAtDOne) {
  const SamplingParams params{0.1, 0.1, 1, 1.0, 1.0};
  EXPECT_LE(delta_lower_bound(params, 0.5).delta, delta_main(params, 0.5).delta + 1e-12);
}

TEST(DeltaMain, LargeDFinite) {
  const auto r = delta_main_detailed({0.1, 0.001, 1000, 1.0, 0.646}, 0.015);
  EXPECT_TRUE(std::isfinite(r.point.delta));
  EXPECT_GE(r.point.delta, 0.0);
  EXPECT_LE(r.point.delta, 1.0);
}

TEST(OnlyLocal, FullSamplingIsGaussianMechanism) {
  for (double eps : {0.0, 0.3, 2.0}) {
    EXPECT_NEAR(delta_only_local(1.0, 1.3, 1.0, eps).delta,
                gaussian_mechanism_delta(eps, 1.3, 1.0), 1e-15);
  }
}

TEST(OnlyLocal, ClosedForm) {
  const double q = 0.1;
  const double eps = 0.2;
  const double sigma = 2.0;
  const double ep = std::log1p(std::expm1(eps) / q);
  const double expected = q * (std_normal_cdf(0.5 / sigma - sigma * ep) -
                               std::exp(ep) * std_normal_cdf(-0.5 / sigma - sigma * ep));
  EXPECT_NEAR(delta_only_local(q, sigma, 1.0, eps).delta, expected, 1e-16);
}

TEST(OnlyLocal, PaperScenarios) {
  const double a = delta_only_local(0.1, 22.4, 1.0, 0.015).delta;
  EXPECT_GE(a, 0.8e-6);
  EXPECT_LE(a, 1.25e-6);
  const double b = delta_only_local(0.001, 1.103, 1.0, 0.015).delta;
  EXPECT_GE(b, 0.8e-6);
  EXPECT_LE(b, 1.25e-6);
}

TEST(UpperBound, FullParticipationIsOnlyLocal) {
  for (double q : {0.01, 0.3, 1.0}) {
    EXPECT_NEAR(delta_upper_bound({1.0, q, 7, 1.0, 1.1}, 0.3).delta,
                delta_only_local(q, 1.1, 1.0, 0.3).delta, 1e-15);
  }
}

TEST(UpperBound, PaperScenarios) {
  const double a = delta_upper_bound({0.001, 0.1, 30, 1.0, 7.65}, 0.015).delta;
  EXPECT_GE(a, 0.8e-6);
  EXPECT_LE(a, 1.25e-6);
  const double b = delta_upper_bound({0.1, 0.001, 1000, 1.0, 0.873}, 0.015).delta;
  EXPECT_GE(b, 0.8e-6);
  EXPECT_LE(b, 1.25e-6);
}

TEST(UpperBound, IndependentOfD) {
  EXPECT_EQ(delta_upper_bound({0.2, 0.3, 1, 1.0, 1.0}, 0.5).delta,
            delta_upper_bound({0.2, 0.3, 500, 1.0, 1.0}, 0.5).delta);
}

TEST(LowerBound, Reductions) {
  EXPECT_NEAR(delta_lower_bound({1.0, 0.2, 3, 1.0, 1.0}, 0.4).delta,
              delta_only_local(0.2, 1.0, 1.0, 0.4).delta, 1e-15);
  EXPECT_NEAR(delta_lower_bound({0.2, 1.0, 3, 1.0, 1.0}, 0.4).delta,
              delta_only_local(0.2, 1.0, 1.0, 0.4).delta, 1e-15);
}

TEST(Schemes, DispatchMatches) {
  const SamplingParams params{0.2, 0.3, 4, 1.0, 1.2};
  EXPECT_EQ(delta_for(Scheme::kMain, params, 0.3).delta, delta_main(params, 0.3).delta);
  EXPECT_EQ(delta_for(Scheme::kUpperBound, params, 0.3).delta,
            delta_upper_bound(params, 0.3).delta);
  EXPECT_EQ(delta_for(Scheme::kOnlyLocal, params, 0.3).delta,
            delta_only_local(0.3, 1.2, 1.0, 0.3).delta);
  EXPECT_EQ(delta_for(Scheme::kGaussianMechanism, params, 0.3).delta,
            gaussian_mechanism_delta(0.3, 1.2, 1.0));
  for (Scheme s : {Scheme::kMain, Scheme::kOnlyLocal, Scheme::kUpperBound, Scheme::kLowerBound,
                   Scheme::kGaussianMechanism}) {
    EXPECT_EQ(parse_scheme(scheme_name(s)), s);
  }
  EXPECT_THROW(parse_scheme("bogus"), DomainError);
}

TEST(Calibrate, PaperBaselines) {
  const SamplingParams a{0.001, 0.1, 30, 1.0, 1.0};
  EXPECT_NEAR(calibrate_sigma(Scheme::kUpperBound, a, 0.015, 1e-6), 7.65, 0.0765);
  EXPECT_NEAR(calibrate_sigma(Scheme::kOnlyLocal, a, 0.015, 1e-6), 22.4, 0.224);
  const SamplingParams b{0.1, 0.001, 1000, 1.0, 1.0};
  EXPECT_NEAR(calibrate_sigma(Scheme::kUpperBound, b, 0.015, 1e-6), 0.873, 0.00873);
  EXPECT_NEAR(calibrate_sigma(Scheme::kOnlyLocal, b, 0.015, 1e-6), 1.103, 0.01103);
}

TEST(Calibrate, ReturnsSmallestFeasibleSigma) {
  for (Scheme s : {Scheme::kMain, Scheme::kUpperBound, Scheme::kOnlyLocal, Scheme::kLowerBound}) {
    SamplingParams params{0.1, 0.1, 10, 1.0, 1.0};
    const double sigma = calibrate_sigma(s, params, 0.1, 1e-5);
    params.sigma = sigma;
    EXPECT_LE(delta_for(s, params, 0.1).delta, 1e-5);
    params.sigma = sigma * (1.0 - 2e-6);
    EXPECT_GT(delta_for(s, params, 0.1).delta, 1e-5) << scheme_name(s);
  }
}

TEST(Calibrate, InfeasibleTargetThrows) {
  EXPECT_THROW(calibrate_sigma(Scheme::kOnlyLocal, {0.1, 0.001, 1000, 1.0, 1.0}, 1e-6, 1e-300),
               CalibrationError);
  EXPECT_THROW(calibrate_sigma(Scheme::kMain, {}, 0.1, 0.0), DomainError);
  EXPECT_THROW(calibrate_sigma(Scheme::kMain, {}, 0.1, 1.0), DomainError);
}

TEST(EpsForDelta, GaussianLargeSigmaGivesSmallEps) {
  double prev = 100.0;
  for (double sigma : {1.0, 10.0, 100.0, 1000.0}) {
    const double eps = eps_for_delta(Scheme::kGaussianMechanism, {1.0, 1.0, 0, 1.0, sigma}, 1e-6);
    EXPECT_LT(eps, prev);
    prev = eps;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(EpsForDelta, RoundTrip) {
  const SamplingParams params{0.1, 0.1, 10, 1.0, 1.0};
  for (Scheme s : {Scheme::kMain, Scheme::kUpperBound, Scheme::kOnlyLocal, Scheme::kLowerBound}) {
    for (double eps0 : {0.05, 0.5, 2.0}) {
      const double d = delta_for(s, params, eps0).delta;
      if (!(d > 0.0)) continue;
      EXPECT_LE(eps_for_delta(s, params, d), eps0 + 1e-6) << scheme_name(s) << " " << eps0;
    }
  }
}

TEST(EpsForDelta, LocalSamplingShape) {
  // Fixed pq = 1e-4: raising q (fewer, fuller participants) weakens privacy.
  const double small = eps_for_delta(Scheme::kMain, {1.0, 1e-4, 1000, 1.0, 1.0}, 1e-6);
  const double large = eps_for_delta(Scheme::kMain, {1e-4, 1.0, 1000, 1.0, 1.0}, 1e-6);
  EXPECT_LT(small, large);
}

}  // namespace
}  // namespace fedamp
