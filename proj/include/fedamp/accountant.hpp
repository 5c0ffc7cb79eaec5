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

// Per-iteration privacy accounting for DP-DSGD with random client
// participation and local Poisson sampling, plus the three baselines:
//
//   main  random participation with hidden identities (the z* bound)
//   ols   only local sampling: every client participates (p = 1)
//   ub    participation disclosed: amplification from p only via c2bar
//   lb    elements shuffled globally: plain Poisson sampling at rate pq
//
// All schemes take the *final* eps and derive eps' from
//   eps = log(1 + pq (e^{eps'} - 1)).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fedamp/error.hpp"
#include "fedamp/mixture.hpp"
#include "fedamp/numerics.hpp"
#include "fedamp/params.hpp"

namespace fedamp {

// Quantities shared by the main bound and UB for a given (eps, p, q).
//   alpha = e^eps, alpha' = e^{eps'}, beta = e^{eps - eps'},
//   c1 = (1-p)/(1-pq), c2 = p(1-q)/(1-pq),
//   c1bar = (1-beta) c1, c2bar = c2 (1-beta) + beta, eps'' = eps' + log c2bar.
struct AmplificationConstants {
  double eps = 0.0;
  double eps_prime = 0.0;
  double eps_double_prime = 0.0;
  double alpha = 1.0;
  double alpha_prime = 1.0;
  double beta = 1.0;
  double c1 = 0.0;
  double c2 = 1.0;
  double c1_bar = 0.0;
  double c2_bar = 1.0;
};

namespace detail {

inline AmplificationConstants FillConstants(double eps, double eps_prime,
                                            const SamplingParams& params) {
  const double p = params.p;
  const double q = params.q;
  AmplificationConstants k;
  k.eps = eps;
  k.eps_prime = eps_prime;
  k.alpha = std::exp(eps);
  k.alpha_prime = std::exp(eps_prime);
  k.beta = std::exp(eps - eps_prime);
  const double pq = p * q;
  if (pq < 1.0) {
    k.c1 = (1.0 - p) / (1.0 - pq);
    k.c2 = p * (1.0 - q) / (1.0 - pq);
  } else {
    // p = q = 1: beta = 1 kills c1 and c2 anyway.
    k.c1 = 0.0;
    k.c2 = 1.0;
  }
  k.c1_bar = (1.0 - k.beta) * k.c1;
  k.c2_bar = k.c2 * (1.0 - k.beta) + k.beta;
  k.eps_double_prime = eps_prime + std::log(k.c2_bar);
  return k;
}

}  // namespace detail

// Constants for a target final eps. eps = 0 gives the limit eps' = 0.
inline AmplificationConstants derive_constants(double eps,
                                               const SamplingParams& params) {
  detail::RequireFinite(eps, "eps");
  if (eps < 0.0) throw DomainError("eps must be non-negative");
  params.validate();
  const double eps_prime = std::log1p(std::expm1(eps) / (params.p * params.q));
  return detail::FillConstants(eps, eps_prime, params);
}

// Same, parameterized by eps' (traces the curve the theorems state).
inline AmplificationConstants derive_constants_from_eps_prime(
    double eps_prime, const SamplingParams& params) {
  detail::RequireFinite(eps_prime, "eps_prime");
  if (eps_prime < 0.0) throw DomainError("eps_prime must be non-negative");
  params.validate();
  const double eps = std::log1p(params.p * params.q * std::expm1(eps_prime));
  return detail::FillConstants(eps, eps_prime, params);
}

// The main-bound integrand
//   f(z) = sum_i w_i (N(z,(i+1)C) - alpha' c2bar N(z,iC)) - alpha' c1bar N(z,0)
// with w_i = Binom(d, q, i), held in a form that can be evaluated directly,
// on the log scale, or through its closed-form tail integral.
class MainBoundIntegrand {
 public:
  MainBoundIntegrand(const AmplificationConstants& consts,
                     const SamplingParams& params)
      : consts_(consts), params_(params) {
    params.validate();
    const double log_floor = std::log(kMinComponentWeight);
    for (std::int64_t i = 0; i <= params.d; ++i) {
      const double lw = log_binomial_pmf(params.d, params.q, i);
      if (lw < log_floor) continue;
      index_.push_back(static_cast<double>(i));
      log_weight_.push_back(lw);
    }
    log_neg_scale_ = std::log(consts.alpha_prime * consts.c2_bar);
    log_zero_scale_ = consts.c1_bar > 0.0
                          ? std::log(consts.alpha_prime * consts.c1_bar)
                          : -INFINITY;
  }

  const AmplificationConstants& constants() const { return consts_; }
  const SamplingParams& params() const { return params_; }

  // Raw signed value.
  double operator()(double z) const {
    const double C = params_.C;
    const double s = params_.sigma;
    CompensatedSum acc;
    for (std::size_t k = 0; k < index_.size(); ++k) {
      const double w = std::exp(log_weight_[k]);
      const double i = index_[k];
      acc.add(w * gaussian_pdf(z, (i + 1.0) * C, s));
      acc.add(-std::exp(log_neg_scale_) * w * gaussian_pdf(z, i * C, s));
    }
    if (consts_.c1_bar > 0.0) {
      acc.add(-consts_.alpha_prime * consts_.c1_bar * gaussian_pdf(z, 0.0, s));
    }
    return acc.value();
  }

  // log(positive part) - log(negative part). Same sign as operator() but
  // free of underflow far from the component means.
  double log_ratio(double z) const {
    const double C = params_.C;
    const double s = params_.sigma;
    const std::size_t n = index_.size();
    scratch_pos_.resize(n);
    scratch_neg_.resize(n + 1);
    for (std::size_t k = 0; k < n; ++k) {
      const double i = index_[k];
      scratch_pos_[k] = log_weight_[k] + gaussian_log_pdf(z, (i + 1.0) * C, s);
      scratch_neg_[k] = log_neg_scale_ + log_weight_[k] + gaussian_log_pdf(z, i * C, s);
    }
    scratch_neg_[n] = log_zero_scale_ + gaussian_log_pdf(z, 0.0, s);
    return log_sum_exp(scratch_pos_) - log_sum_exp(scratch_neg_);
  }

  // int_{z}^{inf} f, paired per binomial term:
  //   sum_i w_i (Q_{(i+1)C}(z) - alpha' c2bar Q_{iC}(z)) - alpha' c1bar Q_0(z)
  // with Q = 1 - Phi computed directly from erfc.
  double tail_integral(double z) const {
    const double C = params_.C;
    const double s = params_.sigma;
    const double neg_scale = consts_.alpha_prime * consts_.c2_bar;
    CompensatedSum acc;
    for (std::size_t k = 0; k < index_.size(); ++k) {
      const double w = std::exp(log_weight_[k]);
      const double i = index_[k];
      acc.add(w * (gaussian_sf(z, (i + 1.0) * C, s) - neg_scale * gaussian_sf(z, i * C, s)));
    }
    if (consts_.c1_bar > 0.0) {
      acc.add(-consts_.alpha_prime * consts_.c1_bar * gaussian_sf(z, 0.0, s));
    }
    return acc.value();
  }

  // Component means that carry weight (ascending), used to seed scans.
  std::vector<double> means() const {
    std::vector<double> out;
    out.reserve(index_.size() + 1);
    out.push_back(0.0);
    for (double i : index_) out.push_back((i + 1.0) * params_.C);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  // [-12 sigma, (d+1) C + 12 sigma + sigma^2 eps' / C]
  std::pair<double, double> scan_window() const {
    const double s = params_.sigma;
    const double C = params_.C;
    return {-kTruncationSigmas * s,
            (static_cast<double>(params_.d) + 1.0) * C + kTruncationSigmas * s +
                s * s * consts_.eps_prime / C};
  }

 private:
  AmplificationConstants consts_;
  SamplingParams params_;
  std::vector<double> index_;
  std::vector<double> log_weight_;
  double log_neg_scale_ = 0.0;
  double log_zero_scale_ = -INFINITY;
  mutable std::vector<double> scratch_pos_;
  mutable std::vector<double> scratch_neg_;
};

inline double main_integrand(double z, const AmplificationConstants& consts,
                             const SamplingParams& params) {
  return MainBoundIntegrand(consts, params)(z);
}

namespace detail {

inline std::vector<double> ZStarScanGrid(const MainBoundIntegrand& f, double lo,
                                         double hi) {
  constexpr int kUniform = 4096;
  constexpr int kPerGap = 16;
  std::vector<double> grid;
  grid.reserve(kUniform + 1);
  for (int k = 0; k <= kUniform; ++k) grid.push_back(lo + (hi - lo) * k / kUniform);
  const std::vector<double> means = f.means();
  for (std::size_t k = 0; k + 1 < means.size(); ++k) {
    for (int j = 1; j < kPerGap; ++j) {
      grid.push_back(means[k] + (means[k + 1] - means[k]) * j / kPerGap);
    }
  }
  std::erase_if(grid, [&](double z) { return z < lo || z > hi; });
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace detail

// Largest zero crossing z* of the main-bound integrand (nonpositive to the
// left, positive to the right). Scans the window, doubling its upper end up
// to twice on failure, then refines on the log-ratio. The reported residual
// is the raw integrand at z*.
inline RootResult find_z_star(const MainBoundIntegrand& f) {
  auto [lo, hi] = f.scan_window();
  for (int attempt = 0; attempt < 3; ++attempt) {
    const std::vector<double> grid = detail::ZStarScanGrid(f, lo, hi);
    std::optional<std::size_t> last;
    double prev = f.log_ratio(grid.front());
    for (std::size_t k = 1; k < grid.size(); ++k) {
      const double cur = f.log_ratio(grid[k]);
      if (prev <= 0.0 && cur > 0.0) last = k;
      prev = cur;
    }
    if (last) {
      const double a = grid[*last - 1];
      const double b = grid[*last];
      auto g = [&f](double z) { return f.log_ratio(z); };
      RootResult r = find_root_bracketed(g, a, b, {.tolerance = 1e-15, .max_iterations = 2000});
      r.residual = f(r.root);
      return r;
    }
    hi = lo + 2.0 * (hi - lo);
  }
  throw DegenerateRegimeError(
      "find_z_star: main-bound integrand has no positive region in [" +
      detail::Num(lo) + ", " + detail::Num(hi) + "] (alpha' c2bar = " +
      detail::Num(f.constants().alpha_prime * f.constants().c2_bar) + ")");
}

inline RootResult find_z_star(const AmplificationConstants& consts,
                              const SamplingParams& params) {
  return find_z_star(MainBoundIntegrand(consts, params));
}

struct MainBoundResult {
  PrivacyPoint point;
  std::optional<RootResult> z_star;  // empty in the degenerate regime
};

// delta = pq * int_{z*}^{inf} f(z) dz, evaluated in closed form.
inline MainBoundResult delta_main_detailed(const SamplingParams& params, double eps) {
  const AmplificationConstants consts = derive_constants(eps, params);
  const MainBoundIntegrand f(consts, params);
  MainBoundResult out;
  out.point.scheme = Scheme::kMain;
  out.point.eps = eps;
  try {
    const RootResult z = find_z_star(f);
    out.z_star = z;
    out.point.raw_delta = params.p * params.q * f.tail_integral(z.root);
  } catch (const DegenerateRegimeError&) {
    out.point.raw_delta = 0.0;
  }
  out.point.delta = std::clamp(out.point.raw_delta, 0.0, 1.0);
  return out;
}

inline PrivacyPoint delta_main(const SamplingParams& params, double eps) {
  return delta_main_detailed(params, eps).point;
}

// Poisson subsampling at rate q applied to the Gaussian mechanism.
inline PrivacyPoint delta_only_local(double q, double sigma, double C, double eps) {
  detail::RequireFinite(eps, "eps");
  if (eps < 0.0) throw DomainError("eps must be non-negative");
  if (!std::isfinite(q) || !(q > 0.0) || q > 1.0) throw DomainError("q must lie in (0, 1]");
  detail::RequirePositive(sigma, "sigma");
  detail::RequirePositive(C, "C");
  const double eps_prime = std::log1p(std::expm1(eps) / q);
  PrivacyPoint out{eps, 0.0, Scheme::kOnlyLocal, 0.0};
  out.raw_delta = q * gaussian_hockey_stick(eps_prime, sigma, C);
  out.delta = std::clamp(out.raw_delta, 0.0, 1.0);
  return out;
}

inline PrivacyPoint delta_upper_bound(const SamplingParams& params, double eps) {
  const AmplificationConstants k = derive_constants(eps, params);
  PrivacyPoint out{eps, 0.0, Scheme::kUpperBound, 0.0};
  out.raw_delta = params.p * params.q *
                  gaussian_hockey_stick(k.eps_double_prime, params.sigma, params.C);
  out.delta = std::clamp(out.raw_delta, 0.0, 1.0);
  return out;
}

inline PrivacyPoint delta_lower_bound(const SamplingParams& params, double eps) {
  params.validate();
  PrivacyPoint out = delta_only_local(params.p * params.q, params.sigma, params.C, eps);
  out.scheme = Scheme::kLowerBound;
  return out;
}

inline PrivacyPoint delta_gaussian(const SamplingParams& params, double eps) {
  params.validate();
  PrivacyPoint out{eps, 0.0, Scheme::kGaussianMechanism, 0.0};
  out.raw_delta = gaussian_hockey_stick(eps, params.sigma, params.C);
  out.delta = gaussian_mechanism_delta(eps, params.sigma, params.C);
  return out;
}

inline PrivacyPoint delta_for(Scheme scheme, const SamplingParams& params, double eps) {
  switch (scheme) {
    case Scheme::kMain:
      return delta_main(params, eps);
    case Scheme::kOnlyLocal: {
      params.validate();
      return delta_only_local(params.q, params.sigma, params.C, eps);
    }
    case Scheme::kUpperBound:
      return delta_upper_bound(params, eps);
    case Scheme::kLowerBound:
      return delta_lower_bound(params, eps);
    case Scheme::kGaussianMechanism:
      return delta_gaussian(params, eps);
  }
  throw DomainError("unknown scheme");
}

struct CalibrationOptions {
  double sigma_low = 1e-3;
  double sigma_high = 1e4;
  double relative_tolerance = 1e-6;
};

// Smallest sigma in [sigma_low, sigma_high] whose delta at eps_target is at
// most delta_target. Relies on delta being nonincreasing in sigma and checks
// that the bracket endpoints agree with that ordering. params.sigma is
// ignored.
inline double calibrate_sigma(Scheme scheme, SamplingParams params, double eps_target,
                              double delta_target, CalibrationOptions options = {}) {
  detail::RequirePositive(eps_target, "eps_target");
  if (!std::isfinite(delta_target) || !(delta_target > 0.0) || !(delta_target < 1.0)) {
    throw DomainError("delta_target must lie in (0, 1)");
  }
  auto delta_at = [&](double sigma) {
    params.sigma = sigma;
    return delta_for(scheme, params, eps_target).delta;
  };
  double lo = options.sigma_low;
  double hi = options.sigma_high;
  const double d_lo = delta_at(lo);
  const double d_hi = delta_at(hi);
  if (d_lo < d_hi) {
    throw CalibrationError("calibrate_sigma: delta increases with sigma across [" +
                           detail::Num(lo) + ", " + detail::Num(hi) + "]");
  }
  if (d_hi > delta_target) {
    throw CalibrationError("calibrate_sigma: delta(" + detail::Num(hi) + ") = " +
                           detail::Num(d_hi) + " still exceeds the target");
  }
  if (d_lo <= delta_target) return lo;
  while (hi / lo - 1.0 > options.relative_tolerance) {
    const double mid = std::sqrt(lo * hi);
    if (delta_at(mid) > delta_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

struct EpsSearchOptions {
  double eps_high = 64.0;
  double tolerance = 1e-10;
};

// Smallest eps >= 0 with delta(eps) <= delta_target.
inline double eps_for_delta(Scheme scheme, const SamplingParams& params,
                            double delta_target, EpsSearchOptions options = {}) {
  if (!std::isfinite(delta_target) || !(delta_target > 0.0) || !(delta_target < 1.0)) {
    throw DomainError("delta_target must lie in (0, 1)");
  }
  params.validate();
  double lo = 0.0;
  double hi = options.eps_high;
  const double d_lo = delta_for(scheme, params, lo).delta;
  const double d_hi = delta_for(scheme, params, hi).delta;
  if (d_lo < d_hi) {
    throw CalibrationError("eps_for_delta: delta increases with eps across the bracket");
  }
  if (d_hi > delta_target) {
    throw CalibrationError("eps_for_delta: target delta unreachable for eps <= " +
                           detail::Num(hi));
  }
  if (d_lo <= delta_target) return 0.0;
  while (hi - lo > options.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (delta_for(scheme, params, mid).delta > delta_target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

}  // namespace fedamp
