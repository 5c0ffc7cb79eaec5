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

// Scalar special functions, adaptive quadrature and bracketed root finding.
// Everything here is pure and reentrant.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fedamp/error.hpp"

namespace fedamp {

inline constexpr double kDefaultQuadratureTolerance = 1e-14;
inline constexpr double kDefaultRootTolerance = 1e-12;
// Gaussian supports are truncated at this many standard deviations.
inline constexpr double kTruncationSigmas = 12.0;

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t evaluations = 0;
};

struct RootResult {
  double root = 0.0;
  double residual = 0.0;
  double bracket_low = 0.0;
  double bracket_high = 0.0;
};

// Phi(x). Uses erfc so that the lower tail keeps full relative accuracy.
inline double std_normal_cdf(double x) {
  detail::RequireFinite(x, "x");
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// 1 - Phi(x) without the subtraction.
inline double std_normal_sf(double x) {
  detail::RequireFinite(x, "x");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

inline double gaussian_log_pdf(double z, double mu, double sigma) {
  detail::RequirePositive(sigma, "sigma");
  const double u = (z - mu) / sigma;
  return -0.5 * u * u - std::log(sigma) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

inline double gaussian_pdf(double z, double mu, double sigma) {
  detail::RequirePositive(sigma, "sigma");
  const double u = (z - mu) / sigma;
  return std::exp(-0.5 * u * u) /
         (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// CDF and survival function of N(mu, sigma^2).
inline double gaussian_cdf(double z, double mu, double sigma) {
  detail::RequirePositive(sigma, "sigma");
  return std_normal_cdf((z - mu) / sigma);
}

inline double gaussian_sf(double z, double mu, double sigma) {
  detail::RequirePositive(sigma, "sigma");
  return std_normal_sf((z - mu) / sigma);
}

// Hockey-stick divergence D_r(N(C, s^2) || N(0, s^2)) for an arbitrary ratio
// r > 0 (r < 1 is allowed and arises for sub-probability denominators).
inline double gaussian_hockey_stick(double log_ratio, double sigma,
                                    double sensitivity) {
  const double a = sensitivity / (2.0 * sigma);
  const double b = log_ratio * sigma / sensitivity;
  const double first = std_normal_cdf(a - b);
  // exp(log_ratio) * Phi(-a - b), combined in log space so a huge ratio
  // against a vanishing tail does not overflow.
  const double tail = std_normal_cdf(-a - b);
  const double second =
      tail > 0.0 ? std::exp(log_ratio + std::log(tail)) : 0.0;
  return first - second;
}

// Exact privacy profile of the Gaussian mechanism:
// Phi(C/(2s) - eps s/C) - e^eps Phi(-C/(2s) - eps s/C), clamped to [0, 1].
inline double gaussian_mechanism_delta(double eps, double sigma,
                                       double sensitivity) {
  detail::RequireFinite(eps, "eps");
  if (eps < 0.0) throw DomainError("eps must be non-negative");
  detail::RequirePositive(sigma, "sigma");
  detail::RequirePositive(sensitivity, "sensitivity");
  return std::clamp(gaussian_hockey_stick(eps, sigma, sensitivity), 0.0, 1.0);
}

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

// log(sum_i exp(x_i)); returns -inf for an empty or all -inf input.
inline double log_sum_exp(std::span<const double> xs) {
  double hi = -INFINITY;
  for (double x : xs) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  CompensatedSum acc;
  for (double x : xs) acc.add(std::exp(x - hi));
  return hi + std::log(acc.value());
}

struct RootOptions {
  double tolerance = kDefaultRootTolerance;
  int max_iterations = 400;
};

// Bracketed root of f on [lo, hi]: secant steps guarded by bisection. The
// bracket is maintained throughout, so the result is deterministic and never
// leaves [lo, hi]. Stops when |f(z)| <= tol or the bracket is narrower than
// tol * max(1, |z|).
template <typename F>
RootResult find_root_bracketed(F&& f, double lo, double hi,
                               RootOptions options = {}) {
  detail::RequireFinite(lo, "lo");
  detail::RequireFinite(hi, "hi");
  detail::RequirePositive(options.tolerance, "tol");
  if (lo > hi) std::swap(lo, hi);
  double f_lo = f(lo);
  double f_hi = f(hi);
  if (f_lo == 0.0) return {lo, 0.0, lo, lo};
  if (f_hi == 0.0) return {hi, 0.0, hi, hi};
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw BracketError("find_root_bracketed: no sign change on [" +
                       detail::Num(lo) + ", " + detail::Num(hi) + "]");
  }
  const double tol = options.tolerance;
  bool bisect_next = false;
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    const double width_before = hi - lo;
    const bool bisecting = bisect_next;
    double z = 0.5 * (lo + hi);
    if (!bisecting) {
      const double secant = hi - f_hi * (hi - lo) / (f_hi - f_lo);
      if (secant > lo && secant < hi) z = secant;
    }
    const double fz = f(z);
    if (fz == 0.0) return {z, 0.0, lo, hi};
    if (std::signbit(fz) == std::signbit(f_lo)) {
      lo = z;
      f_lo = fz;
    } else {
      hi = z;
      f_hi = fz;
    }
    // A secant step that fails to halve the bracket is followed by bisection.
    bisect_next = !bisecting && hi - lo > 0.5 * width_before;
    const bool lo_is_best = std::abs(f_lo) <= std::abs(f_hi);
    const double best = lo_is_best ? lo : hi;
    const double f_best = lo_is_best ? f_lo : f_hi;
    if (std::abs(f_best) <= tol ||
        hi - lo <= tol * std::max(1.0, std::abs(best)) ||
        std::nextafter(lo, hi) >= hi) {
      return {best, f_best, lo, hi};
    }
  }
  throw ConvergenceError("find_root_bracketed: iteration cap reached");
}

struct QuadratureOptions {
  double abs_tol = kDefaultQuadratureTolerance;
  std::size_t max_evaluations = 2'000'000;
  // Uniform panels the interval is split into before adaptive refinement.
  int initial_panels = 16;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel KronrodPanel(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double f_center = f(center);
  double kronrod = kKronrodWeights[7] * f_center;
  double gauss = kGaussWeights[3] * f_center;
  // Endpoints feed only the kink check below.
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  int zeros = (f_center == 0.0) + (f_lo == 0.0) + (f_hi == 0.0);
  double peak = std::max({std::abs(f_center), std::abs(f_lo), std::abs(f_hi)});
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kKronrodNodes[j];
    const double left = f(center - dx);
    const double right = f(center + dx);
    zeros += (left == 0.0) + (right == 0.0);
    peak = std::max({peak, std::abs(left), std::abs(right)});
    const double sum = left + right;
    kronrod += kKronrodWeights[j] * sum;
    // Odd Kronrod nodes coincide with the 7-point Gauss nodes.
    if (j % 2 == 1) gauss += kGaussWeights[j / 2] * sum;
  }
  double error = std::abs((kronrod - gauss) * half);
  // Some nodes exactly zero and others not: a clipped kink sits inside the
  // panel, where the Gauss/Kronrod difference is unreliable.
  if (zeros > 0 && zeros < 17) error = std::max(error, 2.0 * half * peak);
  return {lo, hi, kronrod * half, error};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod quadrature. The panel with the largest
// error estimate is bisected until the summed estimate drops below abs_tol.
// Throws AccuracyError when the evaluation cap is hit first.
template <typename F>
QuadratureResult integrate_adaptive(F&& f, double lo, double hi,
                                    QuadratureOptions options = {}) {
  detail::RequireFinite(lo, "lo");
  detail::RequireFinite(hi, "hi");
  detail::RequirePositive(options.abs_tol, "abs_tol");
  if (!(lo < hi)) throw DomainError("integrate_adaptive: need lo < hi");
  std::size_t evaluations = 0;
  auto counted = [&](double x) {
    ++evaluations;
    const double y = f(x);
    if (!std::isfinite(y)) {
      throw DomainError("integrate_adaptive: integrand is not finite");
    }
    return y;
  };
  std::priority_queue<detail::Panel> panels;
  const int n0 = std::max(1, options.initial_panels);
  const double step = (hi - lo) / n0;
  for (int k = 0; k < n0; ++k) {
    const double a = lo + k * step;
    const double b = k + 1 == n0 ? hi : lo + (k + 1) * step;
    panels.push(detail::KronrodPanel(counted, a, b));
  }
  auto totals = [&panels]() {
    // The queue is small relative to evaluation cost; recompute exactly.
    auto copy = panels;
    CompensatedSum value;
    CompensatedSum error;
    while (!copy.empty()) {
      value.add(copy.top().value);
      error.add(copy.top().error);
      copy.pop();
    }
    return std::pair{value.value(), error.value()};
  };
  double error_sum = 0.0;
  {
    auto copy = panels;
    while (!copy.empty()) {
      error_sum += copy.top().error;
      copy.pop();
    }
  }
  while (error_sum > options.abs_tol) {
    if (evaluations + 34 > options.max_evaluations) {
      const auto [value, error] = totals();
      throw AccuracyError("integrate_adaptive: error estimate " +
                              detail::Num(error) + " exceeds tolerance " +
                              detail::Num(options.abs_tol),
                          error);
    }
    const detail::Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) {
      // Cannot split further; keep the panel and accept its error.
      const auto [value, error] = totals();
      throw AccuracyError("integrate_adaptive: panel width underflow", error);
    }
    detail::Panel left = detail::KronrodPanel(counted, worst.lo, mid);
    detail::Panel right = detail::KronrodPanel(counted, mid, worst.hi);
    // Halves that disagree with their parent beyond their own estimates
    // inherit the discrepancy.
    const double mismatch = std::abs(left.value + right.value - worst.value);
    if (mismatch > left.error + right.error) {
      left.error = std::max(left.error, 0.5 * mismatch);
      right.error = std::max(right.error, 0.5 * mismatch);
    }
    error_sum += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
    // Running sums drift; refresh occasionally.
    if (panels.size() % 64 == 0) error_sum = totals().second;
  }
  const auto [value, error] = totals();
  return {value, error, evaluations};
}

// Integrates f over [lo, hi] after splitting at the given interior
// breakpoints (kinks, crossings); the tolerance is shared across pieces.
template <typename F>
QuadratureResult integrate_piecewise(F&& f, double lo, double hi,
                                     std::vector<double> breakpoints,
                                     QuadratureOptions options = {}) {
  std::erase_if(breakpoints, [&](double b) { return !(b > lo && b < hi); });
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());
  std::vector<double> edges;
  edges.reserve(breakpoints.size() + 2);
  edges.push_back(lo);
  edges.insert(edges.end(), breakpoints.begin(), breakpoints.end());
  edges.push_back(hi);
  QuadratureOptions piece = options;
  piece.abs_tol = options.abs_tol / static_cast<double>(edges.size() - 1);
  QuadratureResult total;
  CompensatedSum value;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const QuadratureResult r = integrate_adaptive(f, edges[k], edges[k + 1], piece);
    value.add(r.value);
    total.error_estimate += r.error_estimate;
    total.evaluations += r.evaluations;
  }
  total.value = value.value();
  return total;
}

}  // namespace fedamp
