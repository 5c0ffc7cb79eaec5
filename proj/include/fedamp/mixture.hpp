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

// Equal-variance univariate Gaussian mixtures and hockey-stick divergences
// between them.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fedamp/error.hpp"
#include "fedamp/numerics.hpp"
#include "fedamp/params.hpp"

namespace fedamp {

inline constexpr double kMeanMergeTolerance = 1e-12;
inline constexpr double kDivergenceTolerance = 1e-13;
// Binomial components lighter than this are dropped.
inline constexpr double kMinComponentWeight = 1e-300;

struct MixtureComponent {
  double mean = 0.0;
  double weight = 0.0;
};

// sum_k w_k N(mean_k, sigma^2). Components are kept sorted by mean with
// coincident means merged. Total mass is normally 1; scaled() and sum() build
// sub-probability measures used as hockey-stick denominators.
class GaussianMixture1D {
 public:
  GaussianMixture1D(std::vector<MixtureComponent> components, double sigma)
      : components_(std::move(components)), sigma_(sigma) {
    detail::RequirePositive(sigma_, "sigma");
    for (const auto& c : components_) {
      detail::RequireFinite(c.mean, "component mean");
      if (!std::isfinite(c.weight) || c.weight < 0.0) {
        throw DomainError("component weights must be finite and >= 0");
      }
    }
    Canonicalize();
  }

  static GaussianMixture1D Single(double mean, double sigma) {
    return GaussianMixture1D({{mean, 1.0}}, sigma);
  }

  std::span<const MixtureComponent> components() const { return components_; }
  double sigma() const { return sigma_; }
  std::size_t size() const { return components_.size(); }

  double total_mass() const {
    CompensatedSum s;
    for (const auto& c : components_) s.add(c.weight);
    return s.value();
  }
  bool is_probability(double tol = 1e-12) const {
    return std::abs(total_mass() - 1.0) <= tol;
  }

  double min_mean() const { return components_.front().mean; }
  double max_mean() const { return components_.back().mean; }

  double density(double z) const {
    CompensatedSum s;
    for (const auto& c : components_) {
      s.add(c.weight * gaussian_pdf(z, c.mean, sigma_));
    }
    return s.value();
  }

  // log density, finite wherever some component is representable in logs.
  double log_density(double z) const {
    std::vector<double> terms;
    terms.reserve(components_.size());
    for (const auto& c : components_) {
      if (c.weight > 0.0) {
        terms.push_back(std::log(c.weight) + gaussian_log_pdf(z, c.mean, sigma_));
      }
    }
    return log_sum_exp(terms);
  }

  // Mass of (z, inf).
  double tail_mass(double z) const {
    CompensatedSum s;
    for (const auto& c : components_) {
      s.add(c.weight * gaussian_sf(z, c.mean, sigma_));
    }
    return s.value();
  }

  GaussianMixture1D scaled(double factor) const {
    if (!std::isfinite(factor) || factor < 0.0) {
      throw DomainError("mixture scale factor must be finite and >= 0");
    }
    std::vector<MixtureComponent> out(components_.begin(), components_.end());
    for (auto& c : out) c.weight *= factor;
    return GaussianMixture1D(std::move(out), sigma_);
  }

  GaussianMixture1D shifted(double offset) const {
    std::vector<MixtureComponent> out(components_.begin(), components_.end());
    for (auto& c : out) c.mean += offset;
    return GaussianMixture1D(std::move(out), sigma_);
  }

  // Unnormalized sum of two measures sharing sigma.
  friend GaussianMixture1D operator+(const GaussianMixture1D& a,
                                     const GaussianMixture1D& b) {
    if (std::abs(a.sigma_ - b.sigma_) > 1e-15 * std::max(a.sigma_, b.sigma_)) {
      throw DomainError("mixtures must share sigma");
    }
    std::vector<MixtureComponent> out(a.components_.begin(), a.components_.end());
    out.insert(out.end(), b.components_.begin(), b.components_.end());
    return GaussianMixture1D(std::move(out), a.sigma_);
  }

  // Weights renormalized away by component pruning (binomial_mixture only).
  double dropped_mass() const { return dropped_mass_; }

 private:
  friend GaussianMixture1D binomial_mixture(std::int64_t, double, double, double,
                                            double);

  void Canonicalize() {
    std::erase_if(components_, [](const MixtureComponent& c) { return c.weight == 0.0; });
    if (components_.empty()) throw DomainError("mixture has no mass");
    std::sort(components_.begin(), components_.end(),
              [](const MixtureComponent& x, const MixtureComponent& y) {
                return x.mean < y.mean;
              });
    std::vector<MixtureComponent> merged;
    merged.reserve(components_.size());
    for (const auto& c : components_) {
      if (!merged.empty() &&
          std::abs(c.mean - merged.back().mean) <=
              kMeanMergeTolerance * std::max(1.0, std::abs(c.mean))) {
        merged.back().weight += c.weight;
      } else {
        merged.push_back(c);
      }
    }
    components_ = std::move(merged);
  }

  std::vector<MixtureComponent> components_;
  double sigma_;
  double dropped_mass_ = 0.0;
};

// log of Binomial(d, q) mass at i, via log-gamma.
inline double log_binomial_pmf(std::int64_t d, double q, std::int64_t i) {
  if (i < 0 || i > d) return -INFINITY;
  if (q == 0.0) return i == 0 ? 0.0 : -INFINITY;
  if (q == 1.0) return i == d ? 0.0 : -INFINITY;
  const double n = static_cast<double>(d);
  const double k = static_cast<double>(i);
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
         k * std::log(q) + (n - k) * std::log1p(-q);
}

// sum_{i=0}^{d} Binom(d, q, i) N(i C + mean_offset, sigma^2). Components
// below kMinComponentWeight are dropped and the rest renormalized; the
// removed mass is reported by dropped_mass().
inline GaussianMixture1D binomial_mixture(std::int64_t d, double q, double C,
                                          double sigma, double mean_offset) {
  if (d < 0) throw DomainError("d must be non-negative");
  detail::RequireProbability(q, "q");
  detail::RequirePositive(C, "C");
  detail::RequirePositive(sigma, "sigma");
  detail::RequireFinite(mean_offset, "mean_offset");
  std::vector<MixtureComponent> components;
  CompensatedSum kept;
  CompensatedSum dropped;
  for (std::int64_t i = 0; i <= d; ++i) {
    const double w = std::exp(log_binomial_pmf(d, q, i));
    if (w < kMinComponentWeight) {
      dropped.add(w);
      continue;
    }
    kept.add(w);
    components.push_back({static_cast<double>(i) * C + mean_offset, w});
  }
  const double total = kept.value();
  for (auto& c : components) c.weight /= total;
  GaussianMixture1D mixture(std::move(components), sigma);
  mixture.dropped_mass_ = dropped.value() + std::abs(1.0 - total);
  return mixture;
}

// alpha and the two measures of D_alpha(numerator || denominator). The
// denominator may carry total mass up to alpha.
struct HockeyStickQuery {
  double alpha = 1.0;
  GaussianMixture1D numerator;
  GaussianMixture1D denominator;
};

namespace detail {

inline void ValidateQuery(const HockeyStickQuery& query) {
  if (!std::isfinite(query.alpha) || query.alpha < 1.0) {
    throw DomainError("hockey_stick: alpha must be >= 1");
  }
  const double mass = query.denominator.total_mass();
  if (!(mass > 0.0) || mass > query.alpha * (1.0 + 1e-12)) {
    throw DomainError("hockey_stick: denominator mass must lie in (0, alpha]");
  }
  if (std::abs(query.numerator.sigma() - query.denominator.sigma()) >
      1e-15 * query.numerator.sigma()) {
    throw DomainError("hockey_stick: mixtures must share sigma");
  }
}

// Sign changes of num(z) - alpha den(z) on [lo, hi], located on the log
// scale so that far tails do not underflow to a spurious zero.
inline std::vector<double> HockeyStickCrossings(const HockeyStickQuery& query,
                                                double lo, double hi) {
  const double log_alpha = std::log(query.alpha);
  auto log_gap = [&](double z) {
    return query.numerator.log_density(z) -
           (log_alpha + query.denominator.log_density(z));
  };
  // Uniform grid plus a refinement between every pair of adjacent means.
  std::vector<double> grid;
  constexpr int kUniform = 2048;
  for (int k = 0; k <= kUniform; ++k) grid.push_back(lo + (hi - lo) * k / kUniform);
  std::vector<double> means;
  for (const auto& c : query.numerator.components()) means.push_back(c.mean);
  for (const auto& c : query.denominator.components()) means.push_back(c.mean);
  std::sort(means.begin(), means.end());
  for (std::size_t k = 0; k + 1 < means.size(); ++k) {
    for (int j = 0; j <= 16; ++j) {
      grid.push_back(means[k] + (means[k + 1] - means[k]) * j / 16.0);
    }
  }
  std::erase_if(grid, [&](double z) { return z < lo || z > hi; });
  std::sort(grid.begin(), grid.end());
  std::vector<double> crossings;
  double prev_z = grid.front();
  double prev = log_gap(prev_z);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double z = grid[k];
    if (z == prev_z) continue;
    const double cur = log_gap(z);
    if (std::isfinite(prev) && std::isfinite(cur) &&
        std::signbit(prev) != std::signbit(cur) && prev != 0.0 && cur != 0.0) {
      crossings.push_back(
          find_root_bracketed(log_gap, prev_z, z, {.tolerance = 1e-15}).root);
    }
    prev_z = z;
    prev = cur;
  }
  return crossings;
}

}  // namespace detail

// D_alpha(num || den) = int [num(z) - alpha den(z)]_+ dz by adaptive
// quadrature over [min mean - 12 sigma, max mean + 12 sigma], split at the
// crossings of num and alpha den. Clamped to [0, 1].
inline double hockey_stick(const HockeyStickQuery& query,
                           double abs_tol = kDivergenceTolerance) {
  detail::ValidateQuery(query);
  const double sigma = query.numerator.sigma();
  const double lo = std::min(query.numerator.min_mean(), query.denominator.min_mean()) -
                    kTruncationSigmas * sigma;
  const double hi = std::max(query.numerator.max_mean(), query.denominator.max_mean()) +
                    kTruncationSigmas * sigma;
  auto integrand = [&](double z) {
    return std::max(0.0, query.numerator.density(z) -
                             query.alpha * query.denominator.density(z));
  };
  const QuadratureResult r =
      integrate_piecewise(integrand, lo, hi, detail::HockeyStickCrossings(query, lo, hi),
                          {.abs_tol = abs_tol, .initial_panels = 8});
  return std::clamp(r.value, 0.0, 1.0);
}

struct AjcSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

// Both sides of advanced joint convexity for
//   mu = (1 - gamma) mu0 + gamma mu1,  mu' = (1 - gamma) mu0 + gamma mu1':
//   D_{alpha'}(mu || mu') = gamma D_alpha(mu1 || (1 - beta) mu0 + beta mu1'),
// with alpha' = 1 + gamma (alpha - 1) and beta = alpha' / alpha. Note that
// here alpha' is the smaller, amplified parameter; the accountant names the
// two the other way round.
inline AjcSides ajc_decompose(const GaussianMixture1D& mu0,
                              const GaussianMixture1D& mu1,
                              const GaussianMixture1D& mu1_prime, double gamma,
                              double alpha, double abs_tol = kDivergenceTolerance) {
  if (!std::isfinite(gamma) || !(gamma > 0.0) || gamma > 1.0) {
    throw DomainError("ajc_decompose: gamma must lie in (0, 1]");
  }
  if (!std::isfinite(alpha) || alpha < 1.0) {
    throw DomainError("ajc_decompose: alpha must be >= 1");
  }
  const double alpha_amplified = 1.0 + gamma * (alpha - 1.0);
  const double beta = alpha_amplified / alpha;
  auto mix = [](const GaussianMixture1D& a, double wa, const GaussianMixture1D& b,
                double wb) {
    if (wa == 0.0) return b.scaled(wb);
    if (wb == 0.0) return a.scaled(wa);
    return a.scaled(wa) + b.scaled(wb);
  };
  const GaussianMixture1D mu = mix(mu0, 1.0 - gamma, mu1, gamma);
  const GaussianMixture1D mu_prime = mix(mu0, 1.0 - gamma, mu1_prime, gamma);
  AjcSides sides;
  sides.lhs = hockey_stick({alpha_amplified, mu, mu_prime}, abs_tol);
  sides.rhs = gamma * hockey_stick({alpha, mu1, mix(mu0, 1.0 - beta, mu1_prime, beta)},
                                   abs_tol);
  return sides;
}

// The one-dimensional neighbouring output pair. The differing element x'
// belongs to client 1 and every element moves the output by C:
//   xi  = (1-p) N(0) + p(1-q) Bin(d,q) + pq Bin(d,q) shifted by C
//   xi' = (1-p) N(0) + p Bin(d,q)
inline std::pair<GaussianMixture1D, GaussianMixture1D> worst_case_pair(
    const SamplingParams& params) {
  params.validate();
  const auto& [p, q, d, C, sigma] = params;
  const GaussianMixture1D absent = GaussianMixture1D::Single(0.0, sigma);
  const GaussianMixture1D present = binomial_mixture(d, q, C, sigma, 0.0);
  const GaussianMixture1D present_with_x = binomial_mixture(d, q, C, sigma, C);
  std::vector<MixtureComponent> xi;
  std::vector<MixtureComponent> xi_prime;
  auto append = [](std::vector<MixtureComponent>& out, const GaussianMixture1D& m,
                   double w) {
    if (w <= 0.0) return;
    for (const auto& c : m.components()) out.push_back({c.mean, c.weight * w});
  };
  append(xi, absent, 1.0 - p);
  append(xi, present, p * (1.0 - q));
  append(xi, present_with_x, p * q);
  append(xi_prime, absent, 1.0 - p);
  append(xi_prime, present, p);
  return {GaussianMixture1D(std::move(xi), sigma),
          GaussianMixture1D(std::move(xi_prime), sigma)};
}

}  // namespace fedamp
