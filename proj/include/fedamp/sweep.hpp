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

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fedamp/accountant.hpp"
#include "fedamp/error.hpp"
#include "fedamp/params.hpp"

namespace fedamp {

enum class SweepVariable { kSigma, kEps, kDelta, kQWithPqFixed, kD };

inline SweepVariable parse_sweep_variable(std::string_view name) {
  if (name == "sigma") return SweepVariable::kSigma;
  if (name == "eps") return SweepVariable::kEps;
  if (name == "delta") return SweepVariable::kDelta;
  if (name == "q-fixed-pq" || name == "q_with_pq_fixed") return SweepVariable::kQWithPqFixed;
  if (name == "d") return SweepVariable::kD;
  throw DomainError("unknown sweep variable '" + std::string(name) + "'");
}

struct SweepSpec {
  std::vector<Scheme> schemes;
  SweepVariable variable = SweepVariable::kSigma;
  std::vector<double> values;
  SamplingParams base;
  // Exactly one of these is the held-fixed target, except when the swept
  // variable is itself eps or delta.
  std::optional<double> eps;
  std::optional<double> delta;
  // p * q for kQWithPqFixed.
  double pq = 0.0;
  // 0 picks the default (FEDAMP_THREADS or hardware concurrency).
  unsigned threads = 0;
};

struct SweepRow {
  Scheme scheme = Scheme::kMain;
  SamplingParams params;
  double eps = std::nan("");
  double delta = std::nan("");
  std::optional<double> z_star;
  std::string error;  // empty on success
};

// Thread count from FEDAMP_THREADS, else the hardware concurrency.
inline unsigned default_thread_count() {
  if (const char* env = std::getenv("FEDAMP_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// Evaluates job(i) for i in [0, n) on up to `threads` workers. Results are
// written by index so the caller sees the same order regardless.
template <typename Job>
void parallel_for(std::size_t n, unsigned threads, Job&& job) {
  if (threads == 0) threads = default_thread_count();
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) job(i);
    });
  }
  for (auto& th : pool) th.join();
}

namespace detail {

inline void ValidateSweep(const SweepSpec& spec) {
  if (spec.values.empty()) throw DomainError("sweep: empty range");
  if (spec.schemes.empty()) throw DomainError("sweep: no scheme selected");
  const bool sweeps_target =
      spec.variable == SweepVariable::kEps || spec.variable == SweepVariable::kDelta;
  if (sweeps_target) {
    if (spec.eps || spec.delta) {
      throw DomainError("sweep: eps/delta is the swept variable; do not also fix it");
    }
  } else if (spec.eps.has_value() == spec.delta.has_value()) {
    throw DomainError("sweep: fix exactly one of eps or delta");
  }
  if (spec.variable == SweepVariable::kQWithPqFixed &&
      !(spec.pq > 0.0 && spec.pq <= 1.0)) {
    throw DomainError("sweep: q-fixed-pq needs pq in (0, 1]");
  }
}

inline SweepRow EvaluateSweepPoint(const SweepSpec& spec, Scheme scheme, double value) {
  SweepRow row;
  row.scheme = scheme;
  row.params = spec.base;
  std::optional<double> eps = spec.eps;
  std::optional<double> delta = spec.delta;
  switch (spec.variable) {
    case SweepVariable::kSigma:
      row.params.sigma = value;
      break;
    case SweepVariable::kEps:
      eps = value;
      break;
    case SweepVariable::kDelta:
      delta = value;
      break;
    case SweepVariable::kQWithPqFixed:
      row.params.q = value;
      row.params.p = spec.pq / value;
      break;
    case SweepVariable::kD:
      if (value < 0.0 || value != std::floor(value)) {
        row.error = "d must be a non-negative integer";
        return row;
      }
      row.params.d = static_cast<std::int64_t>(value);
      break;
  }
  try {
    row.params.validate();
    if (eps) {
      row.eps = *eps;
    } else {
      row.eps = eps_for_delta(scheme, row.params, *delta);
    }
    if (scheme == Scheme::kMain) {
      const MainBoundResult r = delta_main_detailed(row.params, row.eps);
      row.delta = r.point.delta;
      if (r.z_star) row.z_star = r.z_star->root;
    } else {
      row.delta = delta_for(scheme, row.params, row.eps).delta;
    }
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace detail

// One row per (grid value, scheme), grid-major. Invalid grid points produce
// a row with `error` set; the sweep itself only throws on a malformed spec.
inline std::vector<SweepRow> sweep(const SweepSpec& spec) {
  detail::ValidateSweep(spec);
  const std::size_t n_schemes = spec.schemes.size();
  std::vector<SweepRow> rows(spec.values.size() * n_schemes);
  parallel_for(rows.size(), spec.threads, [&](std::size_t k) {
    rows[k] = detail::EvaluateSweepPoint(spec, spec.schemes[k % n_schemes],
                                         spec.values[k / n_schemes]);
  });
  return rows;
}

// n points from `from` to `to`; geometric when both ends are positive and
// `log_spaced` is set.
inline std::vector<double> grid_points(double from, double to, int n, bool log_spaced = false) {
  if (n < 1) throw DomainError("grid needs at least one point");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 1) return {from};
  if (log_spaced && from > 0.0 && to > 0.0) {
    const double a = std::log(from);
    const double b = std::log(to);
    for (int k = 0; k < n; ++k) out.push_back(std::exp(a + (b - a) * k / (n - 1)));
    out.front() = from;
    out.back() = to;
  } else {
    for (int k = 0; k < n; ++k) out.push_back(from + (to - from) * k / (n - 1));
  }
  return out;
}

}  // namespace fedamp
