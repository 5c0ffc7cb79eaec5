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

// Desk-scale DP-DSGD with random participation on synthetic linear and
// logistic regression.
//
// Each round: available clients join with probability p, participants keep
// each local element with probability q, per-sample gradients are clipped to
// C and summed, the coordinator adds N(0, sigma^2 I_m) and scales by
// 1 / (p N_t q d).
//
// Randomness is drawn from counter-keyed streams: one per (round, client)
// for sampling, one per round for noise, one per client for data. Adding an
// element to a client therefore leaves every other draw untouched, and the
// noise never depends on who was sampled.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fedamp/accountant.hpp"
#include "fedamp/error.hpp"
#include "fedamp/numerics.hpp"
#include "fedamp/params.hpp"

namespace fedamp {

// SplitMix64; small state, so one engine per (stream, round, client) is cheap.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;
  explicit SplitMix64(std::uint64_t state) : state_(state) {}
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

enum class Stream : std::uint64_t { kSampling = 1, kNoise = 2, kData = 3 };

inline SplitMix64 stream_engine(std::uint64_t seed, Stream stream, std::uint64_t a,
                                std::uint64_t b = 0) {
  SplitMix64 mix(seed ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
  std::uint64_t key = mix();
  key = SplitMix64(key ^ a)();
  key = SplitMix64(key ^ (b + 0x632BE59BD9B4E019ULL))();
  return SplitMix64(key);
}

enum class Task { kLinearRegression, kLogisticRegression };

inline Task parse_task(std::string_view name) {
  if (name == "linear_regression") return Task::kLinearRegression;
  if (name == "logistic_regression") return Task::kLogisticRegression;
  throw DomainError("unknown task '" + std::string(name) + "'");
}

struct SimConfig {
  std::int64_t N = 100;  // clients
  std::int64_t d = 30;   // samples per client
  double p = 0.1;
  double q = 0.1;
  double C = 1.0;
  double sigma = 1.0;
  std::int64_t T = 100;
  double eta = 0.1;
  bool eta_inverse_sqrt = false;  // eta_t = eta / sqrt(t) when set
  std::int64_t m = 10;            // model dimension
  double availability = 1.0;      // per-round availability of each client
  std::uint64_t seed = 0;
  // Client index holding d + 1 samples (neighbouring dataset), or -1.
  std::int64_t extra_element_client = -1;
  // Keep raw sums, noise and clipped-norm maxima in every RoundOutcome.
  bool instrumented = false;

  void validate() const {
    if (N < 1 || d < 1 || T < 1 || m < 1) throw DomainError("N, d, T, m must be >= 1");
    auto prob = [](double x, const char* what) {
      if (!std::isfinite(x) || !(x > 0.0) || x > 1.0) {
        throw DomainError(std::string(what) + " must lie in (0, 1]");
      }
    };
    prob(p, "p");
    prob(q, "q");
    prob(availability, "availability");
    detail::RequirePositive(C, "C");
    detail::RequirePositive(eta, "eta");
    if (!std::isfinite(sigma) || sigma < 0.0) throw DomainError("sigma must be >= 0");
    if (extra_element_client >= N) throw DomainError("extra_element_client out of range");
  }
};

struct Sample {
  std::vector<double> features;
  double label = 0.0;
};

struct ClientDataset {
  std::vector<Sample> samples;
};

struct SyntheticProblem {
  Task task = Task::kLinearRegression;
  std::vector<ClientDataset> clients;
  std::vector<double> planted;
};

struct ModelState {
  std::vector<double> weights;
  std::int64_t iteration = 0;
};

struct RoundOutcome {
  bool skipped = false;  // no client available (N_t = 0); no update applied
  std::vector<std::int64_t> participants;
  std::vector<std::vector<std::int64_t>> sampled_elements;  // per participant
  std::int64_t available_count = 0;
  std::vector<double> noisy_estimate;
  // Instrumented mode only.
  std::vector<double> raw_sum;
  std::vector<double> noise;
  double max_clipped_norm = 0.0;

  std::int64_t sampled_count() const {
    std::int64_t n = 0;
    for (const auto& s : sampled_elements) n += static_cast<std::int64_t>(s.size());
    return n;
  }
};

inline double l2_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// g / max(1, ||g|| / C).
inline std::vector<double> clip_gradient(std::span<const double> g, double C) {
  detail::RequirePositive(C, "C");
  for (double x : g) detail::RequireFinite(x, "gradient entry");
  std::vector<double> out(g.begin(), g.end());
  const double norm = l2_norm(g);
  if (norm > C) {
    const double scale = C / norm;
    for (double& x : out) x *= scale;
  }
  return out;
}

inline double sigmoid(double t) {
  return t >= 0.0 ? 1.0 / (1.0 + std::exp(-t)) : std::exp(t) / (1.0 + std::exp(t));
}

inline double sample_loss(Task task, std::span<const double> w, const Sample& s) {
  const double margin = std::inner_product(w.begin(), w.end(), s.features.begin(), 0.0);
  if (task == Task::kLinearRegression) {
    const double r = margin - s.label;
    return 0.5 * r * r;
  }
  // log(1 + e^m) - y m, computed stably.
  const double softplus = margin > 0.0 ? margin + std::log1p(std::exp(-margin))
                                       : std::log1p(std::exp(margin));
  return softplus - s.label * margin;
}

inline std::vector<double> sample_gradient(Task task, std::span<const double> w,
                                           const Sample& s) {
  const double margin = std::inner_product(w.begin(), w.end(), s.features.begin(), 0.0);
  const double scale =
      task == Task::kLinearRegression ? margin - s.label : sigmoid(margin) - s.label;
  std::vector<double> g(s.features.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = scale * s.features[j];
  return g;
}

// Features ~ N(0, I_m); planted w* ~ N(0, I_m / m) scaled by 2 for the
// logistic task; linear labels carry N(0, 0.1^2) noise, logistic labels are
// Bernoulli(sigmoid(<w*, x>)).
inline SyntheticProblem make_synthetic_problem(const SimConfig& config, Task task) {
  config.validate();
  SyntheticProblem problem;
  problem.task = task;
  SplitMix64 rng = stream_engine(config.seed, Stream::kData, 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double planted_scale = (task == Task::kLogisticRegression ? 2.0 : 1.0) /
                               std::sqrt(static_cast<double>(config.m));
  problem.planted.resize(static_cast<std::size_t>(config.m));
  for (double& w : problem.planted) w = planted_scale * normal(rng);
  problem.clients.resize(static_cast<std::size_t>(config.N));
  for (std::int64_t i = 0; i < config.N; ++i) {
    // One stream per client; the extra element is drawn last, so the
    // neighbouring dataset differs in that element only.
    rng = stream_engine(config.seed, Stream::kData, static_cast<std::uint64_t>(i) + 1);
    normal.reset();
    const std::int64_t size = config.d + (i == config.extra_element_client ? 1 : 0);
    auto& samples = problem.clients[static_cast<std::size_t>(i)].samples;
    samples.resize(static_cast<std::size_t>(size));
    for (auto& s : samples) {
      s.features.resize(static_cast<std::size_t>(config.m));
      for (double& x : s.features) x = normal(rng);
      const double margin = std::inner_product(problem.planted.begin(), problem.planted.end(),
                                               s.features.begin(), 0.0);
      if (task == Task::kLinearRegression) {
        s.label = margin + 0.1 * normal(rng);
      } else {
        s.label = rng.uniform() < sigmoid(margin) ? 1.0 : 0.0;
      }
    }
  }
  return problem;
}

// Mean loss over all samples, (1/N) sum_i (1/|D_i|) sum_s loss.
inline double training_loss(const SyntheticProblem& problem, std::span<const double> w) {
  CompensatedSum total;
  for (const auto& client : problem.clients) {
    CompensatedSum local;
    for (const auto& s : client.samples) local.add(sample_loss(problem.task, w, s));
    total.add(local.value() / static_cast<double>(client.samples.size()));
  }
  return total.value() / static_cast<double>(problem.clients.size());
}

// Mean of clipped per-sample gradients over every sample: the quantity the
// noisy estimate is unbiased for.
inline std::vector<double> full_clipped_gradient(const SyntheticProblem& problem,
                                                 std::span<const double> w, double C) {
  std::vector<double> sum(w.size(), 0.0);
  std::size_t count = 0;
  for (const auto& client : problem.clients) {
    for (const auto& s : client.samples) {
      const auto g = clip_gradient(sample_gradient(problem.task, w, s), C);
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[j];
      ++count;
    }
  }
  for (double& x : sum) x /= static_cast<double>(count);
  return sum;
}

// One round of the protocol at fixed weights; no update is applied.
inline RoundOutcome estimate_gradient(const ModelState& state, const SimConfig& config,
                                      const SyntheticProblem& problem, std::int64_t round) {
  const std::size_t m = static_cast<std::size_t>(config.m);
  RoundOutcome out;
  std::vector<double> sum(m, 0.0);
  for (std::int64_t i = 0; i < config.N; ++i) {
    SplitMix64 rng = stream_engine(config.seed, Stream::kSampling,
                                   static_cast<std::uint64_t>(round),
                                   static_cast<std::uint64_t>(i));
    // Fixed draw order: availability, participation, then one per element.
    const bool available = rng.uniform() < config.availability;
    const bool joins = rng.uniform() < config.p;
    if (!available) continue;
    ++out.available_count;
    if (!joins) continue;
    const auto& samples = problem.clients[static_cast<std::size_t>(i)].samples;
    std::vector<std::int64_t> picked;
    std::vector<double> client_sum(m, 0.0);
    for (std::size_t k = 0; k < samples.size(); ++k) {
      if (!(rng.uniform() < config.q)) continue;
      picked.push_back(static_cast<std::int64_t>(k));
      const auto g =
          clip_gradient(sample_gradient(problem.task, state.weights, samples[k]), config.C);
      if (config.instrumented) {
        out.max_clipped_norm = std::max(out.max_clipped_norm, l2_norm(g));
      }
      for (std::size_t j = 0; j < m; ++j) client_sum[j] += g[j];
    }
    for (std::size_t j = 0; j < m; ++j) sum[j] += client_sum[j];
    out.participants.push_back(i);
    out.sampled_elements.push_back(std::move(picked));
  }
  if (out.available_count == 0) {
    out.skipped = true;
    return out;
  }
  SplitMix64 noise_rng = stream_engine(config.seed, Stream::kNoise,
                                       static_cast<std::uint64_t>(round));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> noise(m);
  for (double& z : noise) z = config.sigma * normal(noise_rng);
  const double scale = 1.0 / (config.p * static_cast<double>(out.available_count) * config.q *
                              static_cast<double>(config.d));
  out.noisy_estimate.resize(m);
  for (std::size_t j = 0; j < m; ++j) out.noisy_estimate[j] = scale * (sum[j] + noise[j]);
  if (config.instrumented) {
    out.raw_sum = std::move(sum);
    out.noise = std::move(noise);
  }
  return out;
}

inline double learning_rate(const SimConfig& config, std::int64_t iteration) {
  if (!config.eta_inverse_sqrt) return config.eta;
  return config.eta / std::sqrt(static_cast<double>(iteration + 1));
}

// w <- w - eta_t g_hat. A skipped round still counts against T.
inline RoundOutcome run_round(ModelState& state, const SimConfig& config,
                              const SyntheticProblem& problem) {
  RoundOutcome out = estimate_gradient(state, config, problem, state.iteration);
  if (!out.skipped) {
    const double eta = learning_rate(config, state.iteration);
    for (std::size_t j = 0; j < state.weights.size(); ++j) {
      state.weights[j] -= eta * out.noisy_estimate[j];
    }
  }
  ++state.iteration;
  return out;
}

struct TrainingOptions {
  Task task = Task::kLinearRegression;
  // Scheme used to calibrate sigma (when calibrate is set) and to certify
  // the per-round delta.
  Scheme scheme = Scheme::kMain;
  double eps_round = 0.015;
  double delta_round = 1e-6;
  // Replace config.sigma by calibrate_sigma(scheme, ..., eps_round, delta_round).
  bool calibrate = false;
};

struct MetricsRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  std::int64_t participants = 0;
  std::int64_t sampled_elements = 0;
  double sigma = 0.0;
  double eps_round = 0.0;
  double delta_round = 0.0;
};

struct TrainingResult {
  std::vector<MetricsRow> rows;
  ModelState final_state;
  double sigma = 0.0;
  double certified_delta = 0.0;
};

inline SamplingParams accounting_params(const SimConfig& config) {
  return {config.p, config.q, config.d, config.C, config.sigma};
}

// Per-round delta certified at eps_round for the configured noise; sigma = 0
// certifies nothing (delta = 1).
inline double certify_delta(const SimConfig& config, Scheme scheme, double eps_round) {
  if (config.sigma <= 0.0) return 1.0;
  return delta_for(scheme, accounting_params(config), eps_round).delta;
}

inline TrainingResult run_training(SimConfig config, const TrainingOptions& options) {
  config.validate();
  if (options.calibrate) {
    config.sigma = calibrate_sigma(options.scheme, accounting_params(config), options.eps_round,
                                   options.delta_round);
  }
  const SyntheticProblem problem = make_synthetic_problem(config, options.task);
  TrainingResult result;
  result.sigma = config.sigma;
  result.certified_delta = certify_delta(config, options.scheme, options.eps_round);
  ModelState state{std::vector<double>(static_cast<std::size_t>(config.m), 0.0), 0};
  result.rows.reserve(static_cast<std::size_t>(config.T));
  for (std::int64_t t = 0; t < config.T; ++t) {
    const RoundOutcome outcome = run_round(state, config, problem);
    MetricsRow row;
    row.iteration = t + 1;
    row.loss = training_loss(problem, state.weights);
    if (!std::isfinite(row.loss)) {
      throw DivergenceError("run_training: loss became non-finite at iteration " +
                            std::to_string(t + 1));
    }
    row.grad_norm = outcome.skipped ? 0.0 : l2_norm(outcome.noisy_estimate);
    row.participants = static_cast<std::int64_t>(outcome.participants.size());
    row.sampled_elements = outcome.sampled_count();
    row.sigma = config.sigma;
    row.eps_round = options.eps_round;
    row.delta_round = result.certified_delta;
    result.rows.push_back(row);
  }
  result.final_state = std::move(state);
  return result;
}

}  // namespace fedamp
