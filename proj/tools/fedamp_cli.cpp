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


// fedamp_cli: privacy curves, sigma calibration, accountant verification and
// DP-DSGD simulation, all emitting CSV.
//
// Exit codes: 0 success, 2 usage, 3 calibration infeasible, 4 verification
// failure, 5 simulation divergence.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fedamp/accountant.hpp"
#include "fedamp/csv.hpp"
#include "fedamp/simulator.hpp"
#include "fedamp/sweep.hpp"
#include "fedamp/verify.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitVerifyFailed = 4;
constexpr int kExitDiverged = 5;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Appends `--key value` for every config entry whose flag is absent from
// the command line, so explicit flags take precedence over the file.
std::vector<std::string> MergeConfig(std::vector<std::string> args) {
  std::string path;
  std::set<std::string> present;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    if (a.rfind("--", 0) != 0) continue;
    const std::string key = a.substr(2, a.find('=') - 2);
    present.insert(key);
    if (key == "config") {
      if (a.find('=') != std::string::npos) {
        path = a.substr(a.find('=') + 1);
      } else if (i + 1 < args.size()) {
        path = args[i + 1];
      }
    }
  }
  if (path.empty()) return args;
  for (const auto& [key, value] : fedamp::read_config_file(path)) {
    if (present.count(key)) continue;
    args.push_back("--" + key);
    if (!value.empty()) args.push_back(value);
  }
  return args;
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw UsageError("cannot open output file '" + path + "'");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::vector<fedamp::Scheme> ParseSchemes(const std::vector<std::string>& names) {
  std::vector<fedamp::Scheme> out;
  for (const auto& n : names) out.push_back(fedamp::parse_scheme(n));
  return out;
}

struct CurveArgs {
  std::vector<std::string> schemes;
  std::string sweep;
  double from = 0.0;
  double to = 0.0;
  int points = 0;
  bool log_spaced = false;
  double p = 1.0;
  double q = 1.0;
  std::int64_t d = 0;
  double C = 1.0;
  std::optional<double> sigma;
  std::optional<double> eps;
  std::optional<double> delta;
  double pq = 0.0;
  unsigned threads = 0;
  std::string out;
};

int RunCurve(const CurveArgs& a) {
  fedamp::SweepSpec spec;
  spec.schemes = ParseSchemes(a.schemes);
  spec.variable = fedamp::parse_sweep_variable(a.sweep);
  if (!a.sigma && spec.variable != fedamp::SweepVariable::kSigma) {
    throw UsageError("--sigma is required unless sweeping sigma");
  }
  if (spec.variable == fedamp::SweepVariable::kQWithPqFixed && a.pq <= 0.0) {
    throw UsageError("--sweep q-fixed-pq needs --pq");
  }
  spec.values = fedamp::grid_points(a.from, a.to, a.points, a.log_spaced);
  spec.base = {a.p, a.q, a.d, a.C, a.sigma.value_or(1.0)};
  spec.eps = a.eps;
  spec.delta = a.delta;
  spec.pq = a.pq;
  spec.threads = a.threads;
  std::vector<fedamp::SweepRow> rows;
  try {
    rows = fedamp::sweep(spec);
  } catch (const fedamp::DomainError& e) {
    throw UsageError(e.what());
  }
  Output out(a.out);
  fedamp::write_curve_rows(out.stream(), rows);
  std::size_t failed = 0;
  for (const auto& r : rows) failed += !r.error.empty();
  if (failed) std::cerr << "warning: " << failed << " grid point(s) failed\n";
  return 0;
}

struct CalibrateArgs {
  std::string scheme;
  double p = 1.0;
  double q = 1.0;
  std::int64_t d = 0;
  double C = 1.0;
  double eps = 0.0;
  double delta = 0.0;
  double sigma_lo = 1e-3;
  double sigma_hi = 1e4;
  std::string out;
};

int RunCalibrate(const CalibrateArgs& a) {
  const fedamp::Scheme scheme = fedamp::parse_scheme(a.scheme);
  const fedamp::SamplingParams params{a.p, a.q, a.d, a.C, 1.0};
  double sigma = 0.0;
  try {
    sigma = fedamp::calibrate_sigma(scheme, params, a.eps, a.delta,
                                    {a.sigma_lo, a.sigma_hi, 1e-6});
  } catch (const fedamp::CalibrationError& e) {
    std::cerr << "calibration infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  }
  Output out(a.out);
  fedamp::CsvWriter w(out.stream());
  w.header({"scheme", "p", "q", "d", "C", "eps", "delta", "sigma"});
  w.field(fedamp::scheme_name(scheme)).field(a.p).field(a.q).field(a.d).field(a.C);
  w.field(a.eps).field(a.delta).field(sigma);
  w.end_row();
  return 0;
}

struct VerifyArgs {
  std::vector<double> p;
  std::vector<double> q;
  std::vector<std::int64_t> d;
  std::vector<double> sigma;
  std::vector<double> eps;
  double C = 1.0;
  bool ajc = false;
  int ajc_cases = 50;
  std::uint64_t seed = 2024;
  unsigned threads = 0;
  std::string out;
};

int RunVerify(const VerifyArgs& a) {
  Output out(a.out);
  fedamp::CsvWriter w(out.stream());
  if (a.ajc) {
    const auto checks = fedamp::ajc_spot_check(a.ajc_cases, a.seed);
    w.header({"case", "lhs", "rhs", "abs_diff", "status"});
    double worst = 0.0;
    bool ok = true;
    for (std::size_t i = 0; i < checks.size(); ++i) {
      const bool pass = checks[i].abs_diff <= fedamp::kSoundnessSlack;
      ok = ok && pass;
      worst = std::max(worst, checks[i].abs_diff);
      w.field(static_cast<std::int64_t>(i)).field(checks[i].lhs).field(checks[i].rhs);
      w.field(checks[i].abs_diff).field(pass ? "ok" : "FAIL");
      w.end_row();
    }
    std::cerr << "ajc cases=" << checks.size() << " max_abs_diff=" << fedamp::format_double(worst)
              << (ok ? " PASS" : " FAIL") << '\n';
    return ok ? 0 : kExitVerifyFailed;
  }
  fedamp::VerifyGrid grid = fedamp::default_verify_grid();
  if (!a.p.empty()) grid.p = a.p;
  if (!a.q.empty()) grid.q = a.q;
  if (!a.d.empty()) grid.d = a.d;
  if (!a.sigma.empty()) grid.sigma = a.sigma;
  if (!a.eps.empty()) grid.eps = a.eps;
  grid.C = a.C;
  const auto rows = fedamp::verify_grid(grid, a.threads);
  w.header({"p", "q", "d", "C", "sigma", "eps", "delta_closed_form", "delta_quadrature",
            "abs_diff", "single_crossing_ok", "delta_lb", "delta_ub", "delta_ols",
            "ordering_ok", "delta_pair", "soundness_ok", "status", "error"});
  double worst = 0.0;
  std::size_t failed = 0;
  auto flag = [](bool b) -> std::string_view { return b ? "true" : "false"; };
  for (const auto& r : rows) {
    worst = std::max(worst, r.abs_diff);
    failed += !r.all_ok();
    w.field(r.params.p).field(r.params.q).field(r.params.d).field(r.params.C);
    w.field(r.params.sigma).field(r.eps).field(r.delta_closed_form).field(r.delta_quadrature);
    w.field(r.abs_diff).field(flag(r.single_crossing_ok)).field(r.delta_lb).field(r.delta_ub);
    w.field(r.delta_ols).field(flag(r.ordering_ok)).field(r.delta_pair);
    w.field(flag(r.soundness_ok)).field(r.all_ok() ? "ok" : "FAIL").field(r.error);
    w.end_row();
  }
  std::cerr << "points=" << rows.size() << " failed=" << failed
            << " max_abs_diff=" << fedamp::format_double(worst) << '\n';
  return failed ? kExitVerifyFailed : 0;
}

struct SimulateArgs {
  std::string task = "linear_regression";
  fedamp::SimConfig config;
  std::optional<double> sigma;
  std::optional<double> eps;
  std::optional<double> delta;
  std::string scheme = "main";
  std::string out;
};

int RunSimulate(SimulateArgs a) {
  fedamp::TrainingOptions options;
  options.task = fedamp::parse_task(a.task);
  options.scheme = fedamp::parse_scheme(a.scheme);
  if (a.sigma) {
    if (a.delta) throw UsageError("give either --sigma or --eps/--delta, not both");
    a.config.sigma = *a.sigma;
    options.eps_round = a.eps.value_or(options.eps_round);
  } else {
    if (!a.eps || !a.delta) throw UsageError("need --sigma, or both --eps and --delta");
    options.eps_round = *a.eps;
    options.delta_round = *a.delta;
    options.calibrate = true;
  }
  fedamp::TrainingResult result;
  try {
    result = fedamp::run_training(a.config, options);
  } catch (const fedamp::CalibrationError& e) {
    std::cerr << "calibration infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const fedamp::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return kExitDiverged;
  }
  Output out(a.out);
  fedamp::write_metrics(out.stream(), result.rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy accounting and DP-DSGD simulation for random client participation"};
  app.require_subcommand(1);
  std::string config_path;

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "privacy curve over a parameter sweep");
  c->add_option("--scheme", curve.schemes, "main|ols|ub|lb|gaussian (repeatable)")->required();
  c->add_option("--sweep", curve.sweep, "sigma|eps|delta|q-fixed-pq|d")->required();
  c->add_option("--from", curve.from)->required();
  c->add_option("--to", curve.to)->required();
  c->add_option("--points", curve.points)->required();
  c->add_flag("--log", curve.log_spaced, "geometric grid spacing");
  c->add_option("--p", curve.p);
  c->add_option("--q", curve.q);
  c->add_option("--d", curve.d);
  c->add_option("--C", curve.C);
  c->add_option("--sigma", curve.sigma);
  c->add_option("--eps", curve.eps);
  c->add_option("--delta", curve.delta);
  c->add_option("--pq", curve.pq, "p*q held fixed for q-fixed-pq");
  c->add_option("--threads", curve.threads);
  c->add_option("--out", curve.out, "output file (default stdout)");
  c->add_option("--config", config_path, "key = value file; flags win");

  CalibrateArgs cal;
  auto* k = app.add_subcommand("calibrate", "smallest sigma meeting (eps, delta)");
  k->add_option("--scheme", cal.scheme)->required();
  k->add_option("--p", cal.p)->required();
  k->add_option("--q", cal.q)->required();
  k->add_option("--d", cal.d)->required();
  k->add_option("--C", cal.C)->required();
  k->add_option("--eps", cal.eps)->required();
  k->add_option("--delta", cal.delta)->required();
  k->add_option("--sigma-lo", cal.sigma_lo);
  k->add_option("--sigma-hi", cal.sigma_hi);
  k->add_option("--out", cal.out);
  k->add_option("--config", config_path);

  VerifyArgs ver;
  auto* v = app.add_subcommand("verify", "cross-check the accountant on a grid");
  v->add_option("--p", ver.p)->delimiter(',');
  v->add_option("--q", ver.q)->delimiter(',');
  v->add_option("--d", ver.d)->delimiter(',');
  v->add_option("--sigma", ver.sigma)->delimiter(',');
  v->add_option("--eps", ver.eps)->delimiter(',');
  v->add_option("--C", ver.C);
  v->add_flag("--ajc", ver.ajc, "spot-check advanced joint convexity instead");
  v->add_option("--ajc-cases", ver.ajc_cases);
  v->add_option("--seed", ver.seed);
  v->add_option("--threads", ver.threads);
  v->add_option("--out", ver.out);
  v->add_option("--config", config_path);

  SimulateArgs sim;
  auto* s = app.add_subcommand("simulate", "run DP-DSGD on a synthetic task");
  s->add_option("--task", sim.task, "linear_regression|logistic_regression");
  s->add_option("--N", sim.config.N);
  s->add_option("--d", sim.config.d);
  s->add_option("--p", sim.config.p);
  s->add_option("--q", sim.config.q);
  s->add_option("--C", sim.config.C);
  s->add_option("--T", sim.config.T);
  s->add_option("--eta", sim.config.eta);
  s->add_flag("--eta-decay", sim.config.eta_inverse_sqrt, "eta_t = eta / sqrt(t)");
  s->add_option("--m", sim.config.m);
  s->add_option("--availability", sim.config.availability);
  s->add_option("--seed", sim.config.seed);
  s->add_option("--sigma", sim.sigma);
  s->add_option("--eps", sim.eps);
  s->add_option("--delta", sim.delta);
  s->add_option("--scheme", sim.scheme, "accounting scheme for calibration");
  s->add_option("--out", sim.out);
  s->add_option("--config", config_path);

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = MergeConfig(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), kExitUsage);
  } catch (const fedamp::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*c) return RunCurve(curve);
    if (*k) return RunCalibrate(cal);
    if (*v) return RunVerify(ver);
    if (*s) return RunSimulate(sim);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const fedamp::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitUsage;
}
