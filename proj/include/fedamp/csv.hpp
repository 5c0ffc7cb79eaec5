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


// CSV emission with round-trip exact doubles, and the key=value config
// file format read by the command-line tool.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fedamp/error.hpp"
#include "fedamp/simulator.hpp"
#include "fedamp/sweep.hpp"

namespace fedamp {

// 17 significant digits; nan and inf spelled as such.
inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

// Quotes a field when it contains a comma, quote or newline.
inline std::string csv_escape(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(const std::vector<std::string>& names) {
    for (std::size_t i = 0; i < names.size(); ++i) {
      if (i) out_ << ',';
      out_ << names[i];
    }
    out_ << '\n';
  }

  CsvWriter& field(double x) { return raw(format_double(x)); }
  CsvWriter& field(std::int64_t x) { return raw(std::to_string(x)); }
  CsvWriter& field(std::string_view s) { return raw(csv_escape(s)); }
  CsvWriter& empty() { return raw(""); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  CsvWriter& raw(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
  }
  std::ostream& out_;
  bool first_ = true;
};

inline const std::vector<std::string>& curve_header() {
  static const std::vector<std::string> h = {"scheme", "p", "q", "d", "C", "sigma",
                                             "eps", "delta", "z_star", "error"};
  return h;
}

inline void write_curve_rows(std::ostream& out, const std::vector<SweepRow>& rows) {
  CsvWriter w(out);
  w.header(curve_header());
  for (const auto& r : rows) {
    w.field(scheme_name(r.scheme))
        .field(r.params.p)
        .field(r.params.q)
        .field(r.params.d)
        .field(r.params.C)
        .field(r.params.sigma)
        .field(r.eps)
        .field(r.delta);
    if (r.z_star) {
      w.field(*r.z_star);
    } else {
      w.empty();
    }
    w.field(r.error);
    w.end_row();
  }
}

inline const std::vector<std::string>& metrics_header() {
  static const std::vector<std::string> h = {"iteration", "loss",  "grad_norm",
                                             "participants", "sampled_elements", "sigma",
                                             "eps_round", "delta_round"};
  return h;
}

inline void write_metrics(std::ostream& out, const std::vector<MetricsRow>& rows) {
  CsvWriter w(out);
  w.header(metrics_header());
  for (const auto& r : rows) {
    w.field(r.iteration)
        .field(r.loss)
        .field(r.grad_norm)
        .field(r.participants)
        .field(r.sampled_elements)
        .field(r.sigma)
        .field(r.eps_round)
        .field(r.delta_round);
    w.end_row();
  }
}

// Lines of `key = value`; blank lines and `#` comments are skipped. Keys may
// be written with or without leading dashes. Repeated keys accumulate.
inline std::multimap<std::string, std::string> parse_config(std::istream& in) {
  std::multimap<std::string, std::string> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DomainError("config line " + std::to_string(number) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    if (key.empty()) throw DomainError("config line " + std::to_string(number) + ": empty key");
    out.emplace(key, trim(line.substr(eq + 1)));
  }
  return out;
}

inline std::multimap<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config file '" + path + "'");
  return parse_config(in);
}

}  // namespace fedamp
