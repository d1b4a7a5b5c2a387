// Copyright 2026 The mubqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mubqkd/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <sstream>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"
#include "mubqkd/rng.hpp"

namespace mubqkd {

void SourceParams::validate() const {
  if (!(alpha_sq >= 0.0) || !(chi >= 0.0) || !(pulses >= 0.0) || !std::isfinite(alpha_sq) || !std::isfinite(chi) ||
      !std::isfinite(pulses)) {
    throw ConfigError(fmt::format("source parameters must be finite and nonnegative (alpha_sq={}, chi={}, N={})",
                                  alpha_sq, chi, pulses));
  }
  if (!(pair_probability() < kFirstOrderLimit)) {
    throw ConfigError(fmt::format("alpha_sq * chi = {} leaves the first-order regime (< {})", pair_probability(),
                                  kFirstOrderLimit));
  }
}

RoutingProbs pair_routing_probs() {
  // Four equal-amplitude terms after the beam splitter: two cross terms put
  // one photon in each arm.
  constexpr double term = 0.25;
  return {2 * term, term, term};
}

double click_prob_n(double eta1, int n) {
  if (!(eta1 >= 0.0 && eta1 <= 1.0)) throw RangeError(fmt::format("efficiency {} outside [0, 1]", eta1));
  if (n < 0) throw RangeError(fmt::format("photon number {} is negative", n));
  return 1.0 - std::pow(1.0 - eta1, n);
}

namespace {

void require_nonnegative(const SourceParams& p) {
  if (!(p.alpha_sq >= 0.0 && p.chi >= 0.0 && p.pulses >= 0.0)) {
    throw RangeError("source parameters must be nonnegative");
  }
}

void require_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw RangeError(fmt::format("efficiency {} outside [0, 1]", eta));
}

}  // namespace

double expected_singles(const SourceParams& p, double eta1) {
  require_nonnegative(p);
  require_efficiency(eta1);
  return p.pulses * eta1 * p.pair_probability() / 2.0;
}

double expected_coincidences(const SourceParams& p, double eta_a, double eta_b) {
  require_nonnegative(p);
  require_efficiency(eta_a);
  require_efficiency(eta_b);
  return p.pulses * eta_a * eta_b * p.pair_probability() / 4.0;
}

// ----------------------------------------------------------------------------

EfficiencyTable::EfficiencyTable(int d, double fill) : d_(d) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
  require_efficiency(fill);
  for (auto& v : eta_) v.assign(num_settings(d), fill);
}

EfficiencyTable EfficiencyTable::uniform(int d, double eta_a, double eta_b) {
  EfficiencyTable t(d);
  require_efficiency(eta_a);
  require_efficiency(eta_b);
  std::fill(t.eta_[0].begin(), t.eta_[0].end(), eta_a);
  std::fill(t.eta_[1].begin(), t.eta_[1].end(), eta_b);
  return t;
}

void EfficiencyTable::set(Arm arm, const Setting& s, double eta) {
  require_efficiency(eta);
  if (s.basis < 0 || s.basis > d_ || s.element < 0 || s.element >= d_) {
    throw RangeError(fmt::format("setting ({}, {}) out of range for d = {}", s.basis, s.element, d_));
  }
  eta_[static_cast<int>(arm)][setting_index(d_, s)] = eta;
}

// ----------------------------------------------------------------------------

std::string describe(const CountRecord& r) {
  return fmt::format("record (basis_a={}, elem_a={}, basis_b={}, elem_b={})", r.setting_a.basis, r.setting_a.element,
                     r.setting_b.basis, r.setting_b.element);
}

void CountRecord::validate() const {
  for (double c : {singles_a, singles_b, coincidences}) {
    if (!std::isfinite(c) || c < 0.0) {
      throw CountsError(fmt::format("{}: counts must be finite and nonnegative", describe(*this)));
    }
  }
  if (coincidences > std::min(singles_a, singles_b)) {
    throw CountsError(fmt::format("{}: coincidences {} exceed singles ({}, {})", describe(*this), coincidences,
                                  singles_a, singles_b));
  }
}

Pairing identity_pairing() {
  return [](const Setting& s) { return s; };
}

EfficiencyTable estimate_efficiency(std::span<const CountRecord> records, int d, const Pairing& pairing) {
  const int n = num_settings(d);
  std::vector<std::optional<double>> eta_a(n);
  std::vector<std::optional<double>> eta_b(n);

  for (const auto& r : records) {
    if (pairing(r.setting_a) != r.setting_b) continue;
    r.validate();
    if (r.setting_a.basis < 0 || r.setting_a.basis > d || r.setting_b.basis < 0 || r.setting_b.basis > d ||
        r.setting_a.element < 0 || r.setting_a.element >= d || r.setting_b.element < 0 || r.setting_b.element >= d) {
      throw CountsError(fmt::format("{}: setting out of range for d = {}", describe(r), d));
    }
    if (r.singles_a <= 0.0 || r.singles_b <= 0.0) {
      throw DivisionError(fmt::format("{}: zero singles count, efficiency undefined", describe(r)));
    }
    const double eb = 2.0 * r.coincidences / r.singles_a;
    const double ea = 2.0 * r.coincidences / r.singles_b;
    if (ea > 1.0 || eb > 1.0) {
      throw InconsistentCountsError(
          fmt::format("{}: estimated efficiency above one (eta_A={}, eta_B={})", describe(r), ea, eb));
    }
    auto& slot_a = eta_a[setting_index(d, r.setting_a)];
    auto& slot_b = eta_b[setting_index(d, r.setting_b)];
    if (slot_a || slot_b) throw CountsError(fmt::format("{}: setting already has a partner record", describe(r)));
    slot_a = ea;
    slot_b = eb;
  }

  EfficiencyTable out(d);
  for (int i = 0; i < n; ++i) {
    const Setting s = setting_at(d, i);
    if (!eta_a[i] || !eta_b[i]) {
      throw CountsError(fmt::format("no partner record covers setting (basis {}, element {}) in arm {}", s.basis,
                                    s.element, eta_a[i] ? 'B' : 'A'));
    }
    out.set(Arm::A, s, *eta_a[i]);
    out.set(Arm::B, s, *eta_b[i]);
  }
  return out;
}

double UniformityReport::max_spread() const {
  double m = 0.0;
  for (const auto& arm : spread) {
    for (double s : arm) m = std::max(m, s);
  }
  return m;
}

UniformityReport efficiency_uniformity(const EfficiencyTable& t) {
  const int d = t.dim();
  UniformityReport report;
  report.dim = d;
  for (Arm arm : {Arm::A, Arm::B}) {
    auto& out = report.spread[static_cast<int>(arm)];
    for (int beta = 0; beta <= d; ++beta) {
      double lo = 1.0, hi = 0.0, sum = 0.0;
      for (int k = 0; k < d; ++k) {
        const double e = t.at(arm, {beta, k});
        lo = std::min(lo, e);
        hi = std::max(hi, e);
        sum += e;
      }
      const double mean = sum / d;
      out.push_back(mean > 0.0 ? (hi - lo) / mean : 0.0);
    }
  }
  return report;
}

std::vector<CountRecord> synthesize_counts(const SourceParams& p, const EfficiencyTable& t, Synthesis mode,
                                           std::uint64_t seed, const Pairing& pairing) {
  const int d = t.dim();
  std::vector<CountRecord> out;
  out.reserve(num_settings(d));
  for (int i = 0; i < num_settings(d); ++i) {
    const Setting sa = setting_at(d, i);
    const Setting sb = pairing(sa);
    const double ea = t.at(Arm::A, sa);
    const double eb = t.at(Arm::B, sb);
    const double mean_a = expected_singles(p, ea);
    const double mean_b = expected_singles(p, eb);
    const double mean_c = expected_coincidences(p, ea, eb);

    CountRecord r{sa, sb, mean_a, mean_b, mean_c};
    if (mode == Synthesis::kPoisson) {
      RoundStream rng(seed, static_cast<std::uint64_t>(i));
      auto poisson = [&rng](double mean) {
        if (mean <= 0.0) return 0.0;
        std::poisson_distribution<long long> dist(mean);
        return static_cast<double>(dist(rng));
      };
      const double c = poisson(mean_c);
      r.coincidences = c;
      r.singles_a = c + poisson(std::max(0.0, mean_a - mean_c));
      r.singles_b = c + poisson(std::max(0.0, mean_b - mean_c));
    }
    out.push_back(r);
  }
  return out;
}

// ----------------------------------------------------------------------------

std::string format_efficiency_table(const EfficiencyTable& t) {
  const int d = t.dim();
  std::string out = "# basis_vector eta_A eta_B\n";
  for (int i = 0; i < num_settings(d); ++i) {
    const Setting s = setting_at(d, i);
    out += fmt::format("{} {:.5f} {:.5f}\n", i + 1, t.at(Arm::A, s), t.at(Arm::B, s));
  }
  return out;
}

EfficiencyTable parse_efficiency_table(const std::string& text, const std::string& source) {
  struct Row {
    int index;
    double a;
    double b;
  };
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream ss{std::string(t)};
    std::string idx, a, b, extra;
    Row row{};
    if (!(ss >> idx >> a >> b) || (ss >> extra)) throw ParseError(source, line_no, "expected 'index eta_A eta_B'");
    double idx_value = 0.0;
    if (!parse_double(idx, idx_value) || idx_value != std::floor(idx_value) || idx_value < 1) {
      throw ParseError(source, line_no, fmt::format("bad basis vector index '{}'", idx));
    }
    row.index = static_cast<int>(idx_value);
    if (!parse_double(a, row.a) || !parse_double(b, row.b)) {
      throw ParseError(source, line_no, "efficiency values must be numbers");
    }
    if (!(row.a >= 0.0 && row.a <= 1.0 && row.b >= 0.0 && row.b <= 1.0)) {
      throw ParseError(source, line_no, "efficiency values must lie in [0, 1]");
    }
    rows.push_back(row);
  }
  int d = 2;
  while (num_settings(d) < static_cast<int>(rows.size())) ++d;
  if (num_settings(d) != static_cast<int>(rows.size())) {
    throw ParseError(source, line_no, fmt::format("{} rows is not d(d+1) for any dimension d", rows.size()));
  }
  EfficiencyTable table(d);
  std::vector<bool> seen(rows.size(), false);
  for (const auto& row : rows) {
    if (row.index > static_cast<int>(rows.size()) || seen[row.index - 1]) {
      throw ParseError(source, line_no, fmt::format("basis vector index {} is out of range or repeated", row.index));
    }
    seen[row.index - 1] = true;
    const Setting s = setting_at(d, row.index - 1);
    table.set(Arm::A, s, row.a);
    table.set(Arm::B, s, row.b);
  }
  return table;
}

EfficiencyTable read_efficiency_table(const std::filesystem::path& path) {
  return parse_efficiency_table(read_file(path), path.string());
}

void write_efficiency_table(const EfficiencyTable& t, const std::filesystem::path& path) {
  write_file_atomic(path, format_efficiency_table(t));
}

}  // namespace mubqkd
