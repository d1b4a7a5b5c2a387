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

// First-order model of a down-conversion source behind a 50:50 beam splitter
// and threshold detectors, and estimation of single-photon detection
// efficiencies from singles and coincidence counts.
//
// A pump event creates a pair with probability |alpha|^2 chi. The pair
// leaves the beam splitter split across the arms (AB) with probability 1/2,
// or with both photons in arm A or both in arm B with 1/4 each. Expected
// counts over N pump events for a conjugate-correlated filter pair are
//
//   singles      N eta |alpha|^2 chi / 2
//   coincidences N eta_A eta_B |alpha|^2 chi / 4
//
// so eta_B = 2 C / S_A and eta_A = 2 C / S_B.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mubqkd/mub.hpp"

namespace mubqkd {

struct SourceParams {
  double alpha_sq = 1.0;  // mean pump amplitude squared
  double chi = 0.01;      // pair-creation probability for the encoded subspace
  double pulses = 1.0;    // N, pump events in the measurement period

  double pair_probability() const { return alpha_sq * chi; }

  /// Enforces nonnegative parameters and the first-order regime
  /// alpha_sq * chi < 0.1.
  void validate() const;
};

inline constexpr double kFirstOrderLimit = 0.1;

struct RoutingProbs {
  double ab = 0.0;  // one photon in each arm
  double aa = 0.0;  // both photons in arm A
  double bb = 0.0;  // both photons in arm B
};

RoutingProbs pair_routing_probs();

/// Click probability of a threshold detector hit by n photons:
/// 1 - (1 - eta1)^n.
double click_prob_n(double eta1, int n);

/// N eta1 alpha_sq chi / 2. Only nonnegativity is checked here; the
/// first-order regime is a property of SourceParams::validate.
double expected_singles(const SourceParams& p, double eta1);

/// N eta_a eta_b alpha_sq chi / 4.
double expected_coincidences(const SourceParams& p, double eta_a, double eta_b);

enum class Arm { A = 0, B = 1 };

/// Single-photon detection efficiency per (arm, basis, element).
class EfficiencyTable {
 public:
  explicit EfficiencyTable(int d, double fill = 1.0);
  static EfficiencyTable uniform(int d, double eta_a, double eta_b);

  int dim() const { return d_; }
  double at(Arm arm, const Setting& s) const { return eta_[static_cast<int>(arm)][setting_index(d_, s)]; }
  /// Throws RangeError unless 0 <= eta <= 1.
  void set(Arm arm, const Setting& s, double eta);

  bool operator==(const EfficiencyTable&) const = default;

 private:
  int d_;
  std::array<std::vector<double>, 2> eta_;
};

/// Singles and coincidences for one (Alice setting, Bob setting) pair. Counts
/// from data are nonnegative integers; exact-expectation synthesis and
/// probability tables store non-integral values in the same fields.
struct CountRecord {
  Setting setting_a;
  Setting setting_b;
  double singles_a = 0.0;
  double singles_b = 0.0;
  double coincidences = 0.0;

  /// Nonnegative finite values with coincidences <= min(singles).
  void validate() const;
  bool operator==(const CountRecord&) const = default;
};

std::string describe(const CountRecord& r);

/// Maps an Alice setting to the Bob setting whose detections are correlated
/// with it. Under the conjugated-filter convention this is the same setting.
using Pairing = std::function<Setting(const Setting&)>;
Pairing identity_pairing();

/// Estimates every table entry from the records whose settings form a
/// conjugate pair under `pairing`; other records are ignored.
///
/// Throws DivisionError on zero singles, InconsistentCountsError if an
/// estimate exceeds one, CountsError if a setting has no partner record or
/// more than one.
EfficiencyTable estimate_efficiency(std::span<const CountRecord> records, int d,
                                    const Pairing& pairing = identity_pairing());

/// Relative spread (max - min) / mean of the efficiencies within each
/// (arm, basis).
struct UniformityReport {
  int dim = 0;
  std::array<std::vector<double>, 2> spread;

  double at(Arm arm, int basis) const { return spread[static_cast<int>(arm)][basis]; }
  double max_spread() const;
};

UniformityReport efficiency_uniformity(const EfficiencyTable& t);

enum class Synthesis { kExpectation, kPoisson };

/// Partner-pair count records generated from the model. kExpectation writes
/// the expected values verbatim; kPoisson samples coincidences and the
/// non-coincident remainder of each singles count independently, so
/// coincidences never exceed singles.
std::vector<CountRecord> synthesize_counts(const SourceParams& p, const EfficiencyTable& t, Synthesis mode,
                                           std::uint64_t seed = 0, const Pairing& pairing = identity_pairing());

/// Table text: one row per basis vector, "index eta_A eta_B" with the
/// 1-based index basis * d + element + 1 and 5 decimal places.
std::string format_efficiency_table(const EfficiencyTable& t);
EfficiencyTable parse_efficiency_table(const std::string& text, const std::string& source = "<input>");
EfficiencyTable read_efficiency_table(const std::filesystem::path& path);
void write_efficiency_table(const EfficiencyTable& t, const std::filesystem::path& path);

}  // namespace mubqkd
