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

// Monte Carlo execution of the filter-measurement MUB protocol.
//
// Each round both parties pick a filter setting: the basis from the bias
// vector, the element uniformly. In entanglement-based (EB) mode a pump
// event creates a pair with probability alpha_sq * chi, the beam splitter
// routes it, and filters and detectors act on the isotropic two-qudit
// state. In prepare-and-measure (PM) mode Alice prepares her listed vector
// and Bob's filter passes it with the squared overlap. A coincidence is the
// conclusive event; sifting keeps conclusive rounds with equal bases.
//
// Round r draws all of its randomness from RoundStream(seed, r), so a
// session is bit-identical for any number of workers.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mubqkd/counts.hpp"
#include "mubqkd/mub.hpp"
#include "mubqkd/photonics.hpp"
#include "mubqkd/rng.hpp"

namespace mubqkd {

enum class Mode { kEntanglement, kPrepareMeasure };

inline constexpr double kDefaultBiasEpsilon = 0.1;
inline constexpr double kDefaultSampleFraction = 0.1;
inline constexpr double kBiasSumTolerance = 1e-12;

/// (1 - eps, eps/d, ..., eps/d): basis 0 favoured.
std::vector<double> default_basis_bias(int d, double epsilon = kDefaultBiasEpsilon);
std::vector<double> uniform_basis_bias(int d);

struct ProtocolConfig {
  int dim = 2;
  Mode mode = Mode::kEntanglement;
  std::uint64_t rounds = 0;
  /// Empty means default_basis_bias(dim).
  std::vector<double> basis_bias;
  /// Isotropic-state visibility (EB).
  double visibility = 1.0;
  /// Symmetric d-ary flip probability of the PM channel: the prepared vector
  /// is replaced by one of the other d-1 vectors of its basis.
  double flip_prob = 0.0;
  SourceParams source;
  /// Unset means unit efficiency everywhere.
  std::optional<EfficiencyTable> efficiencies;
  double sample_fraction = kDefaultSampleFraction;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Keep the per-round log. Required by sift().
  bool record_rounds = true;

  /// Throws ConfigError on any violated constraint.
  void validate() const;

  std::vector<double> resolved_bias() const;
  EfficiencyTable resolved_efficiencies() const;
};

enum class Routing : std::uint8_t { kNoPair, kSplit, kBothA, kBothB };

struct RoundEvent {
  std::uint64_t round = 0;
  std::uint8_t basis_a = 0;
  std::uint8_t elem_a = 0;
  std::uint8_t basis_b = 0;
  std::uint8_t elem_b = 0;
  Routing routing = Routing::kNoPair;
  bool click_a = false;
  bool click_b = false;
  bool coincidence = false;

  Setting alice() const { return {basis_a, elem_a}; }
  Setting bob() const { return {basis_b, elem_b}; }
  bool operator==(const RoundEvent&) const = default;
};

struct SessionRecord {
  int dim = 0;
  Mode mode = Mode::kEntanglement;
  std::uint64_t rounds = 0;
  /// Per-round log in round order; empty when record_rounds is false.
  std::vector<RoundEvent> events;
  /// Per setting pair: rounds with a click at A, at B, and coincidences.
  /// In PM mode singles_a counts prepared pulses.
  CountMatrix counts;
  /// Rounds per setting pair, indexed [setting_a * num_settings + setting_b].
  std::vector<std::uint64_t> trials;

  std::uint64_t trials_for(const Setting& a, const Setting& b) const {
    return trials[static_cast<std::size_t>(setting_index(dim, a)) * num_settings(dim) + setting_index(dim, b)];
  }
};

/// Basis drawn from `bias`, element uniform over d.
Setting sample_setting(std::span<const double> bias, int d, RoundStream& rng);

/// Throws ConfigError unless cfg.mode is kEntanglement and cfg is valid.
SessionRecord run_eb_session(const ProtocolConfig& cfg, const MubSet& set);

/// Throws ConfigError unless cfg.mode is kPrepareMeasure and cfg is valid.
SessionRecord run_pm_session(const ProtocolConfig& cfg, const MubSet& set);

/// Dispatches on cfg.mode.
SessionRecord run_session(const ProtocolConfig& cfg, const MubSet& set);

/// Expected counts of a session, without sampling.
CountMatrix expected_session_counts(const ProtocolConfig& cfg, const MubSet& set);

struct SiftedEntry {
  std::uint64_t round = 0;
  int basis = 0;
  int alice = 0;
  int bob = 0;

  bool operator==(const SiftedEntry&) const = default;
};

struct SiftedData {
  int dim = 0;
  std::vector<SiftedEntry> entries;

  /// d-ary raw keys in round order.
  std::vector<std::uint8_t> alice_key() const;
  std::vector<std::uint8_t> bob_key() const;
};

/// Keeps conclusive rounds whose bases agree. Throws ValidationError if the
/// session was run without a round log.
SiftedData sift(const SessionRecord& s);

struct ParameterEstimate {
  /// Disagreement fraction per basis; nullopt if the sample held no round
  /// of that basis.
  std::vector<std::optional<double>> qber_per_basis;
  std::vector<std::size_t> sampled_per_basis;
  /// Mean over the available bases.
  std::optional<double> qber;
  /// Sifted rounds not sacrificed for estimation.
  SiftedData key_material;
};

/// Q per basis and averaged over available bases for a given subsample.
ParameterEstimate qber_from_sample(std::span<const SiftedEntry> sample, int d);

/// Sacrifices round(fraction * n) uniformly chosen sifted rounds (at least
/// one) to estimate the error rates; the rest is returned as key material.
ParameterEstimate estimate_parameters(const SiftedData& sd, double fraction, std::uint64_t seed);

}  // namespace mubqkd
