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

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/protocol.hpp"
#include "mubqkd/security.hpp"

namespace mubqkd {
namespace {

ProtocolConfig eb_config(int d, std::uint64_t rounds, double v = 1.0) {
  ProtocolConfig cfg;
  cfg.dim = d;
  cfg.mode = Mode::kEntanglement;
  cfg.rounds = rounds;
  cfg.visibility = v;
  cfg.basis_bias = uniform_basis_bias(d);
  cfg.source.chi = 0.09;
  cfg.seed = 12345;
  return cfg;
}

ProtocolConfig pm_config(int d, std::uint64_t rounds, double flip = 0.0) {
  ProtocolConfig cfg;
  cfg.dim = d;
  cfg.mode = Mode::kPrepareMeasure;
  cfg.rounds = rounds;
  cfg.flip_prob = flip;
  cfg.basis_bias = uniform_basis_bias(d);
  cfg.seed = 999;
  return cfg;
}

TEST(Bias, DefaultAndUniform) {
  const auto b = default_basis_bias(4);
  ASSERT_EQ(b.size(), 5u);
  EXPECT_DOUBLE_EQ(b[0], 0.9);
  EXPECT_DOUBLE_EQ(b[3], 0.025);
  const auto u = uniform_basis_bias(3);
  for (double x : u) EXPECT_DOUBLE_EQ(x, 0.25);
}

TEST(ProtocolConfig, Validation) {
  ProtocolConfig cfg = eb_config(3, 10);
  EXPECT_NO_THROW(cfg.validate());
  auto bad = cfg;
  bad.basis_bias = {0.5, 0.5};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.basis_bias = {0.5, 0.3, 0.1, 0.1 + 1e-9};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.basis_bias = {1.2, -0.2, 0.0, 0.0};
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.sample_fraction = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.visibility = 1.01;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.source.chi = 0.2;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.dim = 6;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.workers = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = cfg;
  bad.efficiencies = EfficiencyTable(2);
  EXPECT_THROW(bad.validate(), ConfigError);
  EXPECT_THROW(run_pm_session(cfg, mub_set(3)), ConfigError);
  EXPECT_THROW(run_eb_session(pm_config(3, 10), mub_set(3)), ConfigError);
}

TEST(SampleSetting, FollowsBias) {
  const std::vector<double> bias = {0.7, 0.2, 0.1};
  std::vector<int> basis_hist(3, 0), elem_hist(2, 0);
  const int n = 100000;
  for (int r = 0; r < n; ++r) {
    RoundStream rng(4, r);
    const Setting s = sample_setting(bias, 2, rng);
    basis_hist[s.basis]++;
    elem_hist[s.element]++;
  }
  for (int b = 0; b < 3; ++b) {
    const double se = std::sqrt(bias[b] * (1 - bias[b]) / n);
    EXPECT_NEAR(basis_hist[b] / double(n), bias[b], 5 * se);
  }
  EXPECT_NEAR(elem_hist[0] / double(n), 0.5, 5 * std::sqrt(0.25 / n));
  // Zero-weight bases are never drawn.
  const std::vector<double> only_last = {0.0, 0.0, 1.0};
  RoundStream rng(1, 1);
  for (int i = 0; i < 1000; ++i) EXPECT_EQ(sample_setting(only_last, 2, rng).basis, 2);
}

TEST(Session, WorkerCountDoesNotChangeResult) {
  for (Mode m : {Mode::kEntanglement, Mode::kPrepareMeasure}) {
    ProtocolConfig cfg = m == Mode::kEntanglement ? eb_config(3, 50000, 0.9) : pm_config(3, 50000, 0.05);
    const SessionRecord one = run_session(cfg, mub_set(3));
    for (int w : {2, 3, 8}) {
      cfg.workers = w;
      const SessionRecord many = run_session(cfg, mub_set(3));
      EXPECT_EQ(many.events, one.events);
      EXPECT_EQ(many.counts.records(), one.counts.records());
      EXPECT_EQ(many.trials, one.trials);
    }
  }
}

TEST(Session, SeedChangesResult) {
  ProtocolConfig cfg = eb_config(2, 20000);
  const auto a = run_session(cfg, mub_set(2));
  cfg.seed += 1;
  const auto b = run_session(cfg, mub_set(2));
  EXPECT_NE(a.events, b.events);
}

TEST(Session, EventLogIsConsistentWithCounts) {
  const ProtocolConfig cfg = eb_config(2, 30000, 0.8);
  const SessionRecord s = run_session(cfg, mub_set(2));
  ASSERT_EQ(s.events.size(), cfg.rounds);
  std::uint64_t trials = 0;
  for (auto t : s.trials) trials += t;
  EXPECT_EQ(trials, cfg.rounds);
  double coinc = 0.0;
  for (const auto& r : s.counts.records()) coinc += r.coincidences;
  std::uint64_t from_log = 0;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const auto& ev = s.events[i];
    EXPECT_EQ(ev.round, i);
    EXPECT_EQ(ev.coincidence, ev.click_a && ev.click_b);
    if (ev.routing == Routing::kNoPair) EXPECT_FALSE(ev.click_a || ev.click_b);
    if (ev.routing == Routing::kBothA) EXPECT_FALSE(ev.click_b);
    if (ev.routing == Routing::kBothB) EXPECT_FALSE(ev.click_a);
    from_log += ev.coincidence;
  }
  EXPECT_EQ(static_cast<double>(from_log), coinc);
}

TEST(Session, DoublyRoutedPairsNeverSift) {
  const ProtocolConfig cfg = eb_config(3, 200000, 0.9);
  const SessionRecord s = run_session(cfg, mub_set(3));
  const SiftedData sd = sift(s);
  ASSERT_FALSE(sd.entries.empty());
  std::size_t doubles = 0;
  for (const auto& ev : s.events) doubles += ev.routing == Routing::kBothA || ev.routing == Routing::kBothB;
  EXPECT_GT(doubles, 0u);
  for (const auto& e : sd.entries) {
    EXPECT_EQ(s.events[e.round].routing, Routing::kSplit);
    EXPECT_EQ(s.events[e.round].basis_a, s.events[e.round].basis_b);
  }
}

TEST(Session, RoutingFrequencies) {
  const ProtocolConfig cfg = eb_config(2, 400000);
  const SessionRecord s = run_session(cfg, mub_set(2));
  double pairs = 0, split = 0, aa = 0;
  for (const auto& ev : s.events) {
    pairs += ev.routing != Routing::kNoPair;
    split += ev.routing == Routing::kSplit;
    aa += ev.routing == Routing::kBothA;
  }
  const double n = static_cast<double>(cfg.rounds);
  EXPECT_NEAR(pairs / n, 0.09, 5 * std::sqrt(0.09 * 0.91 / n));
  EXPECT_NEAR(split / pairs, 0.5, 5 * std::sqrt(0.25 / pairs));
  EXPECT_NEAR(aa / pairs, 0.25, 5 * std::sqrt(0.25 * 0.75 / pairs));
}

TEST(Session, IdealEntangledKeyHasNoErrors) {
  for (int d : {2, 3, 4, 5}) {
    const SessionRecord s = run_session(eb_config(d, 400000), mub_set(d));
    const SiftedData sd = sift(s);
    ASSERT_GT(sd.entries.size(), 50u);
    EXPECT_EQ(sd.alice_key(), sd.bob_key());
  }
}

TEST(Session, SiftedFractionMatchesClosedForm) {
  // Sum over bases of bias^2 / d^2, times pair probability, split
  // probability and both detector efficiencies.
  const int d = 3;
  ProtocolConfig cfg = eb_config(d, 400000, 0.85);
  cfg.basis_bias = {0.4, 0.3, 0.2, 0.1};
  cfg.efficiencies = EfficiencyTable::uniform(d, 0.8, 0.6);
  const SessionRecord s = run_session(cfg, mub_set(d));
  double expected = 0.0;
  for (double b : cfg.basis_bias) expected += b * b;
  expected *= 0.09 * 0.5 * 0.8 * 0.6 / (d * d);
  const double n = static_cast<double>(cfg.rounds);
  const double got = sift(s).entries.size() / n;
  EXPECT_NEAR(got, expected, 5 * std::sqrt(expected / n));
}

TEST(Session, MonteCarloMatchesExpectedCounts) {
  for (Mode m : {Mode::kEntanglement, Mode::kPrepareMeasure}) {
    ProtocolConfig cfg = m == Mode::kEntanglement ? eb_config(2, 600000, 0.7) : pm_config(2, 200000, 0.1);
    cfg.efficiencies = EfficiencyTable::uniform(2, 0.9, 0.7);
    cfg.record_rounds = false;
    const MubSet set = mub_set(2);
    const SessionRecord s = run_session(cfg, set);
    EXPECT_TRUE(s.events.empty());
    const CountMatrix e = expected_session_counts(cfg, set);
    for (const auto& r : s.counts.records()) {
      const auto& x = e.at(r.setting_a, r.setting_b);
      EXPECT_NEAR(r.coincidences, x.coincidences, 5 * std::sqrt(x.coincidences) + 3);
      EXPECT_NEAR(r.singles_a, x.singles_a, 5 * std::sqrt(x.singles_a) + 3);
      EXPECT_NEAR(r.singles_b, x.singles_b, 5 * std::sqrt(x.singles_b) + 3);
    }
  }
}

TEST(Session, PrepareMeasureExactBlocks) {
  const int d = 3;
  const MubSet set = mub_set(d);
  const JointProbMatrix p = normalize_blocks(expected_session_counts(pm_config(d, 1000000), set));
  for (int a = 0; a <= d; ++a) {
    for (int b = 0; b <= d; ++b) {
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          const double want = a == b ? (i == j ? 1.0 / d : 0.0) : 1.0 / (d * d);
          EXPECT_NEAR(p.at({a, i}, {b, j}), want, 1e-12);
        }
      }
    }
  }
}

TEST(Session, PrepareMeasureFlipSetsErrorRate) {
  const int d = 5;
  const double f = 0.14;
  const auto eq = empirical_qber(expected_session_counts(pm_config(d, 1000000, f), mub_set(d)));
  EXPECT_NEAR(eq.qber.value(), f, 1e-12);
  const SessionRecord s = run_session(pm_config(d, 300000, f), mub_set(d));
  const auto mc = empirical_qber(s.counts);
  EXPECT_NEAR(mc.qber.value(), f, 3 * mc.qber_std_error.value());
}

TEST(Session, EntangledExactQberMatchesTraceFormula) {
  for (int d : {2, 3, 4, 5}) {
    const double v = 0.83;
    ProtocolConfig cfg = eb_config(d, 1000000, v);
    cfg.efficiencies = EfficiencyTable::uniform(d, 0.3, 0.5);
    const auto eq = empirical_qber(expected_session_counts(cfg, mub_set(d)));
    EXPECT_NEAR(eq.qber.value(), isotropic_qber(d, v), 1e-12);
  }
}

TEST(Sift, RequiresRoundLog) {
  ProtocolConfig cfg = eb_config(2, 100);
  cfg.record_rounds = false;
  EXPECT_THROW(sift(run_session(cfg, mub_set(2))), ValidationError);
}

TEST(EstimateParameters, SamplesRequestedFractionWithoutOverlap) {
  const SessionRecord s = run_session(eb_config(3, 1000000, 0.9), mub_set(3));
  const SiftedData sd = sift(s);
  const ParameterEstimate est = estimate_parameters(sd, 0.1, 77);
  const std::size_t sampled = sd.entries.size() - est.key_material.entries.size();
  EXPECT_EQ(sampled, static_cast<std::size_t>(std::llround(0.1 * sd.entries.size())));
  std::size_t per_basis = 0;
  for (auto n : est.sampled_per_basis) per_basis += n;
  EXPECT_EQ(per_basis, sampled);
  // Remaining key material stays in round order and has no duplicates.
  std::set<std::uint64_t> rounds;
  std::uint64_t prev = 0;
  for (const auto& e : est.key_material.entries) {
    EXPECT_TRUE(rounds.insert(e.round).second);
    EXPECT_GE(e.round, prev);
    prev = e.round;
  }
  // Same seed, same split.
  const ParameterEstimate again = estimate_parameters(sd, 0.1, 77);
  EXPECT_EQ(again.key_material.entries, est.key_material.entries);
  ASSERT_TRUE(est.qber);
  const double q = isotropic_qber(3, 0.9);
  EXPECT_NEAR(*est.qber, q, 5 * std::sqrt(q * (1 - q) / sampled));
}

TEST(EstimateParameters, AtLeastOneAndRangeChecks) {
  SiftedData sd{2, {{0, 0, 1, 1}, {1, 1, 0, 1}, {2, 2, 0, 0}}};
  const ParameterEstimate est = estimate_parameters(sd, 0.01, 1);
  EXPECT_EQ(est.key_material.entries.size(), 2u);
  EXPECT_THROW(estimate_parameters(sd, 0.0, 1), RangeError);
  EXPECT_THROW(estimate_parameters(SiftedData{2, {}}, 0.5, 1), ValidationError);
}

TEST(QberFromSample, PerBasisAndMean) {
  const std::vector<SiftedEntry> sample = {{0, 0, 1, 1}, {1, 0, 1, 0}, {2, 1, 0, 0}, {3, 1, 1, 1}};
  const ParameterEstimate est = qber_from_sample(sample, 2);
  EXPECT_DOUBLE_EQ(est.qber_per_basis[0].value(), 0.5);
  EXPECT_DOUBLE_EQ(est.qber_per_basis[1].value(), 0.0);
  EXPECT_FALSE(est.qber_per_basis[2]);
  EXPECT_DOUBLE_EQ(est.qber.value(), 0.25);
}

}  // namespace
}  // namespace mubqkd
