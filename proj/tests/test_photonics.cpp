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
#include <random>

#include <gtest/gtest.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/photonics.hpp"
#include "mubqkd/rng.hpp"

namespace mubqkd {
namespace {

// Qubit efficiencies per basis vector: z basis first, then x, then y.
constexpr double kTableA[6] = {0.01504, 0.01517, 0.00536, 0.00503, 0.00508, 0.00556};
constexpr double kTableB[6] = {0.02145, 0.02106, 0.00886, 0.00727, 0.00787, 0.00874};

EfficiencyTable qubit_table() {
  EfficiencyTable t(2);
  for (int i = 0; i < 6; ++i) {
    t.set(Arm::A, setting_at(2, i), kTableA[i]);
    t.set(Arm::B, setting_at(2, i), kTableB[i]);
  }
  return t;
}

TEST(Source, RoutingProbabilities) {
  const RoutingProbs r = pair_routing_probs();
  EXPECT_DOUBLE_EQ(r.ab, 0.5);
  EXPECT_DOUBLE_EQ(r.aa, 0.25);
  EXPECT_DOUBLE_EQ(r.bb, 0.25);
}

TEST(Source, RoutingMatchesBeamSplitterAmplitudes) {
  // Two photons on a balanced splitter, distinguishable modes: each photon
  // picks an arm independently with amplitude 2^-1/2.
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (int p1 = 0; p1 < 2; ++p1) {
    for (int p2 = 0; p2 < 2; ++p2) {
      const double w = 0.5 * 0.5;
      if (p1 != p2) ab += w;
      else if (p1 == 0) aa += w;
      else bb += w;
    }
  }
  const RoutingProbs r = pair_routing_probs();
  EXPECT_DOUBLE_EQ(r.ab, ab);
  EXPECT_DOUBLE_EQ(r.aa, aa);
  EXPECT_DOUBLE_EQ(r.bb, bb);
}

TEST(Source, ClickProbability) {
  EXPECT_DOUBLE_EQ(click_prob_n(0.3, 0), 0.0);
  EXPECT_DOUBLE_EQ(click_prob_n(0.3, 1), 0.3);
  EXPECT_NEAR(click_prob_n(0.3, 2), 0.51, 1e-15);
  EXPECT_THROW(click_prob_n(1.2, 1), RangeError);
  EXPECT_THROW(click_prob_n(0.2, -1), RangeError);
}

TEST(Source, ExpectedSinglesAndCoincidences) {
  SourceParams p;
  p.pulses = 1.0;
  p.alpha_sq = 1.0;
  p.chi = 2.0;
  EXPECT_DOUBLE_EQ(expected_singles(p, 1.0), 1.0);
  p.chi = 4.0;
  EXPECT_DOUBLE_EQ(expected_coincidences(p, 1.0, 1.0), 1.0);
  p.chi = -1.0;
  EXPECT_THROW(expected_singles(p, 0.5), RangeError);
}

TEST(Source, CoincidenceToSinglesRatioIsHalfPartnerEfficiency) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 500; ++t) {
    SourceParams p;
    p.pulses = 1e6 * u(rng) + 1.0;
    p.alpha_sq = u(rng);
    p.chi = 0.09 * u(rng) + 1e-6;
    const double ea = u(rng) * 0.99 + 0.01;
    const double eb = u(rng) * 0.99 + 0.01;
    EXPECT_NEAR(expected_coincidences(p, ea, eb) / expected_singles(p, ea), eb / 2.0, 1e-15);
    EXPECT_NEAR(expected_coincidences(p, ea, eb) / expected_singles(p, eb), ea / 2.0, 1e-15);
  }
}

TEST(Source, ValidateEnforcesFirstOrderRegime) {
  SourceParams p;
  EXPECT_NO_THROW(p.validate());
  p.chi = 0.2;
  EXPECT_THROW(p.validate(), ConfigError);
  p.chi = std::nan("");
  EXPECT_THROW(p.validate(), ConfigError);
}

TEST(EfficiencyTable, SetAndRange) {
  EfficiencyTable t(3, 0.5);
  EXPECT_DOUBLE_EQ(t.at(Arm::B, {3, 2}), 0.5);
  t.set(Arm::A, {1, 1}, 0.25);
  EXPECT_DOUBLE_EQ(t.at(Arm::A, {1, 1}), 0.25);
  EXPECT_THROW(t.set(Arm::A, {4, 0}, 0.1), RangeError);
  EXPECT_THROW(t.set(Arm::A, {0, 0}, 1.1), RangeError);
  EXPECT_THROW(EfficiencyTable(1), InvalidDimensionError);
}

TEST(EfficiencyTable, TextRoundTrip) {
  const EfficiencyTable t = qubit_table();
  const std::string text = format_efficiency_table(t);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# basis_vector eta_A eta_B");
  EXPECT_NE(text.find("3 0.00536 0.00886"), std::string::npos);
  EXPECT_EQ(parse_efficiency_table(text), t);
}

TEST(EfficiencyTable, ParseErrors) {
  EXPECT_THROW(parse_efficiency_table("1 0.1 0.1\n2 0.1 0.1\n"), ParseError);          // not d(d+1) rows
  EXPECT_THROW(parse_efficiency_table("1 0.1\n"), ParseError);                          // missing column
  EXPECT_THROW(parse_efficiency_table("1 0.1 0.1\n1 0.1 0.1\n3 0.1 0.1\n4 0.1 0.1\n5 0.1 0.1\n6 0.1 0.1\n"),
               ParseError);                                                             // repeated index
  try {
    parse_efficiency_table("# header\n1 0.1 1.5\n", "eta.txt");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Estimate, ExactRoundTripIsIdentity) {
  SourceParams p;
  p.pulses = 1e8;
  p.chi = 0.05;
  const EfficiencyTable t = qubit_table();
  const auto records = synthesize_counts(p, t, Synthesis::kExpectation);
  const EfficiencyTable est = estimate_efficiency(records, 2);
  for (int i = 0; i < 6; ++i) {
    EXPECT_NEAR(est.at(Arm::A, setting_at(2, i)), kTableA[i], 1e-12);
    EXPECT_NEAR(est.at(Arm::B, setting_at(2, i)), kTableB[i], 1e-12);
  }
}

TEST(Estimate, RandomTablesRoundTrip) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.001, 1.0);
  for (int d : {2, 3, 5}) {
    EfficiencyTable t(d);
    for (int i = 0; i < num_settings(d); ++i) {
      t.set(Arm::A, setting_at(d, i), u(rng));
      t.set(Arm::B, setting_at(d, i), u(rng));
    }
    SourceParams p;
    p.pulses = 1e7;
    const EfficiencyTable est = estimate_efficiency(synthesize_counts(p, t, Synthesis::kExpectation), d);
    for (int i = 0; i < num_settings(d); ++i) {
      for (Arm a : {Arm::A, Arm::B}) EXPECT_NEAR(est.at(a, setting_at(d, i)), t.at(a, setting_at(d, i)), 1e-12);
    }
  }
}

TEST(Estimate, PoissonWithinThreeStandardErrors) {
  SourceParams p;
  p.pulses = 1e8;
  p.chi = 0.09;
  const EfficiencyTable t = qubit_table();
  const auto records = synthesize_counts(p, t, Synthesis::kPoisson, 1);
  const EfficiencyTable est = estimate_efficiency(records, 2);
  for (const auto& r : records) {
    const int i = setting_index(2, r.setting_a);
    // eta_B = 2C/S_A; relative error of a ratio with C a thinning of S_A.
    const double eb = est.at(Arm::B, r.setting_b);
    const double se_b = kTableB[i] * std::sqrt((1.0 - kTableB[i] / 2.0) / r.coincidences);
    EXPECT_LT(std::abs(eb - kTableB[i]), 3.0 * se_b);
    const double ea = est.at(Arm::A, r.setting_a);
    const double se_a = kTableA[i] * std::sqrt((1.0 - kTableA[i] / 2.0) / r.coincidences);
    EXPECT_LT(std::abs(ea - kTableA[i]), 3.0 * se_a);
  }
}

TEST(Estimate, PoissonIsDeterministicPerSeed) {
  SourceParams p;
  p.pulses = 1e6;
  const auto a = synthesize_counts(p, qubit_table(), Synthesis::kPoisson, 9);
  const auto b = synthesize_counts(p, qubit_table(), Synthesis::kPoisson, 9);
  EXPECT_EQ(a, b);
}

TEST(Estimate, ErrorCases) {
  std::vector<CountRecord> recs;
  for (int i = 0; i < 6; ++i) recs.push_back({setting_at(2, i), setting_at(2, i), 100, 100, 10});
  EXPECT_NO_THROW(estimate_efficiency(recs, 2));

  auto zero = recs;
  zero[2].singles_a = 0;
  zero[2].coincidences = 0;
  EXPECT_THROW(estimate_efficiency(zero, 2), DivisionError);

  auto high = recs;
  high[1].coincidences = 60;  // 2 * 60 / 100 > 1
  EXPECT_THROW(estimate_efficiency(high, 2), InconsistentCountsError);

  auto missing = recs;
  missing.pop_back();
  EXPECT_THROW(estimate_efficiency(missing, 2), CountsError);

  auto dup = recs;
  dup.push_back(recs[0]);
  EXPECT_THROW(estimate_efficiency(dup, 2), CountsError);

  auto negative = recs;
  negative[0].singles_b = -1;
  EXPECT_THROW(estimate_efficiency(negative, 2), CountsError);

  // Records that are not partners are ignored.
  auto extra = recs;
  extra.push_back({{0, 0}, {1, 1}, 5, 5, 5});
  EXPECT_NO_THROW(estimate_efficiency(extra, 2));
}

TEST(Estimate, CustomPairing) {
  // Partner of element k is element d-1-k in the same basis.
  const int d = 3;
  Pairing flip = [d](const Setting& s) { return Setting{s.basis, d - 1 - s.element}; };
  EfficiencyTable t(d);
  for (int i = 0; i < num_settings(d); ++i) {
    t.set(Arm::A, setting_at(d, i), 0.01 * (i + 1));
    t.set(Arm::B, setting_at(d, i), 0.02 * (i + 1));
  }
  SourceParams p;
  p.pulses = 1e6;
  const auto recs = synthesize_counts(p, t, Synthesis::kExpectation, 0, flip);
  const EfficiencyTable est = estimate_efficiency(recs, d, flip);
  for (int i = 0; i < num_settings(d); ++i) {
    for (Arm a : {Arm::A, Arm::B}) EXPECT_NEAR(est.at(a, setting_at(d, i)), t.at(a, setting_at(d, i)), 1e-12);
  }
}

TEST(Uniformity, QubitTableSpreads) {
  const UniformityReport u = efficiency_uniformity(qubit_table());
  // (max - min) / mean for each pair of rows.
  auto spread = [](double x, double y) { return std::abs(x - y) / ((x + y) / 2.0); };
  EXPECT_NEAR(u.at(Arm::A, 0), spread(0.01504, 0.01517), 1e-12);
  EXPECT_NEAR(u.at(Arm::A, 1), spread(0.00536, 0.00503), 1e-12);
  EXPECT_NEAR(u.at(Arm::B, 2), spread(0.00787, 0.00874), 1e-12);
  EXPECT_LT(u.at(Arm::A, 0), 0.10);
  EXPECT_LT(u.at(Arm::A, 1), 0.10);
  EXPECT_LT(u.at(Arm::A, 2), 0.10);
  EXPECT_NEAR(u.max_spread(), spread(0.00886, 0.00727), 1e-12);
}

TEST(Uniformity, ConstantTableHasZeroSpread) {
  EXPECT_DOUBLE_EQ(efficiency_uniformity(EfficiencyTable::uniform(4, 0.2, 0.3)).max_spread(), 0.0);
}

TEST(CountRecord, Validation) {
  EXPECT_THROW((CountRecord{{0, 0}, {0, 0}, 5, 10, 6}.validate()), CountsError);
  EXPECT_THROW((CountRecord{{0, 0}, {0, 0}, -1, 10, 0}.validate()), CountsError);
  EXPECT_NO_THROW((CountRecord{{0, 0}, {0, 0}, 5, 10, 5}.validate()));
}

TEST(RoundStream, ReproducibleAndStreamSeparated) {
  RoundStream a(1, 7), b(1, 7), c(1, 8), e(2, 7);
  const auto x = a();
  EXPECT_EQ(x, b());
  EXPECT_NE(x, c());
  EXPECT_NE(x, e());
}

TEST(RoundStream, UniformMomentsAndBelow) {
  RoundStream r(123, 0);
  double sum = 0.0, sum2 = 0.0;
  const int n = 200000;
  std::vector<int> hist(7, 0);
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sum2 += u * u;
    hist[r.below(7)]++;
  }
  EXPECT_NEAR(sum / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sum2 / n, 1.0 / 3.0, 0.005);
  for (int h : hist) EXPECT_NEAR(h, n / 7.0, 5 * std::sqrt(n / 7.0));
}

}  // namespace
}  // namespace mubqkd
