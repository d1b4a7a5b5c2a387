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

#include "mubqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/state.hpp"

namespace mubqkd {

std::vector<double> default_basis_bias(int d, double epsilon) {
  std::vector<double> bias(d + 1, epsilon / d);
  bias[0] = 1.0 - epsilon;
  return bias;
}

std::vector<double> uniform_basis_bias(int d) { return std::vector<double>(d + 1, 1.0 / (d + 1)); }

std::vector<double> ProtocolConfig::resolved_bias() const {
  return basis_bias.empty() ? default_basis_bias(dim) : basis_bias;
}

EfficiencyTable ProtocolConfig::resolved_efficiencies() const {
  return efficiencies ? *efficiencies : EfficiencyTable(dim, 1.0);
}

void ProtocolConfig::validate() const {
  if (dim < 2 || dim > 7 || !(is_prime(dim) || dim == 4)) {
    throw ConfigError(fmt::format("dim must be one of 2, 3, 4, 5, 7, got {}", dim));
  }
  const auto bias = resolved_bias();
  if (static_cast<int>(bias.size()) != dim + 1) {
    throw ConfigError(fmt::format("basis bias needs {} entries, got {}", dim + 1, bias.size()));
  }
  double sum = 0.0;
  for (double b : bias) {
    if (!(b >= 0.0) || !std::isfinite(b)) throw ConfigError("basis bias entries must be finite and nonnegative");
    sum += b;
  }
  if (std::abs(sum - 1.0) > kBiasSumTolerance) {
    throw ConfigError(fmt::format("basis bias sums to {:.17g}, expected 1", sum));
  }
  if (!(sample_fraction > 0.0 && sample_fraction < 1.0)) {
    throw ConfigError(fmt::format("sample fraction must lie in (0, 1), got {}", sample_fraction));
  }
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw ConfigError(fmt::format("visibility must lie in [0, 1], got {}", visibility));
  }
  if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) {
    throw ConfigError(fmt::format("flip probability must lie in [0, 1], got {}", flip_prob));
  }
  if (efficiencies && efficiencies->dim() != dim) {
    throw ConfigError(fmt::format("efficiency table has dimension {}, expected {}", efficiencies->dim(), dim));
  }
  if (workers < 1) throw ConfigError(fmt::format("workers must be at least 1, got {}", workers));
  if (mode == Mode::kEntanglement) source.validate();
}

Setting sample_setting(std::span<const double> bias, int d, RoundStream& rng) {
  const double u = rng.uniform();
  int basis = -1;
  double cumulative = 0.0;
  for (std::size_t b = 0; b < bias.size(); ++b) {
    cumulative += bias[b];
    if (u < cumulative) {
      basis = static_cast<int>(b);
      break;
    }
  }
  if (basis < 0) {
    // Rounding left u above the final cumulative sum; take the last basis
    // with nonzero weight.
    for (int b = static_cast<int>(bias.size()) - 1; b >= 0; --b) {
      if (bias[b] > 0.0) {
        basis = b;
        break;
      }
    }
  }
  return {basis, static_cast<int>(rng.below(static_cast<std::uint64_t>(d)))};
}

namespace {

// Per-setting probabilities precomputed once per session.
struct RoundModel {
  int d = 0;
  int n = 0;  // settings
  Mode mode = Mode::kEntanglement;
  std::vector<double> bias;
  EfficiencyTable eta{2};
  double pair_prob = 0.0;
  RoutingProbs routing;
  std::vector<double> p_both;  // EB: both filters pass, [i * n + j]
  std::vector<double> p_a;     // EB: Alice's filter passes
  std::vector<double> p_b;     // EB: Bob's filter passes
  std::vector<double> p_pass;  // PM: Bob's filter passes the prepared photon, [i * n + j]
};

RoundModel build_model(const ProtocolConfig& cfg, const MubSet& set) {
  RoundModel m;
  m.d = cfg.dim;
  m.n = num_settings(cfg.dim);
  m.mode = cfg.mode;
  m.bias = cfg.resolved_bias();
  m.eta = cfg.resolved_efficiencies();
  m.pair_prob = cfg.source.pair_probability();
  m.routing = pair_routing_probs();
  const int d = m.d;
  const int n = m.n;

  if (cfg.mode == Mode::kEntanglement) {
    const DensityOperator rho = isotropic_state(d, cfg.visibility);
    const DensityOperator rho_a = reduced_state(rho, d, Side::A);
    const DensityOperator rho_b = reduced_state(rho, d, Side::B);
    std::vector<Ket> alice_filters;
    for (int i = 0; i < n; ++i) {
      const Setting s = setting_at(d, i);
      alice_filters.push_back(conjugate_ket(set.vector(s.basis, s.element)));
    }
    m.p_both.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      const Setting sb = setting_at(d, i);
      const Ket& bob_filter = set.vector(sb.basis, sb.element);
      m.p_a.push_back(std::clamp(alice_filters[i].amplitudes().dot(rho_a.matrix() * alice_filters[i].amplitudes()).real(), 0.0, 1.0));
      m.p_b.push_back(std::clamp(bob_filter.amplitudes().dot(rho_b.matrix() * bob_filter.amplitudes()).real(), 0.0, 1.0));
      for (int j = 0; j < n; ++j) {
        const Setting s = setting_at(d, j);
        m.p_both[static_cast<std::size_t>(i) * n + j] = joint_prob(rho, alice_filters[i], set.vector(s.basis, s.element));
      }
    }
    // The joint pass probability cannot exceed either marginal.
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        auto& p = m.p_both[static_cast<std::size_t>(i) * n + j];
        p = std::min({p, m.p_a[i], m.p_b[j]});
      }
    }
  } else {
    m.p_pass.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
      const Setting sa = setting_at(d, i);
      for (int j = 0; j < n; ++j) {
        const Setting sb = setting_at(d, j);
        const Ket& filter = set.vector(sb.basis, sb.element);
        double flipped = 0.0;
        for (int k = 0; k < d; ++k) {
          if (k != sa.element) flipped += pm_overlap_prob(set.vector(sa.basis, k), filter);
        }
        const double direct = pm_overlap_prob(set.vector(sa.basis, sa.element), filter);
        m.p_pass[static_cast<std::size_t>(i) * n + j] =
            std::clamp((1.0 - cfg.flip_prob) * direct + cfg.flip_prob * flipped / (d - 1), 0.0, 1.0);
      }
    }
  }
  return m;
}

RoundEvent simulate_round(const RoundModel& m, std::uint64_t seed, std::uint64_t round) {
  RoundStream rng(seed, round);
  const Setting sa = sample_setting(m.bias, m.d, rng);
  const Setting sb = sample_setting(m.bias, m.d, rng);
  RoundEvent ev;
  ev.round = round;
  ev.basis_a = static_cast<std::uint8_t>(sa.basis);
  ev.elem_a = static_cast<std::uint8_t>(sa.element);
  ev.basis_b = static_cast<std::uint8_t>(sb.basis);
  ev.elem_b = static_cast<std::uint8_t>(sb.element);
  const int ia = setting_index(m.d, sa);
  const int ib = setting_index(m.d, sb);
  const double eta_a = m.eta.at(Arm::A, sa);
  const double eta_b = m.eta.at(Arm::B, sb);

  if (m.mode == Mode::kPrepareMeasure) {
    ev.routing = Routing::kSplit;
    ev.click_a = true;  // Alice's prepared pulse
    ev.click_b = rng.bernoulli(m.p_pass[static_cast<std::size_t>(ia) * m.n + ib] * eta_b);
    ev.coincidence = ev.click_b;
    return ev;
  }

  if (!rng.bernoulli(m.pair_prob)) return ev;
  const double route = rng.uniform();
  if (route < m.routing.ab) {
    ev.routing = Routing::kSplit;
    const double p_both = m.p_both[static_cast<std::size_t>(ia) * m.n + ib];
    const double p_a = m.p_a[ia];
    const double p_b = m.p_b[ib];
    const double u = rng.uniform();
    const bool pass_a = u < p_a;
    const bool pass_b = u < p_both || (u >= p_a && u < p_a + p_b - p_both);
    ev.click_a = pass_a && rng.bernoulli(eta_a);
    ev.click_b = pass_b && rng.bernoulli(eta_b);
  } else if (route < m.routing.ab + m.routing.aa) {
    // Two photons at Alice's filter; none reach Bob.
    ev.routing = Routing::kBothA;
    ev.click_a = rng.bernoulli(click_prob_n(eta_a * m.p_a[ia], 2));
  } else {
    ev.routing = Routing::kBothB;
    ev.click_b = rng.bernoulli(click_prob_n(eta_b * m.p_b[ib], 2));
  }
  ev.coincidence = ev.click_a && ev.click_b;
  return ev;
}

struct Tally {
  std::vector<double> singles_a;
  std::vector<double> singles_b;
  std::vector<double> coincidences;
  std::vector<std::uint64_t> trials;
  std::vector<RoundEvent> events;

  explicit Tally(std::size_t cells) : singles_a(cells), singles_b(cells), coincidences(cells), trials(cells) {}
};

SessionRecord run(const ProtocolConfig& cfg, const MubSet& set) {
  cfg.validate();
  if (set.dim() != cfg.dim) {
    throw ConfigError(fmt::format("MUB set dimension {} differs from configured dimension {}", set.dim(), cfg.dim));
  }
  const RoundModel model = build_model(cfg, set);
  const auto cells = static_cast<std::size_t>(model.n) * model.n;
  const auto workers = static_cast<std::uint64_t>(cfg.workers);

  std::vector<Tally> tallies(workers, Tally(cells));
  auto work = [&](std::uint64_t w) {
    const std::uint64_t begin = cfg.rounds * w / workers;
    const std::uint64_t end = cfg.rounds * (w + 1) / workers;
    Tally& t = tallies[w];
    if (cfg.record_rounds) t.events.reserve(end - begin);
    for (std::uint64_t r = begin; r < end; ++r) {
      const RoundEvent ev = simulate_round(model, cfg.seed, r);
      const std::size_t cell =
          static_cast<std::size_t>(setting_index(model.d, ev.alice())) * model.n + setting_index(model.d, ev.bob());
      t.trials[cell] += 1;
      t.singles_a[cell] += ev.click_a ? 1.0 : 0.0;
      t.singles_b[cell] += ev.click_b ? 1.0 : 0.0;
      t.coincidences[cell] += ev.coincidence ? 1.0 : 0.0;
      if (cfg.record_rounds) t.events.push_back(ev);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> threads;
    for (std::uint64_t w = 0; w < workers; ++w) threads.emplace_back(work, w);
  }

  SessionRecord rec{cfg.dim, cfg.mode, cfg.rounds, {}, CountMatrix::zeros(cfg.dim), std::vector<std::uint64_t>(cells)};
  for (auto& t : tallies) {
    for (std::size_t c = 0; c < cells; ++c) {
      rec.trials[c] += t.trials[c];
      rec.counts.accumulate(setting_at(model.d, static_cast<int>(c / model.n)),
                            setting_at(model.d, static_cast<int>(c % model.n)), t.singles_a[c], t.singles_b[c],
                            t.coincidences[c]);
    }
    rec.events.insert(rec.events.end(), t.events.begin(), t.events.end());
  }
  return rec;
}

}  // namespace

SessionRecord run_eb_session(const ProtocolConfig& cfg, const MubSet& set) {
  if (cfg.mode != Mode::kEntanglement) throw ConfigError("run_eb_session needs an entanglement-based configuration");
  return run(cfg, set);
}

SessionRecord run_pm_session(const ProtocolConfig& cfg, const MubSet& set) {
  if (cfg.mode != Mode::kPrepareMeasure) throw ConfigError("run_pm_session needs a prepare-and-measure configuration");
  return run(cfg, set);
}

SessionRecord run_session(const ProtocolConfig& cfg, const MubSet& set) { return run(cfg, set); }

CountMatrix expected_session_counts(const ProtocolConfig& cfg, const MubSet& set) {
  cfg.validate();
  const RoundModel m = build_model(cfg, set);
  const double rounds = static_cast<double>(cfg.rounds);
  CountMatrix c(m.d);
  for (int i = 0; i < m.n; ++i) {
    const Setting sa = setting_at(m.d, i);
    for (int j = 0; j < m.n; ++j) {
      const Setting sb = setting_at(m.d, j);
      const double trials = rounds * (m.bias[sa.basis] / m.d) * (m.bias[sb.basis] / m.d);
      const double eta_a = m.eta.at(Arm::A, sa);
      const double eta_b = m.eta.at(Arm::B, sb);
      const auto cell = static_cast<std::size_t>(i) * m.n + j;
      CountRecord r{sa, sb};
      if (m.mode == Mode::kPrepareMeasure) {
        r.singles_a = trials;
        r.singles_b = trials * m.p_pass[cell] * eta_b;
        r.coincidences = r.singles_b;
      } else {
        const double pairs = trials * m.pair_prob;
        r.coincidences = pairs * m.routing.ab * m.p_both[cell] * eta_a * eta_b;
        r.singles_a = pairs * (m.routing.ab * m.p_a[i] * eta_a + m.routing.aa * click_prob_n(eta_a * m.p_a[i], 2));
        r.singles_b = pairs * (m.routing.ab * m.p_b[j] * eta_b + m.routing.bb * click_prob_n(eta_b * m.p_b[j], 2));
        r.coincidences = std::min({r.coincidences, r.singles_a, r.singles_b});
      }
      c.insert(r);
    }
  }
  c.probabilities = true;
  return c;
}

// ----------------------------------------------------------------------------

std::vector<std::uint8_t> SiftedData::alice_key() const {
  std::vector<std::uint8_t> key;
  key.reserve(entries.size());
  for (const auto& e : entries) key.push_back(static_cast<std::uint8_t>(e.alice));
  return key;
}

std::vector<std::uint8_t> SiftedData::bob_key() const {
  std::vector<std::uint8_t> key;
  key.reserve(entries.size());
  for (const auto& e : entries) key.push_back(static_cast<std::uint8_t>(e.bob));
  return key;
}

SiftedData sift(const SessionRecord& s) {
  if (s.events.empty() && s.rounds > 0) {
    throw ValidationError("session has no round log; run with record_rounds enabled to sift");
  }
  SiftedData out{s.dim, {}};
  for (const auto& ev : s.events) {
    if (ev.coincidence && ev.basis_a == ev.basis_b) {
      out.entries.push_back({ev.round, ev.basis_a, ev.elem_a, ev.elem_b});
    }
  }
  return out;
}

ParameterEstimate qber_from_sample(std::span<const SiftedEntry> sample, int d) {
  ParameterEstimate est;
  est.qber_per_basis.assign(d + 1, std::nullopt);
  est.sampled_per_basis.assign(d + 1, 0);
  std::vector<std::size_t> errors(d + 1, 0);
  for (const auto& e : sample) {
    if (e.basis < 0 || e.basis > d) throw RangeError(fmt::format("sifted entry has basis {} for d = {}", e.basis, d));
    est.sampled_per_basis[e.basis] += 1;
    if (e.alice != e.bob) errors[e.basis] += 1;
  }
  double sum = 0.0;
  int available = 0;
  for (int b = 0; b <= d; ++b) {
    if (est.sampled_per_basis[b] == 0) continue;
    const double q = static_cast<double>(errors[b]) / static_cast<double>(est.sampled_per_basis[b]);
    est.qber_per_basis[b] = q;
    sum += q;
    ++available;
  }
  if (available > 0) est.qber = sum / available;
  est.key_material.dim = d;
  return est;
}

ParameterEstimate estimate_parameters(const SiftedData& sd, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw RangeError(fmt::format("sample fraction must lie in (0, 1), got {}", fraction));
  }
  const std::size_t n = sd.entries.size();
  if (n == 0) throw ValidationError("no sifted data to estimate parameters from");
  const auto m = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n))),
                                         1, n);

  // Partial Fisher-Yates on the index list: the first m positions become a
  // uniform sample without replacement.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  RoundStream rng(seed, 0xffffffffffffffffULL);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(order[i], order[j]);
  }
  std::vector<bool> sacrificed(n, false);
  for (std::size_t i = 0; i < m; ++i) sacrificed[order[i]] = true;

  std::vector<SiftedEntry> sample;
  sample.reserve(m);
  SiftedData remaining{sd.dim, {}};
  remaining.entries.reserve(n - m);
  for (std::size_t i = 0; i < n; ++i) {
    (sacrificed[i] ? sample : remaining.entries).push_back(sd.entries[i]);
  }
  ParameterEstimate est = qber_from_sample(sample, sd.dim);
  est.key_material = std::move(remaining);
  return est;
}

}  // namespace mubqkd
