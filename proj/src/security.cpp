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

#include "mubqkd/security.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"
#include "mubqkd/fileio.hpp"

namespace mubqkd {

double qber_per_basis(const DensityOperator& rho, const Basis& basis) {
  const int d = basis.dim();
  if (rho.dim() != d * d) {
    throw ShapeError(fmt::format("state dimension {} does not match basis dimension {}^2", rho.dim(), d));
  }
  double q = 0.0;
  for (int k = 0; k < d; ++k) {
    const Ket a = conjugate_ket(basis[k]);
    for (int kb = 0; kb < d; ++kb) {
      if (kb != k) q += joint_prob(rho, a, basis[kb]);
    }
  }
  return q;
}

std::vector<double> qber_all_bases(const DensityOperator& rho, const MubSet& set) {
  std::vector<double> out;
  out.reserve(set.size());
  for (const auto& b : set.bases()) out.push_back(qber_per_basis(rho, b));
  return out;
}

double average_qber(std::span<const double> qs, int d) {
  if (static_cast<int>(qs.size()) != d + 1) {
    throw ShapeError(fmt::format("expected {} per-basis error rates, got {}", d + 1, qs.size()));
  }
  double sum = 0.0;
  for (double q : qs) sum += q;
  return sum / static_cast<double>(qs.size());
}

EmpiricalQber empirical_qber(const CountMatrix& c) {
  const int d = c.dim();
  EmpiricalQber out;
  out.dim = d;
  out.per_basis.assign(d + 1, std::nullopt);
  out.std_error.assign(d + 1, std::nullopt);
  double sum = 0.0;
  double var_sum = 0.0;
  int available = 0;
  for (int b = 0; b <= d; ++b) {
    double total = 0.0;
    double off = 0.0;
    for (int ka = 0; ka < d; ++ka) {
      for (int kb = 0; kb < d; ++kb) {
        const Setting sa{b, ka};
        const Setting sb{b, kb};
        if (!c.has(sa, sb)) continue;
        const double n = c.at(sa, sb).coincidences;
        total += n;
        if (ka != kb) off += n;
      }
    }
    if (!(total > 0.0)) {
      out.unavailable.push_back(b);
      continue;
    }
    const double q = off / total;
    out.per_basis[b] = q;
    sum += q;
    ++available;
    if (!c.probabilities) {
      const double var = q * (1.0 - q) / total;
      out.std_error[b] = std::sqrt(var);
      var_sum += var;
    }
  }
  if (available > 0) {
    out.qber = sum / available;
    if (!c.probabilities) out.qber_std_error = std::sqrt(var_sum) / available;
  }
  return out;
}

namespace {

double xlog2x_ratio(double x, double ratio) { return x > 0.0 ? x * std::log2(ratio) : 0.0; }

void check_dim(int d) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
}

}  // namespace

double key_rate(int d, double qber) {
  check_dim(d);
  const double a = static_cast<double>(d + 1) / d;
  if (!(qber >= 0.0) || !(a * qber < 1.0)) {
    throw DomainError(fmt::format("Q = {} is outside the key-rate domain [0, {}) for d = {}", qber,
                                  static_cast<double>(d) / (d + 1), d));
  }
  const double aq = a * qber;
  return std::log2(static_cast<double>(d)) + xlog2x_ratio(aq, qber / (static_cast<double>(d) * (d - 1))) +
         (1.0 - aq) * std::log2(1.0 - aq);
}

double q_max(int d, double tol) {
  check_dim(d);
  if (!(tol > 0.0)) throw RangeError(fmt::format("tolerance must be positive, got {}", tol));
  double lo = 1e-9;
  double hi = static_cast<double>(d) / (d + 1) - 1e-9;
  const double r_lo = key_rate(d, lo);
  const double r_hi = key_rate(d, hi);
  if (!(r_lo > 0.0 && r_hi < 0.0)) {
    throw NumericError(fmt::format("key rate does not change sign on the bracket for d = {}", d));
  }
  // Count sign changes on a grid before trusting bisection.
  constexpr int kGrid = 4096;
  int changes = 0;
  double prev = r_lo;
  for (int i = 1; i <= kGrid; ++i) {
    const double q = lo + (hi - lo) * i / kGrid;
    const double r = key_rate(d, q);
    if ((r < 0.0) != (prev < 0.0)) ++changes;
    prev = r;
  }
  if (changes != 1) {
    throw NumericError(fmt::format("key rate has {} sign changes on the bracket for d = {}", changes, d));
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double r = key_rate(d, mid);
    if (std::abs(r) < tol) return mid;
    (r > 0.0 ? lo : hi) = mid;
    if (hi - lo <= 0.0) break;
  }
  const double mid = 0.5 * (lo + hi);
  if (std::abs(key_rate(d, mid)) < tol) return mid;
  throw NumericError(fmt::format("bisection for Q_max did not reach tolerance {} for d = {}", tol, d));
}

double isotropic_mutual_information(int d, double qber) { return mutual_information(isotropic_joint(d, qber)); }

// ----------------------------------------------------------------------------

namespace {

void validate_probabilities(const std::vector<double>& p) {
  if (p.empty()) throw ValidationError("distribution is empty");
  double sum = 0.0;
  for (double x : p) {
    if (!std::isfinite(x) || x < 0.0) throw ValidationError(fmt::format("invalid probability {}", x));
    sum += x;
  }
  if (std::abs(sum - 1.0) > kDistributionTolerance) {
    throw ValidationError(fmt::format("probabilities sum to {:.17g}, expected 1", sum));
  }
}

double entropy_of(const std::vector<double>& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log2(x);
  }
  return h;
}

}  // namespace

Distribution::Distribution(std::vector<double> p) : p_(std::move(p)) { validate_probabilities(p_); }

Distribution Distribution::uniform(std::size_t n) {
  if (n == 0) throw ValidationError("distribution is empty");
  return Distribution(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

JointDistribution::JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> p)
    : rows_(rows), cols_(cols), p_(std::move(p)) {
  if (p_.size() != rows * cols) {
    throw ShapeError(fmt::format("joint table has {} entries, expected {} x {}", p_.size(), rows, cols));
  }
  validate_probabilities(p_);
}

Distribution JointDistribution::marginal_a() const {
  std::vector<double> m(rows_, 0.0);
  for (std::size_t a = 0; a < rows_; ++a) {
    for (std::size_t b = 0; b < cols_; ++b) m[a] += at(a, b);
  }
  return Distribution(std::move(m));
}

Distribution JointDistribution::marginal_b() const {
  std::vector<double> m(cols_, 0.0);
  for (std::size_t a = 0; a < rows_; ++a) {
    for (std::size_t b = 0; b < cols_; ++b) m[b] += at(a, b);
  }
  return Distribution(std::move(m));
}

JointDistribution isotropic_joint(int d, double qber) {
  check_dim(d);
  if (!(qber >= 0.0 && qber <= 1.0)) throw RangeError(fmt::format("QBER must lie in [0, 1], got {}", qber));
  const auto n = static_cast<std::size_t>(d);
  std::vector<double> p(n * n, qber / (static_cast<double>(d) * (d - 1)));
  for (std::size_t k = 0; k < n; ++k) p[k * n + k] = (1.0 - qber) / d;
  return JointDistribution(n, n, std::move(p));
}

double shannon_entropy(const Distribution& p) { return entropy_of(p.probabilities()); }

double joint_entropy(const JointDistribution& p) {
  double h = 0.0;
  for (std::size_t a = 0; a < p.rows(); ++a) {
    for (std::size_t b = 0; b < p.cols(); ++b) {
      const double x = p.at(a, b);
      if (x > 0.0) h -= x * std::log2(x);
    }
  }
  return h;
}

double mutual_information(const JointDistribution& p) {
  const double i = shannon_entropy(p.marginal_a()) + shannon_entropy(p.marginal_b()) - joint_entropy(p);
  return std::max(i, 0.0);
}

double keymap_information(const JointDistribution& p, std::span<const int> map_a, std::span<const int> map_b) {
  if (map_a.size() != p.rows() || map_b.size() != p.cols()) {
    throw ShapeError(fmt::format("key maps cover {} and {} outcomes, joint table is {} x {}", map_a.size(),
                                 map_b.size(), p.rows(), p.cols()));
  }
  for (auto m : {map_a, map_b}) {
    for (int s : m) {
      if (s < 0) throw RangeError(fmt::format("key symbol {} is negative", s));
    }
  }
  const auto ka = static_cast<std::size_t>(*std::max_element(map_a.begin(), map_a.end())) + 1;
  const auto kb = static_cast<std::size_t>(*std::max_element(map_b.begin(), map_b.end())) + 1;
  std::vector<double> q(ka * kb, 0.0);
  for (std::size_t a = 0; a < p.rows(); ++a) {
    for (std::size_t b = 0; b < p.cols(); ++b) q[map_a[a] * kb + map_b[b]] += p.at(a, b);
  }
  // Summation can drift the total by a few ulps; renormalize before validating.
  double sum = 0.0;
  for (double x : q) sum += x;
  for (double& x : q) x /= sum;
  return mutual_information(JointDistribution(ka, kb, std::move(q)));
}

HolevoGap holevo_gap(double mutual_info, double r_min) {
  const double raw = mutual_info - r_min;
  return {std::max(raw, 0.0), raw, raw < 0.0};
}

JointDistribution sifted_joint(const JointProbMatrix& p) {
  const int d = p.dim();
  const auto n = static_cast<std::size_t>(d);
  std::vector<double> q(n * n, 0.0);
  int available = 0;
  for (int b = 0; b <= d; ++b) {
    if (!p.block_available(b, b)) continue;
    const double total = p.block_sum(b, b);
    if (!(total > 0.0)) continue;
    for (int ka = 0; ka < d; ++ka) {
      for (int kb = 0; kb < d; ++kb) q[ka * n + kb] += p.at({b, ka}, {b, kb}) / total;
    }
    ++available;
  }
  if (available == 0) throw CountsError("no same-basis block is available");
  double sum = 0.0;
  for (double& x : q) sum += (x /= available);
  for (double& x : q) x /= sum;
  return JointDistribution(n, n, std::move(q));
}

// ----------------------------------------------------------------------------

namespace {

SecurityReport finish_report(int d, const EmpiricalQber& eq, const JointProbMatrix& p) {
  SecurityReport r;
  r.dim = d;
  r.qber_per_basis = eq.per_basis;
  r.qber_std_error = eq.qber_std_error;
  if (!eq.qber) throw CountsError("no same-basis block has coincidences; cannot estimate Q");
  r.qber = *eq.qber;
  for (int b : eq.unavailable) {
    r.warnings.push_back(fmt::format("basis {} has no same-basis coincidences and is excluded from Q", b));
  }
  r.q_max = q_max(d);
  const JointDistribution joint = sifted_joint(p);
  r.h_a = shannon_entropy(joint.marginal_a());
  r.h_b = shannon_entropy(joint.marginal_b());
  r.h_ab = joint_entropy(joint);
  r.i_ab = mutual_information(joint);
  try {
    r.r_min = key_rate(d, r.qber);
  } catch (const DomainError&) {
    r.warnings.push_back(fmt::format("Q = {:.6f} is outside the key-rate domain; r_min not reported", r.qber));
  }
  if (r.r_min) {
    r.holevo = holevo_gap(r.i_ab, *r.r_min);
    if (*r.r_min < 0.0) r.warnings.push_back("r_min is negative: no secret key can be distilled at this Q");
    if (r.holevo->clamped) {
      r.warnings.push_back(fmt::format("r_min exceeds I(A:B) by {:.6f}; Holevo gap clamped to 0", -r.holevo->raw));
    }
  }
  return r;
}

}  // namespace

SecurityReport make_report(const CountMatrix& c) { return finish_report(c.dim(), empirical_qber(c), normalize_blocks(c)); }

SecurityReport make_report(const JointProbMatrix& p) {
  // Blocks flagged unavailable hold zeros, so empirical_qber flags them too.
  return finish_report(p.dim(), empirical_qber(to_count_matrix(p)), p);
}

std::string format_report(const SecurityReport& r) {
  std::string out = fmt::format("Security report (d = {})\n", r.dim);
  for (std::size_t b = 0; b < r.qber_per_basis.size(); ++b) {
    if (r.qber_per_basis[b]) {
      out += fmt::format("  Q[basis {}]   = {:.6f}\n", b, *r.qber_per_basis[b]);
    } else {
      out += fmt::format("  Q[basis {}]   = unavailable\n", b);
    }
  }
  out += fmt::format("  Q            = {:.6f}", r.qber);
  if (r.qber_std_error) out += fmt::format(" +/- {:.6f}", *r.qber_std_error);
  out += '\n';
  out += fmt::format("  Q_max        = {:.6f}\n", r.q_max);
  if (r.r_min) {
    out += fmt::format("  r_min        = {:.6f} bits/symbol\n", *r.r_min);
  } else {
    out += "  r_min        = n/a\n";
  }
  out += fmt::format("  H(A)         = {:.6f}\n", r.h_a);
  out += fmt::format("  H(B)         = {:.6f}\n", r.h_b);
  out += fmt::format("  H(A,B)       = {:.6f}\n", r.h_ab);
  out += fmt::format("  I(A:B)       = {:.6f}\n", r.i_ab);
  if (r.holevo) {
    out += fmt::format("  Holevo gap   = {:.6f}{}\n", r.holevo->value,
                       r.holevo->clamped ? fmt::format(" (clamped, raw {:.6f})", r.holevo->raw) : "");
  } else {
    out += "  Holevo gap   = n/a\n";
  }
  for (const auto& w : r.warnings) out += fmt::format("warning: {}\n", w);
  return out;
}

std::string report_csv_row(const SecurityReport& r) {
  return fmt::format("{},{},{},{},{},{}", r.dim, format_double(r.qber), format_double(r.q_max),
                     r.r_min ? format_double(*r.r_min) : "", format_double(r.i_ab),
                     r.holevo ? format_double(r.holevo->value) : "");
}

}  // namespace mubqkd
