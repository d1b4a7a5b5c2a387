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

// Figures of merit: error rates, the asymptotic key rate with all d+1 bases,
// its zero crossing, Shannon quantities and the gap attributed to Eve.
//
// All logarithms are base 2. Rates are bits per conclusive sifted symbol.

#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mubqkd/counts.hpp"
#include "mubqkd/mub.hpp"
#include "mubqkd/state.hpp"

namespace mubqkd {

inline constexpr double kDistributionTolerance = 1e-12;
inline constexpr double kQMaxTolerance = 1e-10;

/// Probability that same-basis conclusive outcomes disagree, from the trace
/// formula with Alice's filters conjugated. Throws ShapeError on a dimension
/// mismatch.
double qber_per_basis(const DensityOperator& rho, const Basis& basis);
std::vector<double> qber_all_bases(const DensityOperator& rho, const MubSet& set);

/// Arithmetic mean. Throws ShapeError unless qs has d+1 entries.
double average_qber(std::span<const double> qs, int d);

struct EmpiricalQber {
  int dim = 0;
  /// nullopt for a basis whose same-basis block has no coincidences.
  std::vector<std::optional<double>> per_basis;
  /// Binomial standard error per basis; nullopt when unavailable or when the
  /// matrix holds probabilities rather than counts.
  std::vector<std::optional<double>> std_error;
  std::vector<int> unavailable;
  /// Mean over available bases; nullopt if none is available.
  std::optional<double> qber;
  std::optional<double> qber_std_error;
};

/// Off-diagonal over total coincidences within each same-basis block.
EmpiricalQber empirical_qber(const CountMatrix& c);

/// Lower bound on the key rate. Throws DomainError unless 0 <= Q and
/// (d+1)Q/d < 1, and InvalidDimensionError for d < 2.
double key_rate(int d, double qber);

/// Zero of key_rate(d, .) on (0, d/(d+1)) by bisection to |r| < tol.
/// Throws RangeError for tol <= 0 and NumericError if the bracket does not
/// hold a single sign change.
double q_max(int d, double tol = kQMaxTolerance);

/// Isotropic mutual information between sifted symbols at error rate Q.
double isotropic_mutual_information(int d, double qber);

class Distribution {
 public:
  /// Throws ValidationError on negative, non-finite or non-normalized input.
  explicit Distribution(std::vector<double> p);
  static Distribution uniform(std::size_t n);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  const std::vector<double>& probabilities() const { return p_; }

 private:
  std::vector<double> p_;
};

class JointDistribution {
 public:
  /// Row-major rows x cols table; same validation as Distribution.
  JointDistribution(std::size_t rows, std::size_t cols, std::vector<double> p);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double at(std::size_t a, std::size_t b) const { return p_[a * cols_ + b]; }

  Distribution marginal_a() const;
  Distribution marginal_b() const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> p_;
};

/// Diagonal (1-Q)/d, off-diagonal Q/(d(d-1)).
JointDistribution isotropic_joint(int d, double qber);

double shannon_entropy(const Distribution& p);
double joint_entropy(const JointDistribution& p);
double mutual_information(const JointDistribution& p);

/// Mutual information after mapping each party's outcomes to key symbols.
/// Maps must be total on the outcome alphabets and nonnegative; the key
/// alphabets are sized from the largest symbol used.
double keymap_information(const JointDistribution& p, std::span<const int> map_a, std::span<const int> map_b);

struct HolevoGap {
  /// max(raw, 0).
  double value = 0.0;
  double raw = 0.0;
  /// raw was negative, meaning the key-rate bound exceeded I(A:B).
  bool clamped = false;
};

HolevoGap holevo_gap(double mutual_info, double r_min);

/// Mean of the available same-basis blocks of a block-normalized table.
/// Throws CountsError if no same-basis block is available.
JointDistribution sifted_joint(const JointProbMatrix& p);

struct SecurityReport {
  int dim = 0;
  std::vector<std::optional<double>> qber_per_basis;
  double qber = 0.0;
  std::optional<double> qber_std_error;
  /// nullopt when Q lies outside the domain of the key-rate bound.
  std::optional<double> r_min;
  double q_max = 0.0;
  double h_a = 0.0;
  double h_b = 0.0;
  double h_ab = 0.0;
  double i_ab = 0.0;
  std::optional<HolevoGap> holevo;
  std::vector<std::string> warnings;
};

SecurityReport make_report(const CountMatrix& c);
SecurityReport make_report(const JointProbMatrix& p);

std::string format_report(const SecurityReport& r);

inline constexpr const char* kReportCsvHeader = "d,Q,Q_max,r_min,I_AB,holevo_gap";
/// One row without the trailing newline. Missing values are left empty.
std::string report_csv_row(const SecurityReport& r);

}  // namespace mubqkd
