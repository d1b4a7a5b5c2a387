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

// Two-qudit states and the trace rule for filter-pair detection.
//
// Alice's physical filter for a listed basis vector phi is conj(phi). With
// that convention the maximally entangled state gives diagonal same-basis
// blocks, since (U (x) U*) leaves it invariant.

#pragma once

#include <vector>

#include "mubqkd/linalg.hpp"
#include "mubqkd/mub.hpp"

namespace mubqkd {

inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-12;
inline constexpr double kPositivityTolerance = 1e-10;

/// Hermitian, unit-trace, positive semidefinite operator.
class DensityOperator {
 public:
  explicit DensityOperator(CMatrix matrix);

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& matrix() const { return rho_; }
  double min_eigenvalue() const { return min_eig_; }
  double purity() const;

 private:
  CMatrix rho_;
  double min_eig_ = 0.0;
};

/// (1/sqrt(d)) sum_i |i>|i> as a density operator on d^2.
DensityOperator maximally_entangled(int d);

/// v |Psi><Psi| + (1 - v) I / d^2. Throws RangeError unless 0 <= v <= 1.
DensityOperator isotropic_state(int d, double visibility);

/// Average error rate of isotropic_state(d, v): (1 - v)(d - 1)/d.
double isotropic_qber(int d, double visibility);

/// Inverse of isotropic_qber. Throws RangeError if the result leaves [0, 1].
double visibility_for_qber(int d, double qber);

enum class Side { A, B };

/// Reduced state of one party of a d x d joint state.
DensityOperator reduced_state(const DensityOperator& joint, int d, Side keep);

Ket conjugate_ket(const Ket& k);

/// tr[(|a><a| (x) |b><b|) rho]. Throws ShapeError unless
/// a.dim() * b.dim() == rho.dim().
double joint_prob(const DensityOperator& rho, const Ket& a, const Ket& b);

/// |<filter|prep>|^2
double pm_overlap_prob(const Ket& prep, const Ket& filter);

/// Table p[basis_a][elem_a][basis_b][elem_b] of probabilities in [0, 1]. Each
/// (basis_a, basis_b) block of d x d entries carries an availability flag,
/// cleared when the block could not be estimated from data.
class JointProbMatrix {
 public:
  explicit JointProbMatrix(int d);

  int dim() const { return d_; }
  int num_bases() const { return d_ + 1; }

  double at(const Setting& a, const Setting& b) const { return p_[index(a, b)]; }
  void set(const Setting& a, const Setting& b, double p);

  bool block_available(int basis_a, int basis_b) const { return available_[basis_a * num_bases() + basis_b]; }
  void set_block_available(int basis_a, int basis_b, bool available) {
    available_[basis_a * num_bases() + basis_b] = available;
  }

  /// Sum of the d x d block for (basis_a, basis_b).
  double block_sum(int basis_a, int basis_b) const;

 private:
  std::size_t index(const Setting& a, const Setting& b) const {
    return static_cast<std::size_t>(setting_index(d_, a)) * num_settings(d_) + setting_index(d_, b);
  }

  int d_;
  std::vector<double> p_;
  std::vector<bool> available_;
};

/// p[a][b] = joint_prob(rho, conj(phi_a), phi_b) over all (d+1)^2 d^2
/// setting pairs.
JointProbMatrix joint_prob_matrix(const DensityOperator& rho, const MubSet& set);

}  // namespace mubqkd
