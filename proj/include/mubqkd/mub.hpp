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

// Qudit kets, orthonormal bases and complete sets of mutually unbiased bases.
//
// For prime d the set is the standard basis plus the eigenbases of X Z^l,
// l = 0..d-1, where Z = sum_i w^i |i><i| and X = sum_i |i+1 mod d><i| with
// w = exp(i 2 pi / d). For d = 4 the five bases are the common eigenbases of
// five commuting classes of two-qubit Pauli operators.

#pragma once

#include <compare>
#include <vector>

#include "mubqkd/linalg.hpp"

namespace mubqkd {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kOrthonormalityTolerance = 1e-12;
inline constexpr double kUnbiasednessTolerance = 1e-10;
inline constexpr double kUnitarityTolerance = 1e-12;

/// Normalized state vector of a single qudit.
class Ket {
 public:
  /// Throws ValidationError unless the squared amplitudes sum to one within
  /// kNormTolerance.
  explicit Ket(CVector amplitudes);

  /// Rescales `amplitudes` to unit norm. Throws on the zero vector.
  static Ket normalized(CVector amplitudes);
  static Ket standard(int dim, int index);

  int dim() const { return static_cast<int>(amps_.size()); }
  const CVector& amplitudes() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }

  /// <this|other>
  Complex inner(const Ket& other) const;

 private:
  CVector amps_;
};

/// One orthonormal basis of a MubSet. `label` is the basis index, 0 being the
/// standard basis.
class Basis {
 public:
  /// Checks shape and orthonormality.
  Basis(int label, std::vector<Ket> vectors);

  /// Checks shape only (d vectors of dimension d). For diagnostics on sets
  /// that are known or suspected to be broken.
  static Basis unchecked(int label, std::vector<Ket> vectors);

  int label() const { return label_; }
  int dim() const { return static_cast<int>(vectors_.size()); }
  const std::vector<Ket>& vectors() const { return vectors_; }
  const Ket& operator[](int k) const { return vectors_[k]; }

  /// Largest | <u|v> - delta_uv | over all vector pairs.
  double orthonormality_defect() const;

  /// Basis vectors as matrix columns.
  CMatrix as_matrix() const;

 private:
  struct NoCheck {};
  Basis(int label, std::vector<Ket> vectors, NoCheck);

  int label_;
  std::vector<Ket> vectors_;
};

/// A complete set of d+1 pairwise mutually unbiased bases.
class MubSet {
 public:
  /// Checks the count (d+1), shapes, orthonormality and unbiasedness.
  explicit MubSet(std::vector<Basis> bases);

  /// Checks count and shapes only.
  static MubSet unchecked(std::vector<Basis> bases);

  int dim() const { return bases_.front().dim(); }
  int size() const { return static_cast<int>(bases_.size()); }
  const std::vector<Basis>& bases() const { return bases_; }
  const Basis& operator[](int beta) const { return bases_[beta]; }
  const Ket& vector(int beta, int k) const { return bases_[beta][k]; }

 private:
  struct NoCheck {};
  MubSet(std::vector<Basis> bases, NoCheck);

  std::vector<Basis> bases_;
};

/// A filter setting: basis index and element index within that basis.
struct Setting {
  int basis = 0;
  int element = 0;

  auto operator<=>(const Setting&) const = default;
};

/// Number of filter settings, d(d+1).
inline int num_settings(int dim) { return dim * (dim + 1); }
inline int setting_index(int dim, const Setting& s) { return s.basis * dim + s.element; }
inline Setting setting_at(int dim, int index) { return {index / dim, index % dim}; }

class UnitaryMatrix {
 public:
  /// Throws ValidationError unless U U^dagger = I within kUnitarityTolerance.
  explicit UnitaryMatrix(CMatrix entries);

  int dim() const { return static_cast<int>(u_.rows()); }
  const CMatrix& matrix() const { return u_; }

 private:
  CMatrix u_;
};

bool is_prime(int n);

/// diag(1, w, ..., w^(d-1)). Throws InvalidDimensionError for d < 2.
UnitaryMatrix weyl_z(int d);

/// Cyclic shift |i> -> |i+1 mod d>. Throws InvalidDimensionError for d < 2.
UnitaryMatrix weyl_x(int d);

/// The d eigenvalues of X Z^l, i.e. the roots of lambda^d = w^(l d(d-1)/2),
/// ordered by phase in [0, 2 pi). Same order as eigenbasis_xzl.
std::vector<Complex> xzl_eigenvalues(int d, int l);

/// Eigenbasis of X Z^l for prime d, labelled l+1. Vector j is built from the
/// phase recursion v_{j+1} = lambda^-1 w^(l j) v_j with v_0 = 1/sqrt(d), so
/// the first amplitude is real-positive and the order follows
/// xzl_eigenvalues.
Basis eigenbasis_xzl(int d, int l);

/// Complete MUB set for d in {2, 3, 4, 5, 7}. Basis 0 is always the standard
/// basis in natural order.
MubSet mub_set(int d);

struct UnbiasednessReport {
  /// max over cross-basis pairs of | |<u|v>|^2 - 1/d |
  double max_deviation = 0.0;
  /// max over bases of orthonormality_defect()
  double max_orthonormality_defect = 0.0;
};

UnbiasednessReport unbiasedness_report(const MubSet& set);

/// Multiplies by a global phase so the first amplitude with modulus above
/// 1e-12 is real and positive.
CVector canonical_phase(CVector v);

}  // namespace mubqkd
