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

#include "mubqkd/mub.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string_view>
#include <utility>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"

namespace mubqkd {

namespace {

void require_dimension(int d) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
}

constexpr int kMaxDimension = 7;

}  // namespace

Ket::Ket(CVector amplitudes) : amps_(std::move(amplitudes)) {
  if (amps_.size() == 0) throw ShapeError("ket has no amplitudes");
  const double n = amps_.squaredNorm();
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw ValidationError(fmt::format("ket is not normalized: squared norm {:.17g}", n));
  }
}

Ket Ket::normalized(CVector amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0)) throw ValidationError("cannot normalize a zero vector");
  return Ket(amplitudes / n);
}

Ket Ket::standard(int dim, int index) {
  if (dim < 1 || index < 0 || index >= dim) {
    throw RangeError(fmt::format("standard ket index {} out of range for dimension {}", index, dim));
  }
  CVector v = CVector::Zero(dim);
  v(index) = 1.0;
  return Ket(std::move(v));
}

Complex Ket::inner(const Ket& other) const {
  if (other.dim() != dim()) {
    throw ShapeError(fmt::format("inner product of kets with dimensions {} and {}", dim(), other.dim()));
  }
  return amps_.dot(other.amps_);  // conjugates the left operand
}

// ----------------------------------------------------------------------------

Basis::Basis(int label, std::vector<Ket> vectors, NoCheck) : label_(label), vectors_(std::move(vectors)) {
  const auto d = static_cast<int>(vectors_.size());
  if (d < 1) throw ShapeError("basis has no vectors");
  for (const auto& v : vectors_) {
    if (v.dim() != d) {
      throw ShapeError(fmt::format("basis {} holds {} vectors but a vector has dimension {}", label, d, v.dim()));
    }
  }
}

Basis::Basis(int label, std::vector<Ket> vectors) : Basis(label, std::move(vectors), NoCheck{}) {
  const double defect = orthonormality_defect();
  if (defect > kOrthonormalityTolerance) {
    throw ValidationError(fmt::format("basis {} is not orthonormal (defect {:.3g})", label_, defect));
  }
}

Basis Basis::unchecked(int label, std::vector<Ket> vectors) {
  return Basis(label, std::move(vectors), NoCheck{});
}

double Basis::orthonormality_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < vectors_.size(); ++i) {
    for (std::size_t j = i; j < vectors_.size(); ++j) {
      const Complex ip = vectors_[i].inner(vectors_[j]);
      const double target = (i == j) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(ip - target));
    }
  }
  return worst;
}

CMatrix Basis::as_matrix() const {
  const int d = dim();
  CMatrix m(d, d);
  for (int k = 0; k < d; ++k) m.col(k) = vectors_[k].amplitudes();
  return m;
}

// ----------------------------------------------------------------------------

MubSet::MubSet(std::vector<Basis> bases, NoCheck) : bases_(std::move(bases)) {
  if (bases_.empty()) throw ShapeError("MUB set has no bases");
  const int d = bases_.front().dim();
  if (static_cast<int>(bases_.size()) != d + 1) {
    throw ShapeError(fmt::format("a complete MUB set in dimension {} needs {} bases, got {}", d, d + 1, bases_.size()));
  }
  for (const auto& b : bases_) {
    if (b.dim() != d) {
      throw ShapeError(fmt::format("basis {} has dimension {}, expected {}", b.label(), b.dim(), d));
    }
  }
}

MubSet::MubSet(std::vector<Basis> bases) : MubSet(std::move(bases), NoCheck{}) {
  const auto report = unbiasedness_report(*this);
  if (report.max_orthonormality_defect > kOrthonormalityTolerance) {
    throw ValidationError(
        fmt::format("MUB set contains a non-orthonormal basis (defect {:.3g})", report.max_orthonormality_defect));
  }
  if (report.max_deviation > kUnbiasednessTolerance) {
    throw ValidationError(fmt::format("bases are not mutually unbiased (max deviation {:.3g})", report.max_deviation));
  }
}

MubSet MubSet::unchecked(std::vector<Basis> bases) { return MubSet(std::move(bases), NoCheck{}); }

// ----------------------------------------------------------------------------

UnitaryMatrix::UnitaryMatrix(CMatrix entries) : u_(std::move(entries)) {
  if (u_.rows() != u_.cols() || u_.rows() == 0) throw ShapeError("unitary matrix must be square and nonempty");
  const double defect = (u_ * u_.adjoint() - CMatrix::Identity(u_.rows(), u_.cols())).cwiseAbs().maxCoeff();
  if (defect > kUnitarityTolerance) {
    throw ValidationError(fmt::format("matrix is not unitary (defect {:.3g})", defect));
  }
}

bool is_prime(int n) {
  if (n < 2) return false;
  for (int k = 2; k * k <= n; ++k) {
    if (n % k == 0) return false;
  }
  return true;
}

UnitaryMatrix weyl_z(int d) {
  require_dimension(d);
  CMatrix z = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) z(i, i) = root_of_unity(d, i);
  return UnitaryMatrix(std::move(z));
}

UnitaryMatrix weyl_x(int d) {
  require_dimension(d);
  CMatrix x = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) x((i + 1) % d, i) = 1.0;
  return UnitaryMatrix(std::move(x));
}

std::vector<Complex> xzl_eigenvalues(int d, int l) {
  require_dimension(d);
  if (l < 0 || l >= d) throw RangeError(fmt::format("l = {} out of range [0, {}]", l, d - 1));
  // lambda^d = w^(l d (d-1) / 2); d(d-1)/2 is an integer for every d.
  const long long rhs_power = (static_cast<long long>(l) * (static_cast<long long>(d) * (d - 1) / 2)) % d;
  const double rhs_phase = 2.0 * std::numbers::pi * static_cast<double>(rhs_power) / d;
  std::vector<Complex> lambdas;
  lambdas.reserve(d);
  for (int m = 0; m < d; ++m) {
    lambdas.push_back(std::polar(1.0, (rhs_phase + 2.0 * std::numbers::pi * m) / d));
  }
  return lambdas;
}

Basis eigenbasis_xzl(int d, int l) {
  require_dimension(d);
  if (!is_prime(d)) {
    throw UnsupportedDimensionError(fmt::format("X Z^l eigenbases form a MUB set only for prime d, got {}", d));
  }
  const auto lambdas = xzl_eigenvalues(d, l);
  const double v0 = 1.0 / std::sqrt(static_cast<double>(d));

  std::vector<Ket> vectors;
  vectors.reserve(d);
  for (const Complex& lambda : lambdas) {
    CVector v(d);
    v(0) = v0;
    const Complex inv_lambda = std::conj(lambda);
    for (int j = 0; j + 1 < d; ++j) {
      v(j + 1) = inv_lambda * root_of_unity(d, static_cast<long long>(l) * j) * v(j);
    }
    vectors.push_back(Ket::normalized(std::move(v)));
  }
  return Basis(l + 1, std::move(vectors));
}

CVector canonical_phase(CVector v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double mag = std::abs(v(i));
    if (mag > 1e-12) {
      v *= std::conj(v(i)) / mag;
      v(i) = mag;
      break;
    }
  }
  return v;
}

namespace {

// Two-qubit Pauli operators as strings over {I,X,Y,Z}, first character on the
// most significant qubit.
CMatrix pauli(char c) {
  CMatrix m(2, 2);
  const Complex i{0.0, 1.0};
  switch (c) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -i, i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw ConstructionError(fmt::format("unknown Pauli symbol '{}'", c));
  }
  return m;
}

CMatrix pauli_string(std::string_view s) { return kron(pauli(s[0]), pauli(s[1])); }

// Symplectic (x, z) bits of a single-qubit Pauli.
std::pair<int, int> symplectic(char c) {
  switch (c) {
    case 'I': return {0, 0};
    case 'X': return {1, 0};
    case 'Y': return {1, 1};
    case 'Z': return {0, 1};
    default: throw ConstructionError(fmt::format("unknown Pauli symbol '{}'", c));
  }
}

// Two-qubit Pauli as a 4-bit symplectic vector (x1 z1 x2 z2).
int pauli_code(std::string_view s) {
  const auto [x1, z1] = symplectic(s[0]);
  const auto [x2, z2] = symplectic(s[1]);
  return (x1 << 3) | (z1 << 2) | (x2 << 1) | z2;
}

bool commute(int a, int b) {
  // Symplectic form: sum over qubits of x_a z_b + z_a x_b (mod 2).
  const int ax1 = (a >> 3) & 1, az1 = (a >> 2) & 1, ax2 = (a >> 1) & 1, az2 = a & 1;
  const int bx1 = (b >> 3) & 1, bz1 = (b >> 2) & 1, bx2 = (b >> 1) & 1, bz2 = b & 1;
  return ((ax1 * bz1 + az1 * bx1 + ax2 * bz2 + az2 * bx2) % 2) == 0;
}

// Generators of the five commuting classes partitioning the 15 non-identity
// two-qubit Paulis. The third element of each class is the product of the two
// generators.
constexpr std::array<std::array<std::string_view, 2>, 5> kFourDimClasses{{
    {"ZI", "IZ"},
    {"XI", "IX"},
    {"YI", "IY"},
    {"XY", "YZ"},
    {"YX", "ZY"},
}};

void check_four_dim_partition() {
  std::set<int> seen;
  for (const auto& cls : kFourDimClasses) {
    const int g1 = pauli_code(cls[0]);
    const int g2 = pauli_code(cls[1]);
    if (!commute(g1, g2)) {
      throw ConstructionError(fmt::format("class generators {} and {} do not commute", cls[0], cls[1]));
    }
    for (int member : {g1, g2, g1 ^ g2}) {
      if (member == 0 || !seen.insert(member).second) {
        throw ConstructionError("d = 4 commuting classes do not partition the two-qubit Paulis");
      }
    }
  }
  if (seen.size() != 15) throw ConstructionError("d = 4 commuting classes do not cover all 15 Paulis");
}

Basis common_eigenbasis(int label, std::string_view g1, std::string_view g2) {
  const CMatrix id = CMatrix::Identity(4, 4);
  const CMatrix p1 = pauli_string(g1);
  const CMatrix p2 = pauli_string(g2);
  std::vector<Ket> vectors;
  for (int s1 : {+1, -1}) {
    for (int s2 : {+1, -1}) {
      // Rank-one projector onto the joint (s1, s2) eigenspace.
      const CMatrix proj = 0.25 * (id + double(s1) * p1) * (id + double(s2) * p2);
      Eigen::Index best = 0;
      proj.colwise().norm().maxCoeff(&best);
      vectors.push_back(Ket::normalized(canonical_phase(proj.col(best))));
    }
  }
  return Basis(label, std::move(vectors));
}

MubSet four_dim_mub_set() {
  check_four_dim_partition();
  std::vector<Basis> bases;
  for (std::size_t c = 0; c < kFourDimClasses.size(); ++c) {
    bases.push_back(common_eigenbasis(static_cast<int>(c), kFourDimClasses[c][0], kFourDimClasses[c][1]));
  }
  return MubSet::unchecked(std::move(bases));
}

MubSet prime_mub_set(int d) {
  std::vector<Basis> bases;
  std::vector<Ket> standard;
  for (int k = 0; k < d; ++k) standard.push_back(Ket::standard(d, k));
  bases.emplace_back(0, std::move(standard));
  for (int l = 0; l < d; ++l) bases.push_back(eigenbasis_xzl(d, l));
  return MubSet::unchecked(std::move(bases));
}

}  // namespace

MubSet mub_set(int d) {
  require_dimension(d);
  if (d > kMaxDimension || !(is_prime(d) || d == 4)) {
    throw UnsupportedDimensionError(fmt::format("no built-in MUB construction for d = {} (supported: 2, 3, 4, 5, 7)", d));
  }
  MubSet set = (d == 4) ? four_dim_mub_set() : prime_mub_set(d);
  const auto report = unbiasedness_report(set);
  if (report.max_deviation > kUnbiasednessTolerance || report.max_orthonormality_defect > kOrthonormalityTolerance) {
    throw ConstructionError(fmt::format("constructed d = {} set fails validation (deviation {:.3g}, defect {:.3g})", d,
                                        report.max_deviation, report.max_orthonormality_defect));
  }
  return set;
}

UnbiasednessReport unbiasedness_report(const MubSet& set) {
  UnbiasednessReport report;
  const int d = set.dim();
  const double target = 1.0 / d;
  for (int a = 0; a < set.size(); ++a) {
    report.max_orthonormality_defect = std::max(report.max_orthonormality_defect, set[a].orthonormality_defect());
    for (int b = a + 1; b < set.size(); ++b) {
      for (const auto& u : set[a].vectors()) {
        for (const auto& v : set[b].vectors()) {
          report.max_deviation = std::max(report.max_deviation, std::abs(std::norm(u.inner(v)) - target));
        }
      }
    }
  }
  return report;
}

}  // namespace mubqkd
