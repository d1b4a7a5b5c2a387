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

#include "mubqkd/state.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "mubqkd/errors.hpp"

namespace mubqkd {

DensityOperator::DensityOperator(CMatrix matrix) : rho_(std::move(matrix)) {
  if (rho_.rows() != rho_.cols() || rho_.rows() == 0) throw ShapeError("density operator must be square and nonempty");
  const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  if (herm > kHermitianTolerance) {
    throw ValidationError(fmt::format("density operator is not Hermitian (defect {:.3g})", herm));
  }
  const Complex tr = rho_.trace();
  if (std::abs(tr - 1.0) > kTraceTolerance) {
    throw ValidationError(fmt::format("density operator trace is {:.17g}, expected 1", tr.real()));
  }
  // Symmetrize before diagonalizing; the solver reads only one triangle.
  const CMatrix h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  min_eig_ = solver.eigenvalues().minCoeff();
  if (min_eig_ < -kPositivityTolerance) {
    throw ValidationError(fmt::format("density operator has negative eigenvalue {:.3g}", min_eig_));
  }
}

double DensityOperator::purity() const { return (rho_ * rho_).trace().real(); }

DensityOperator maximally_entangled(int d) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
  CVector psi = CVector::Zero(static_cast<Eigen::Index>(d) * d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (int i = 0; i < d; ++i) psi(i * d + i) = amp;
  return DensityOperator(psi * psi.adjoint());
}

DensityOperator isotropic_state(int d, double visibility) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw RangeError(fmt::format("visibility must lie in [0, 1], got {}", visibility));
  }
  const DensityOperator pure = maximally_entangled(d);
  const auto dd = static_cast<Eigen::Index>(d) * d;
  return DensityOperator(visibility * pure.matrix() +
                         ((1.0 - visibility) / static_cast<double>(dd)) * CMatrix::Identity(dd, dd));
}

double isotropic_qber(int d, double visibility) { return (1.0 - visibility) * (d - 1) / d; }

double visibility_for_qber(int d, double qber) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
  const double v = 1.0 - qber * d / (d - 1);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw RangeError(fmt::format("QBER {} is outside the isotropic range [0, {}] for d = {}", qber,
                                 static_cast<double>(d - 1) / d, d));
  }
  return v;
}

DensityOperator reduced_state(const DensityOperator& joint, int d, Side keep) {
  if (joint.dim() != d * d) {
    throw ShapeError(fmt::format("joint state dimension {} is not {}^2", joint.dim(), d));
  }
  const CMatrix& rho = joint.matrix();
  CMatrix out = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      Complex s = 0.0;
      for (int k = 0; k < d; ++k) {
        s += (keep == Side::A) ? rho(i * d + k, j * d + k) : rho(k * d + i, k * d + j);
      }
      out(i, j) = s;
    }
  }
  return DensityOperator(std::move(out));
}

Ket conjugate_ket(const Ket& k) { return Ket(k.amplitudes().conjugate()); }

double joint_prob(const DensityOperator& rho, const Ket& a, const Ket& b) {
  if (a.dim() * b.dim() != rho.dim()) {
    throw ShapeError(fmt::format("filters of dimension {} and {} do not match a joint state of dimension {}", a.dim(),
                                 b.dim(), rho.dim()));
  }
  const CVector w = kron(a.amplitudes(), b.amplitudes());
  const double p = w.dot(rho.matrix() * w).real();
  return std::clamp(p, 0.0, 1.0);
}

double pm_overlap_prob(const Ket& prep, const Ket& filter) {
  if (prep.dim() != filter.dim()) {
    throw ShapeError(fmt::format("prepared state dimension {} differs from filter dimension {}", prep.dim(), filter.dim()));
  }
  return std::min(1.0, std::norm(filter.inner(prep)));
}

JointProbMatrix::JointProbMatrix(int d)
    : d_(d),
      p_(static_cast<std::size_t>(num_settings(d)) * num_settings(d), 0.0),
      available_(static_cast<std::size_t>(d + 1) * (d + 1), true) {
  if (d < 2) throw InvalidDimensionError(fmt::format("dimension must be at least 2, got {}", d));
}

void JointProbMatrix::set(const Setting& a, const Setting& b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw RangeError(fmt::format("joint probability {} outside [0, 1]", p));
  p_[index(a, b)] = p;
}

double JointProbMatrix::block_sum(int basis_a, int basis_b) const {
  double s = 0.0;
  for (int ka = 0; ka < d_; ++ka) {
    for (int kb = 0; kb < d_; ++kb) s += at({basis_a, ka}, {basis_b, kb});
  }
  return s;
}

JointProbMatrix joint_prob_matrix(const DensityOperator& rho, const MubSet& set) {
  const int d = set.dim();
  if (rho.dim() != d * d) {
    throw ShapeError(fmt::format("state dimension {} does not match MUB dimension {}^2", rho.dim(), d));
  }
  JointProbMatrix out(d);
  std::vector<Ket> alice_filters;
  alice_filters.reserve(num_settings(d));
  for (int i = 0; i < num_settings(d); ++i) {
    const Setting s = setting_at(d, i);
    alice_filters.push_back(conjugate_ket(set.vector(s.basis, s.element)));
  }
  for (int i = 0; i < num_settings(d); ++i) {
    for (int j = 0; j < num_settings(d); ++j) {
      const Setting sb = setting_at(d, j);
      out.set(setting_at(d, i), sb, joint_prob(rho, alice_filters[i], set.vector(sb.basis, sb.element)));
    }
  }
  return out;
}

}  // namespace mubqkd
