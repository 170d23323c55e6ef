// Copyright 2026 The gecal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gecal/linalg.hpp"

#include <cmath>
#include <limits>

namespace gecal {

namespace {

template <class Rhs>
Rhs shifted_cholesky_solve(const Matrix& h, const Rhs& rhs, double* shift_out) {
  const Eigen::Index dim = h.rows();
  Eigen::LLT<Matrix> llt(h);
  if (llt.info() == Eigen::Success) {
    *shift_out = 0.0;
    return llt.solve(rhs);
  }
  double tau = 1e-8 * std::abs(h.trace()) / static_cast<double>(dim);
  if (!(tau > 0.0)) tau = 1e-8;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Matrix shifted = h;
    shifted.diagonal().array() += tau;
    llt.compute(shifted);
    if (llt.info() == Eigen::Success) {
      *shift_out = tau;
      return llt.solve(rhs);
    }
    tau *= 10.0;
  }
  *shift_out = std::numeric_limits<double>::infinity();
  return Rhs::Zero(rhs.rows(), rhs.cols());
}

}  // namespace

SymmetricSolve solve_symmetric(const Matrix& h, const Vector& rhs) {
  SymmetricSolve out;
  out.solution = shifted_cholesky_solve(h, rhs, &out.shift);
  return out;
}

Matrix solve_symmetric(const Matrix& h, const Matrix& rhs) {
  double shift = 0.0;
  return shifted_cholesky_solve(h, rhs, &shift);
}

double condition_number(const Matrix& sym) {
  if (sym.rows() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Matrix select_rows(const Matrix& m, const Vector& mask) {
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) count += mask[i] != 0.0;
  Matrix out(count, m.cols());
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) out.row(r++) = m.row(i);
  }
  return out;
}

Vector select_rows(const Vector& v, const Vector& mask) {
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) count += mask[i] != 0.0;
  Vector out(count);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    if (mask[i] != 0.0) out[r++] = v[i];
  }
  return out;
}

}  // namespace gecal
