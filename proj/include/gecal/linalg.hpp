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

#ifndef GECAL_LINALG_HPP
#define GECAL_LINALG_HPP

#include <Eigen/Dense>

namespace gecal {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SymmetricSolve {
  Vector solution;
  double shift = 0.0;  // Levenberg shift that was needed, 0 if none.
};

// Solves H x = rhs for symmetric H via Cholesky. When the factorization fails
// the system is shifted by tau*I, tau starting at 1e-8*trace(H)/dim and growing
// tenfold per failure.
SymmetricSolve solve_symmetric(const Matrix& h, const Vector& rhs);

// Same, for a matrix right-hand side.
Matrix solve_symmetric(const Matrix& h, const Matrix& rhs);

// Ratio of extreme eigenvalues of a symmetric PSD matrix; +inf when the
// smallest eigenvalue is not positive.
double condition_number(const Matrix& sym);

// Returns the rows of `m` whose mask entry is nonzero.
Matrix select_rows(const Matrix& m, const Vector& mask);
Vector select_rows(const Vector& v, const Vector& mask);

inline double sup_norm(const Vector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace gecal

#endif  // GECAL_LINALG_HPP
