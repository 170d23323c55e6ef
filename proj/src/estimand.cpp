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

#include "gecal/estimand.hpp"

#include "gecal/error.hpp"

namespace gecal {

Vector EstimatingFunction::assemble(const Vector& o, const Vector& m) const {
  if (assemble_) return assemble_(o, m);
  Vector z(o.size() + m.size());
  z << o, m;
  return z;
}

Matrix EstimatingFunction::u_rows(const Vector& theta, const Matrix& z) const {
  Matrix out(z.rows(), q());
  for (Eigen::Index i = 0; i < z.rows(); ++i) out.row(i) = u_at(theta, z.row(i).transpose()).transpose();
  return out;
}

Matrix EstimatingFunction::weighted_jacobian(const Vector& theta, const Matrix& z,
                                             const Vector& w) const {
  Matrix out = Matrix::Zero(q(), q());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    if (w[i] != 0.0) out += w[i] * jac_at(theta, z.row(i).transpose());
  }
  return out;
}

Vector MeanEf::u_at(const Vector& theta, const Vector& z) const {
  Vector u(1);
  u[0] = z[z.size() - 1] - theta[0];
  return u;
}

Matrix MeanEf::jac_at(const Vector&, const Vector&) const {
  return Matrix::Constant(1, 1, -1.0);
}

Vector OlsEf::regressors(const Vector& z) const {
  if (z.size() != p_ + 1) {
    fail(ErrorCode::kDimensionMismatch, "OLS row needs " + std::to_string(p_ + 1) + " entries");
  }
  if (!intercept_) return z.head(p_);
  Vector x(p_ + 1);
  x[0] = 1.0;
  x.tail(p_) = z.head(p_);
  return x;
}

Vector OlsEf::u_at(const Vector& theta, const Vector& z) const {
  const Vector x = regressors(z);
  return (z[p_] - x.dot(theta)) * x;
}

Matrix OlsEf::jac_at(const Vector&, const Vector& z) const {
  const Vector x = regressors(z);
  return -x * x.transpose();
}

std::vector<std::string> OlsEf::coef_names() const {
  std::vector<std::string> names;
  if (intercept_) names.emplace_back("beta0");
  for (Eigen::Index j = 1; j <= p_; ++j) names.push_back("beta" + std::to_string(j));
  return names;
}

std::unique_ptr<EstimatingFunction> mean_ef() { return std::make_unique<MeanEf>(); }

std::unique_ptr<EstimatingFunction> ols_ef(Eigen::Index p, bool with_intercept) {
  if (p < 1) fail(ErrorCode::kConfig, "OLS target needs at least one covariate");
  return std::make_unique<OlsEf>(p, with_intercept);
}

Matrix assemble_rows(const EstimatingFunction& ef, const Matrix& o, const Matrix& m) {
  if (o.rows() != m.rows()) fail(ErrorCode::kDimensionMismatch, "o and m differ in length");
  if (o.rows() == 0) return Matrix(0, 0);
  const Vector first = ef.assemble(o.row(0).transpose(), m.row(0).transpose());
  Matrix z(o.rows(), first.size());
  z.row(0) = first.transpose();
  for (Eigen::Index i = 1; i < o.rows(); ++i) {
    z.row(i) = ef.assemble(o.row(i).transpose(), m.row(i).transpose()).transpose();
  }
  return z;
}

}  // namespace gecal
