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

#ifndef GECAL_ESTIMAND_HPP
#define GECAL_ESTIMAND_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gecal/linalg.hpp"

namespace gecal {

// An estimating function U(theta; z) with its theta-Jacobian. A full data row
// z is assembled from the always-observed part o and the possibly-missing
// part m; the calibration function b(theta; o) plugs a prediction of m in.
class EstimatingFunction {
 public:
  using Assemble = std::function<Vector(const Vector& o, const Vector& m)>;

  virtual ~EstimatingFunction() = default;

  virtual Eigen::Index q() const = 0;
  virtual Vector u_at(const Vector& theta, const Vector& z) const = 0;
  virtual Matrix jac_at(const Vector& theta, const Vector& z) const = 0;
  virtual std::vector<std::string> coef_names() const = 0;

  // Default layout is z = (o, m).
  Vector assemble(const Vector& o, const Vector& m) const;
  void set_assemble(Assemble assemble) { assemble_ = std::move(assemble); }

  Vector b_at(const Vector& theta, const Vector& o, const Vector& m_hat) const {
    return u_at(theta, assemble(o, m_hat));
  }

  // Rows U(theta; z_i)^T for every row of z.
  Matrix u_rows(const Vector& theta, const Matrix& z) const;
  // sum_i w_i dU/dtheta^T (theta; z_i).
  Matrix weighted_jacobian(const Vector& theta, const Matrix& z, const Vector& w) const;

 private:
  Assemble assemble_;
};

// U = y - theta with z = (y).
class MeanEf final : public EstimatingFunction {
 public:
  Eigen::Index q() const override { return 1; }
  Vector u_at(const Vector& theta, const Vector& z) const override;
  Matrix jac_at(const Vector& theta, const Vector& z) const override;
  std::vector<std::string> coef_names() const override { return {"mean"}; }
};

// U = (y - x'beta) x with z = (covariates..., y); x gets a leading 1 when the
// model has an intercept.
class OlsEf final : public EstimatingFunction {
 public:
  OlsEf(Eigen::Index p, bool with_intercept) : p_(p), intercept_(with_intercept) {}

  Eigen::Index q() const override { return p_ + (intercept_ ? 1 : 0); }
  Vector u_at(const Vector& theta, const Vector& z) const override;
  Matrix jac_at(const Vector& theta, const Vector& z) const override;
  std::vector<std::string> coef_names() const override;

  Vector regressors(const Vector& z) const;

 private:
  Eigen::Index p_;
  bool intercept_;
};

std::unique_ptr<EstimatingFunction> mean_ef();
std::unique_ptr<EstimatingFunction> ols_ef(Eigen::Index p, bool with_intercept);

// Assembles full rows z_i = assemble(o_i, m_i) for all units.
Matrix assemble_rows(const EstimatingFunction& ef, const Matrix& o, const Matrix& m);

}  // namespace gecal

#endif  // GECAL_ESTIMAND_HPP
