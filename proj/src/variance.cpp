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

#include "gecal/variance.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "gecal/error.hpp"
#include "gecal/parallel.hpp"

namespace gecal {

namespace {

constexpr double kMaxGramCondition = 1e12;
constexpr double kMaxTauCondition = 1e10;

double scaled_condition(const Matrix& gram) {
  const Vector d = gram.diagonal().cwiseAbs().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return condition_number(d.asDiagonal() * gram * d.asDiagonal());
}

double svd_condition(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector sv = svd.singularValues();
  if (sv.size() == 0 || !(sv[sv.size() - 1] > 0.0)) return INFINITY;
  return sv[0] / sv[sv.size() - 1];
}

// (1/N) sum_i [gamma s_i + delta_i w_i (U_i - gamma s_i)] with s_i built from pi.
Vector bracket_mean(const CalibrationProblem& base, const Vector& pi, const Vector& lambda,
                    const Matrix& gamma, const Matrix& u) {
  CalibrationProblem p = base;
  p.pi_hat = pi;
  const Matrix s = build_covariates(p);
  const Vector w = weights_at(p, s, lambda);
  Vector total = Vector::Zero(gamma.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const Vector gs = gamma * s.row(i).transpose();
    total += gs;
    if (p.delta[i] != 0.0) total += w[i] * (u.row(i).transpose() - gs);
  }
  return total / static_cast<double>(s.rows());
}

}  // namespace

Matrix gamma_fit(const Matrix& u_resp, const Matrix& s_resp, const Vector& lambda,
                 EntropyKind entropy) {
  Vector fprime(s_resp.rows());
  for (Eigen::Index i = 0; i < s_resp.rows(); ++i) {
    fprime[i] = g_inverse_derivative(entropy, s_resp.row(i).dot(lambda));
  }
  // Columns zeroed as redundant constraints get a zero coefficient.
  std::vector<Eigen::Index> live;
  for (Eigen::Index j = 0; j < s_resp.cols(); ++j)
    if (s_resp.col(j).cwiseAbs().maxCoeff() > 0.0) live.push_back(j);
  const Matrix s_live = s_resp(Eigen::all, live);
  const Matrix gram = s_live.transpose() * fprime.asDiagonal() * s_live;
  const double cond = scaled_condition(gram);
  if (!(cond <= kMaxGramCondition)) {
    std::ostringstream msg;
    msg << "weighted Gram matrix of calibration covariates is singular (condition number "
        << cond << ")";
    fail(ErrorCode::kSingularGram, msg.str());
  }
  const Matrix cross = u_resp.transpose() * fprime.asDiagonal() * s_live;
  const Matrix g_live = gram.ldlt().solve(cross.transpose()).transpose();
  Matrix gamma = Matrix::Zero(u_resp.cols(), s_resp.cols());
  for (std::size_t k = 0; k < live.size(); ++k) gamma.col(live[k]) = g_live.col(static_cast<Eigen::Index>(k));
  return gamma;
}

KappaFit kappa_fit(const KappaInputs& in) {
  if (in.ps.link == nullptr) fail(ErrorCode::kConfig, "kappa needs a fitted propensity model");
  const PropensityLink& link = *in.ps.link;
  const Eigen::Index r = in.ps.phi.size();
  const Eigen::Index q = in.gamma.rows();
  const Eigen::Index n = in.problem.delta.size();
  const Vector& delta = in.problem.delta;

  auto score_mean = [&](const Vector& phi) {
    const Vector pi = link.pi(phi);
    const Matrix h = link.h(phi);
    Vector total = Vector::Zero(r);
    for (Eigen::Index i = 0; i < n; ++i) total += (1.0 - delta[i] / pi[i]) * h.row(i).transpose();
    return Vector(total / static_cast<double>(n));
  };

  KappaFit out;
  out.a.resize(q, r);
  out.b.resize(r, r);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double step = std::max(1e-5, 1e-5 * std::abs(in.ps.phi[j]));
    Vector up = in.ps.phi, down = in.ps.phi;
    up[j] += step;
    down[j] -= step;
    out.a.col(j) = (bracket_mean(in.problem, link.pi(up), in.lambda, in.gamma, in.u) -
                    bracket_mean(in.problem, link.pi(down), in.lambda, in.gamma, in.u)) /
                   (2.0 * step);
    out.b.col(j) = (score_mean(up) - score_mean(down)) / (2.0 * step);
  }

  // A + kappa B = 0, solved through the normal equations kappa (B B^T) = -A B^T.
  const Matrix bbt = out.b * out.b.transpose();
  if (!(svd_condition(bbt) <= kMaxGramCondition)) {
    out.kappa = Matrix::Zero(q, r);
    out.singular = true;
    return out;
  }
  out.kappa = bbt.ldlt().solve(-(out.a * out.b.transpose()).transpose()).transpose();
  return out;
}

InfluenceParts influence_parts(const MissingData& data, const EstimatingFunction& ef,
                               const GecResult& result, const std::optional<PsModelRef>& ps) {
  const Eigen::Index n = data.n();
  const Eigen::Index q = ef.q();
  const Vector& delta = data.delta;
  const Vector& w = result.weight_solution.weights;
  const Vector& pi = result.problem.pi_hat;
  const Matrix& s = result.s;

  const Matrix z_resp =
      assemble_rows(ef, select_rows(data.o, delta), select_rows(data.m, delta));
  const Matrix u_resp = ef.u_rows(result.theta_hat, z_resp);
  Matrix u = Matrix::Zero(n, q);
  for (Eigen::Index i = 0, r = 0; i < n; ++i) {
    if (delta[i] != 0.0) u.row(i) = u_resp.row(r++);
  }

  InfluenceParts parts;
  if (delta.sum() == static_cast<double>(n)) {
    // every unit responds: d_i = U_i whatever gamma is
    parts.gamma_hat = Matrix::Zero(q, s.cols());
  } else {
    parts.gamma_hat = gamma_fit(u_resp, select_rows(s, delta), result.weight_solution.lambda,
                                result.problem.entropy);
  }

  Matrix h;
  if (ps && ps->link != nullptr) {
    KappaInputs in{result.problem, result.weight_solution.lambda, parts.gamma_hat, u, *ps};
    const KappaFit kf = kappa_fit(in);
    parts.kappa_hat = kf.kappa;
    parts.kappa_singular = kf.singular;
    h = ps->link->h(ps->phi);
  }

  parts.d.resize(n, q);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vector gs = parts.gamma_hat * s.row(i).transpose();
    Vector di = gs;
    if (delta[i] != 0.0) di += w[i] * (u.row(i).transpose() - gs);
    if (h.rows() == n) di += (1.0 - delta[i] / pi[i]) * (parts.kappa_hat * h.row(i).transpose());
    parts.d.row(i) = di.transpose();
  }
  parts.tau1_hat =
      ef.weighted_jacobian(result.theta_hat, z_resp, select_rows(w, delta)) / static_cast<double>(n);
  return parts;
}

Matrix influence_functions(const InfluenceParts& parts) {
  if (!(svd_condition(parts.tau1_hat) < kMaxTauCondition)) {
    fail(ErrorCode::kSingularTau, "derivative of the weighted estimating equation is singular");
  }
  const Matrix centered = parts.d.rowwise() - parts.d.colwise().mean();
  const Matrix tau_inv = parts.tau1_hat.inverse();
  return -(centered * tau_inv.transpose());
}

SandwichEstimate sandwich_se(const InfluenceParts& parts) {
  const Matrix psi = influence_functions(parts);
  const double n = static_cast<double>(psi.rows());
  SandwichEstimate out;
  out.cov = psi.transpose() * psi / (n * n);
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  out.se = out.cov.diagonal().cwiseMax(0.0).cwiseSqrt();
  return out;
}

BootstrapEstimate bootstrap_se(std::size_t n_units, const ResampleEstimator& estimator, int b,
                               std::uint64_t seed) {
  if (b < 50) fail(ErrorCode::kConfig, "bootstrap needs at least 50 resamples (got " +
                                           std::to_string(b) + ")");
  if (n_units == 0) fail(ErrorCode::kTooFewRespondents, "bootstrap over an empty sample");
  std::vector<std::optional<Vector>> draws(static_cast<std::size_t>(b));
  parallel_for(draws.size(), [&](std::size_t k) {
    std::mt19937_64 rng(stream_seed(seed, k));
    std::uniform_int_distribution<std::size_t> pick(0, n_units - 1);
    std::vector<std::size_t> units(n_units);
    for (auto& u : units) u = pick(rng);
    try {
      Vector est = estimator(units);
      if (est.allFinite()) draws[k] = std::move(est);
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::kConfig || e.category() == ErrorCategory::kIo) throw;
    }
  });

  BootstrapEstimate out;
  Eigen::Index q = 0;
  for (const auto& d : draws) {
    if (d) {
      ++out.successes;
      q = d->size();
    } else {
      ++out.failures;
    }
  }
  if (out.failures > b / 5) {
    fail(ErrorCode::kTooManyFailures, std::to_string(out.failures) + " of " + std::to_string(b) +
                                          " bootstrap resamples failed");
  }
  Vector mean = Vector::Zero(q);
  for (const auto& d : draws)
    if (d) mean += *d;
  mean /= out.successes;
  Vector ss = Vector::Zero(q);
  for (const auto& d : draws)
    if (d) ss += (*d - mean).cwiseAbs2();
  out.se = (ss / std::max(1, out.successes - 1)).cwiseSqrt();
  return out;
}

}  // namespace gecal
