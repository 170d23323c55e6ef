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

#include "gecal/entropy.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

#include "gecal/error.hpp"

namespace gecal {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_omega(EntropyKind kind, double omega) {
  if (!entropy_spec(kind).omega_domain.contains(omega)) {
    std::ostringstream msg;
    msg << "weight " << omega << " outside the domain of the "
        << entropy_token(kind) << " entropy";
    fail(ErrorCode::kDomain, msg.str());
  }
}

void check_nu(EntropyKind kind, double nu) {
  if (!entropy_spec(kind).nu_domain.contains(nu)) {
    std::ostringstream msg;
    msg << "dual argument " << nu << " outside the domain of the "
        << entropy_token(kind) << " inverse link";
    fail(ErrorCode::kDomain, msg.str());
  }
}

}  // namespace

EntropySpec entropy_spec(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::kSQ: return {kind, {-kInf, kInf}, {-kInf, kInf}};
    case EntropyKind::kEL: return {kind, {0.0, kInf}, {-kInf, 0.0}};
    case EntropyKind::kET: return {kind, {0.0, kInf}, {-kInf, kInf}};
    case EntropyKind::kHD: return {kind, {0.0, kInf}, {-kInf, 0.0}};
  }
  fail(ErrorCode::kConfig, "unknown entropy");
}

EntropyKind parse_entropy(std::string_view token) {
  std::string lower;
  for (char c : token) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (lower == "sq") return EntropyKind::kSQ;
  if (lower == "el") return EntropyKind::kEL;
  if (lower == "et") return EntropyKind::kET;
  if (lower == "hd") return EntropyKind::kHD;
  fail(ErrorCode::kConfig, "unknown entropy '" + std::string(token) +
                               "'; use one of sq, el, et, hd");
}

std::string entropy_token(EntropyKind kind) {
  switch (kind) {
    case EntropyKind::kSQ: return "sq";
    case EntropyKind::kEL: return "el";
    case EntropyKind::kET: return "et";
    case EntropyKind::kHD: return "hd";
  }
  return "?";
}

double G_value(EntropyKind kind, double omega) {
  check_omega(kind, omega);
  switch (kind) {
    case EntropyKind::kSQ: return 0.5 * omega * omega;
    case EntropyKind::kEL: return -std::log(omega);
    case EntropyKind::kET: return omega * std::log(omega) - omega;
    case EntropyKind::kHD: return -std::sqrt(omega);
  }
  return 0.0;
}

double g_value(EntropyKind kind, double omega) {
  check_omega(kind, omega);
  switch (kind) {
    case EntropyKind::kSQ: return omega;
    case EntropyKind::kEL: return -1.0 / omega;
    case EntropyKind::kET: return std::log(omega);
    case EntropyKind::kHD: return -0.5 / std::sqrt(omega);
  }
  return 0.0;
}

double g_inverse(EntropyKind kind, double nu) {
  check_nu(kind, nu);
  switch (kind) {
    case EntropyKind::kSQ: return nu;
    case EntropyKind::kEL: return -1.0 / nu;
    case EntropyKind::kET:
      if (nu > kExpOverflowGuard) {
        fail(ErrorCode::kOverflow, "exp(" + std::to_string(nu) + ") overflows");
      }
      return std::exp(nu);
    case EntropyKind::kHD: return 0.25 / (nu * nu);
  }
  return 0.0;
}

double g_inverse_derivative(EntropyKind kind, double nu) {
  check_nu(kind, nu);
  switch (kind) {
    case EntropyKind::kSQ: return 1.0;
    case EntropyKind::kEL: return 1.0 / (nu * nu);
    case EntropyKind::kET:
      if (nu > kExpOverflowGuard) {
        fail(ErrorCode::kOverflow, "exp(" + std::to_string(nu) + ") overflows");
      }
      return std::exp(nu);
    case EntropyKind::kHD: return -0.5 / (nu * nu * nu);
  }
  return 0.0;
}

double F_value(EntropyKind kind, double nu) {
  check_nu(kind, nu);
  switch (kind) {
    case EntropyKind::kSQ: return 0.5 * nu * nu;
    case EntropyKind::kEL: return -std::log(-nu) - 1.0;
    case EntropyKind::kET:
      if (nu > kExpOverflowGuard) {
        fail(ErrorCode::kOverflow, "exp(" + std::to_string(nu) + ") overflows");
      }
      return std::exp(nu);
    case EntropyKind::kHD: return -0.25 / nu;
  }
  return 0.0;
}

double debias_covariate(EntropyKind kind, double pi) {
  if (!(pi > 0.0 && pi <= 1.0)) {
    std::ostringstream msg;
    msg << "propensity " << pi << " outside (0, 1]";
    fail(ErrorCode::kDomain, msg.str());
  }
  // Closed forms of g(1/pi); the HD entry is -sqrt(pi)/2 exactly.
  switch (kind) {
    case EntropyKind::kSQ: return 1.0 / pi;
    case EntropyKind::kEL: return -pi;
    case EntropyKind::kET: return -std::log(pi);
    case EntropyKind::kHD: return -0.5 * std::sqrt(pi);
  }
  return 0.0;
}

}  // namespace gecal
