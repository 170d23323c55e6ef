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

#ifndef GECAL_ENTROPY_HPP
#define GECAL_ENTROPY_HPP

#include <string>
#include <string_view>

namespace gecal {

// The generalized entropies G supported by the calibration solver.
//   kSQ  squared loss           G(w) = w^2/2
//   kEL  empirical likelihood   G(w) = -log w
//   kET  exponential tilting    G(w) = w log w - w
//   kHD  Hellinger distance     G(w) = -sqrt(w)
enum class EntropyKind { kSQ, kEL, kET, kHD };

// Open interval (lo, hi); infinite ends are represented by +-infinity.
struct OpenInterval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

struct EntropySpec {
  EntropyKind kind;
  OpenInterval omega_domain;  // domain of G and g
  OpenInterval nu_domain;     // domain of g^-1 and F
};

EntropySpec entropy_spec(EntropyKind kind);

// Case-insensitive {"sq","el","et","hd"}; throws ConfigError otherwise.
EntropyKind parse_entropy(std::string_view token);
std::string entropy_token(EntropyKind kind);

// Arguments ET g^-1 refuses to exponentiate; signals a diverging dual iterate.
inline constexpr double kExpOverflowGuard = 700.0;

double G_value(EntropyKind kind, double omega);
double g_value(EntropyKind kind, double omega);
double g_inverse(EntropyKind kind, double nu);

// Derivative of g^-1, written f' elsewhere; the dual Hessian weight.
double g_inverse_derivative(EntropyKind kind, double nu);

// Convex conjugate F(nu) = -G(g^-1(nu)) + nu g^-1(nu).
double F_value(EntropyKind kind, double nu);

// Debiasing covariate g(1/pi) for a propensity pi in (0, 1].
double debias_covariate(EntropyKind kind, double pi);

}  // namespace gecal

#endif  // GECAL_ENTROPY_HPP
