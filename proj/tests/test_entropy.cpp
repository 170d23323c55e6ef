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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "gecal/entropy.hpp"
#include "gecal/error.hpp"
#include "support.hpp"

using namespace gecal;
using gecal::testing::bisect;
using gecal::testing::central_diff;

namespace {

const EntropyKind kAll[] = {EntropyKind::kSQ, EntropyKind::kEL, EntropyKind::kET,
                            EntropyKind::kHD};

double random_nu(EntropyKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 4.0);
  std::uniform_real_distribution<double> s(-4.0, 4.0);
  switch (kind) {
    case EntropyKind::kEL:
    case EntropyKind::kHD: return -u(rng);
    default: return s(rng);
  }
}

double random_omega(EntropyKind kind, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 6.0);
  std::uniform_real_distribution<double> s(-6.0, 6.0);
  return kind == EntropyKind::kSQ ? s(rng) : u(rng);
}

}  // namespace

TEST_CASE("G values") {
  CHECK(G_value(EntropyKind::kSQ, 2.0) == doctest::Approx(2.0));
  CHECK(G_value(EntropyKind::kET, 1.0) == doctest::Approx(-1.0));
  CHECK(G_value(EntropyKind::kHD, 4.0) == doctest::Approx(-2.0));
  CHECK(G_value(EntropyKind::kEL, 1.0) == doctest::Approx(0.0));
}

TEST_CASE("g values and finite-difference derivative of G") {
  CHECK(g_value(EntropyKind::kEL, 0.5) == doctest::Approx(-2.0));
  CHECK(g_value(EntropyKind::kET, std::exp(1.0)) == doctest::Approx(1.0));
  CHECK(g_value(EntropyKind::kHD, 1.0) == doctest::Approx(-0.5));
  const double fd = central_diff([](double w) { return G_value(EntropyKind::kHD, w); }, 1.0, 1e-6);
  CHECK(std::abs(fd - (-0.5)) <= 1e-6);
  std::mt19937_64 rng(11);
  for (EntropyKind k : kAll) {
    for (int i = 0; i < 50; ++i) {
      const double w = random_omega(k, rng);
      const double d = central_diff([k](double x) { return G_value(k, x); }, w, 1e-6);
      CHECK(std::abs(d - g_value(k, w)) <= 1e-5 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("g inverse") {
  CHECK(g_inverse(EntropyKind::kET, 0.0) == doctest::Approx(1.0));
  CHECK(g_inverse(EntropyKind::kEL, -2.0) == doctest::Approx(0.5));
  const double root = bisect([](double w) { return -1.0 / (2.0 * std::sqrt(w)) + 0.5; }, 0.01, 10.0);
  CHECK(std::abs(g_inverse(EntropyKind::kHD, -0.5) - root) <= 1e-10);
  CHECK_THROWS_AS(g_inverse(EntropyKind::kEL, 0.0), Error);
  CHECK_THROWS_AS(g_inverse(EntropyKind::kHD, 0.3), Error);
}

TEST_CASE("ET overflow guard") {
  try {
    g_inverse(EntropyKind::kET, 701.0);
    FAIL("expected overflow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOverflow);
  }
  CHECK(std::isfinite(g_inverse(EntropyKind::kET, 699.0)));
}

TEST_CASE("F values cross-checked by composition") {
  auto composed = [](EntropyKind k, double nu) {
    const double w = g_inverse(k, nu);
    return -G_value(k, w) + w * nu;
  };
  CHECK(F_value(EntropyKind::kSQ, 3.0) == doctest::Approx(4.5));
  CHECK(composed(EntropyKind::kSQ, 3.0) == doctest::Approx(4.5));
  CHECK(F_value(EntropyKind::kET, 0.0) == doctest::Approx(1.0));
  CHECK(composed(EntropyKind::kET, 0.0) == doctest::Approx(1.0));
  CHECK(F_value(EntropyKind::kHD, -0.5) == doctest::Approx(0.5));
  CHECK(composed(EntropyKind::kHD, -0.5) == doctest::Approx(0.5));
  std::mt19937_64 rng(5);
  for (EntropyKind k : kAll) {
    for (int i = 0; i < 50; ++i) {
      const double nu = random_nu(k, rng);
      CHECK(std::abs(F_value(k, nu) - composed(k, nu)) <= 1e-10 * std::max(1.0, std::abs(F_value(k, nu))));
    }
  }
}

TEST_CASE("conjugate derivative, round trips and Young equality") {
  std::mt19937_64 rng(2024);
  for (EntropyKind k : kAll) {
    for (int i = 0; i < 200; ++i) {
      const double nu = random_nu(k, rng);
      const double dF = central_diff([k](double x) { return F_value(k, x); }, nu, 1e-6);
      CHECK(std::abs(dF - g_inverse(k, nu)) <= 1e-5 * std::max(1.0, std::abs(dF)));
      CHECK(std::abs(g_value(k, g_inverse(k, nu)) - nu) <= 1e-10 * std::max(1.0, std::abs(nu)));
      const double w = random_omega(k, rng);
      CHECK(std::abs(g_inverse(k, g_value(k, w)) - w) <= 1e-10 * std::max(1.0, std::abs(w)));
      const double lhs = G_value(k, w) + F_value(k, g_value(k, w));
      CHECK(std::abs(lhs - w * g_value(k, w)) <= 1e-10 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("g inverse derivative matches finite differences") {
  std::mt19937_64 rng(8);
  for (EntropyKind k : kAll) {
    for (int i = 0; i < 50; ++i) {
      const double nu = random_nu(k, rng);
      const double d = central_diff([k](double x) { return g_inverse(k, x); }, nu, 1e-6);
      CHECK(std::abs(d - g_inverse_derivative(k, nu)) <= 1e-5 * std::max(1.0, std::abs(d)));
    }
  }
}

TEST_CASE("g inverse is strictly increasing") {
  std::mt19937_64 rng(9);
  for (EntropyKind k : kAll) {
    std::vector<double> nus;
    for (int i = 0; i < 100; ++i) nus.push_back(random_nu(k, rng));
    std::sort(nus.begin(), nus.end());
    nus.erase(std::unique(nus.begin(), nus.end()), nus.end());
    for (size_t i = 1; i < nus.size(); ++i) CHECK(g_inverse(k, nus[i]) > g_inverse(k, nus[i - 1]));
  }
}

TEST_CASE("domains") {
  CHECK(entropy_spec(EntropyKind::kEL).nu_domain.hi == 0.0);
  CHECK(entropy_spec(EntropyKind::kHD).omega_domain.lo == 0.0);
  CHECK_FALSE(entropy_spec(EntropyKind::kET).omega_domain.contains(0.0));
  CHECK_THROWS_AS(G_value(EntropyKind::kEL, 0.0), Error);
  CHECK_THROWS_AS(g_value(EntropyKind::kET, -1.0), Error);
  CHECK_THROWS_AS(F_value(EntropyKind::kEL, 0.5), Error);
  CHECK_NOTHROW(G_value(EntropyKind::kSQ, -3.0));
}

TEST_CASE("debias covariate") {
  CHECK(debias_covariate(EntropyKind::kEL, 0.25) == doctest::Approx(-0.25));
  CHECK(debias_covariate(EntropyKind::kET, 0.5) == doctest::Approx(std::log(2.0)));
  CHECK(debias_covariate(EntropyKind::kSQ, 0.2) == doctest::Approx(5.0));
  CHECK(debias_covariate(EntropyKind::kHD, 0.36) == doctest::Approx(-0.3));
  CHECK(debias_covariate(EntropyKind::kET, 1.0) == doctest::Approx(0.0));
  CHECK_THROWS_AS(debias_covariate(EntropyKind::kET, 0.0), Error);
  CHECK_THROWS_AS(debias_covariate(EntropyKind::kET, 1.2), Error);
}

TEST_CASE("entropy tokens") {
  CHECK(parse_entropy("HD") == EntropyKind::kHD);
  CHECK(parse_entropy("et") == EntropyKind::kET);
  CHECK(entropy_token(EntropyKind::kEL) == "el");
  try {
    parse_entropy("kl");
    FAIL("expected config error");
  } catch (const Error& e) {
    CHECK(e.category() == ErrorCategory::kConfig);
  }
}
