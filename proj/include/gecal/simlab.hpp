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

#ifndef GECAL_SIMLAB_HPP
#define GECAL_SIMLAB_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gecal/linalg.hpp"

namespace gecal {

enum class Setting { kCausal, kSsl, kMisscov };
Setting parse_setting(std::string_view token);  // causal | ssl | misscov
std::string setting_token(Setting setting);

struct SimDesign {
  Setting setting = Setting::kMisscov;
  int or_model = 1;
  int ps_model = 1;
  std::size_t n = 0;  // 0: 1000 causal, 2000 ssl, 500 misscov
  std::size_t n_labeled = 500;  // ssl only; PS2 draws labels at rate n_labeled / n
  int reps = 200;
  std::uint64_t seed = 20240901;
};

// Fills defaults and checks the combination.
SimDesign resolve(SimDesign design);

struct CausalSample {
  Matrix x;
  Vector t;
  Vector y;
  double true_ate = 0.0;
};

struct SslSample {
  Matrix x;
  Vector y;  // observed where delta = 1
  Vector delta;
  Vector beta_true;
};

struct MisscovSample {
  Matrix x1;
  Vector x2;      // complete
  Vector x2_obs;  // NaN where missing
  Vector delta;
  Vector y;
  Vector beta_true;
};

// Treatment probability of the causal designs at one covariate vector.
double causal_propensity(int ps_model, const double* x4);

CausalSample gen_causal(const SimDesign& design, std::mt19937_64& rng);
SslSample gen_ssl(const SimDesign& design, std::mt19937_64& rng);
MisscovSample gen_misscov(const SimDesign& design, std::mt19937_64& rng);

// Least-squares projection of the nonlinear (OR2) outcome on the working
// regressors, from a reference sample.
struct Projection {
  Vector beta;
  Vector se;
};

inline constexpr std::size_t kReferenceRows = 1000000;
Projection projection_reference(Setting setting, std::size_t rows, std::uint64_t seed);
// Cached per process, kReferenceRows rows, fixed seed.
const Vector& or2_beta_true(Setting setting);

enum class Method { kIPW, kAIPW, kET, kHD, kEL, kSQ, kSup, kFull, kCC, kHT };
Method parse_method(std::string_view token);
std::string method_name(Method method);
std::vector<Method> default_methods(Setting setting);

struct MetricRow {
  std::string method;
  std::string coef;
  double truth = 0.0;
  double mean = 0.0;
  double bias = 0.0;
  double se = 0.0;
  double rmse = 0.0;
  double mc_se = 0.0;
  int successes = 0;
  int failures = 0;
};

using MetricTable = std::vector<MetricRow>;

struct ReplicateRecord {
  int replicate = 0;
  std::string method;
  std::string coef;
  double estimate = 0.0;

  bool operator==(const ReplicateRecord&) const = default;
};

struct MonteCarloRun {
  SimDesign design;
  std::vector<std::string> coef_names;
  MetricTable table;
  std::vector<ReplicateRecord> records;
};

MonteCarloRun run_monte_carlo(const SimDesign& design, const std::vector<Method>& methods);

const MetricRow& find_row(const MetricTable& table, std::string_view method, std::string_view coef);

std::string emit_replicates(const std::vector<ReplicateRecord>& records);
std::vector<ReplicateRecord> parse_replicates(std::string_view csv);

}  // namespace gecal

#endif  // GECAL_SIMLAB_HPP
