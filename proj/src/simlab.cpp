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

#include "gecal/simlab.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <mutex>

#include "gecal/apps.hpp"
#include "gecal/error.hpp"
#include "gecal/estimand.hpp"
#include "gecal/parallel.hpp"

namespace gecal {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kReferenceSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kFoldStream = 0x6a09e667f3bcc909ULL;

double expit(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double clip3(double v) { return std::max(-3.0, std::min(3.0, v)); }

double causal_h(double v) {
  return std::pow(v - 1.0, 3) - v * v + v / (1.0 + std::exp(clip3(v))) + 10.0;
}

double ssl_outcome(int or_model, const double* x, double eps) {
  double y = 1.0;
  for (int j = 0; j < 4; ++j) {
    y += x[j];
    if (or_model == 2) y += x[j] * x[j] * x[j] - x[j] * x[j] + std::exp(x[j]);
  }
  return y + eps;
}

double misscov_outcome(int or_model, double x1, double x2, double eps) {
  if (or_model == 1) return 1.0 + x1 + 2.0 * x2 + eps;
  return 0.5 + 2.0 * std::sin(kPi * x1) - 1.5 * std::cos(2.0 * kPi * x1) +
         0.25 * x1 * x1 * x1 + x2 + 2.0 * eps;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

Setting parse_setting(std::string_view token) {
  const std::string t = lower(token);
  if (t == "causal") return Setting::kCausal;
  if (t == "ssl") return Setting::kSsl;
  if (t == "misscov") return Setting::kMisscov;
  fail(ErrorCode::kConfig, "unknown setting '" + std::string(token) + "'; use causal, ssl or misscov");
}

std::string setting_token(Setting setting) {
  switch (setting) {
    case Setting::kCausal: return "causal";
    case Setting::kSsl: return "ssl";
    case Setting::kMisscov: return "misscov";
  }
  return "?";
}

SimDesign resolve(SimDesign d) {
  if (d.n == 0) {
    d.n = d.setting == Setting::kCausal ? 1000 : d.setting == Setting::kSsl ? 2000 : 500;
  }
  if (d.or_model != 1 && d.or_model != 2) fail(ErrorCode::kConfig, "--or must be 1 or 2");
  if (d.ps_model != 1 && d.ps_model != 2) fail(ErrorCode::kConfig, "--ps must be 1 or 2");
  if (d.n < 50) fail(ErrorCode::kConfig, "simulations need at least 50 units");
  if (d.reps < 2) fail(ErrorCode::kConfig, "--reps must be at least 2");
  if (d.setting == Setting::kSsl && (d.n_labeled < 6 || d.n_labeled >= d.n)) {
    fail(ErrorCode::kConfig, "ssl needs 6 <= n_labeled < n");
  }
  return d;
}

double causal_propensity(int ps_model, const double* x) {
  const double eta = ps_model == 1 ? -0.25 + x[0] + 0.5 * x[1] - 0.5 * x[2] - 0.1 * x[3]
                                   : x[0] - 0.5 * x[0] * x[1] - x[2] * x[2] + 0.5 * x[3] * x[3] * x[3];
  return expit(eta);
}

CausalSample gen_causal(const SimDesign& design, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(design.n);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  CausalSample s;
  s.x.resize(n, 4);
  s.t.resize(n);
  s.y.resize(n);
  s.true_ate = design.or_model == 1 ? 1.0 : 10.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double x[4];
    for (double& v : x) v = normal(rng);
    const double e1 = normal(rng);
    const double e0 = normal(rng);
    const double sum = x[0] + x[1] + x[2] + x[3];
    double m1, m0;
    if (design.or_model == 1) {
      m1 = 1.0 + sum;
      m0 = sum;
    } else {
      double h = 0.0;
      for (double v : x) h += causal_h(v);
      m1 = 10.0 + sum + 0.5 * h;
      m0 = sum + 0.5 * h;
    }
    const double t = unif(rng) < causal_propensity(design.ps_model, x) ? 1.0 : 0.0;
    for (int j = 0; j < 4; ++j) s.x(i, j) = x[j];
    s.t[i] = t;
    s.y[i] = t == 1.0 ? m1 + e1 : m0 + e0;
  }
  return s;
}

SslSample gen_ssl(const SimDesign& design, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(design.n);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  const double rate = static_cast<double>(design.n_labeled) / static_cast<double>(design.n);
  SslSample s;
  s.x.resize(n, 4);
  s.y.resize(n);
  s.delta.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double x[4];
    for (double& v : x) v = normal(rng);
    const double eps = normal(rng);
    const double p = design.ps_model == 1
                         ? expit(-1.0 - x[0] - 0.5 * x[1] + 0.5 * x[2] + 0.1 * x[3])
                         : rate;
    for (int j = 0; j < 4; ++j) s.x(i, j) = x[j];
    s.y[i] = ssl_outcome(design.or_model, x, eps);
    s.delta[i] = unif(rng) < p ? 1.0 : 0.0;
  }
  s.beta_true = design.or_model == 1 ? Vector(Vector::Ones(5)) : or2_beta_true(Setting::kSsl);
  return s;
}

MisscovSample gen_misscov(const SimDesign& design, std::mt19937_64& rng) {
  const auto n = static_cast<Eigen::Index>(design.n);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif;
  MisscovSample s;
  s.x1.resize(n, 1);
  s.x2.resize(n);
  s.x2_obs.resize(n);
  s.delta.resize(n);
  s.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x1 = normal(rng);
    const double x2 = unif(rng) < 0.5 ? 1.0 : 0.0;
    const double y = misscov_outcome(design.or_model, x1, x2, normal(rng));
    const double eta = design.ps_model == 1 ? -1.0 + 0.5 * x1 + 0.5 * y : -1.0;
    const double d = unif(rng) < expit(eta) ? 1.0 : 0.0;
    s.x1(i, 0) = x1;
    s.x2[i] = x2;
    s.x2_obs[i] = d == 1.0 ? x2 : NAN;
    s.delta[i] = d;
    s.y[i] = y;
  }
  s.beta_true = design.or_model == 1 ? Vector((Vector(3) << 1.0, 1.0, 2.0).finished())
                                     : or2_beta_true(Setting::kMisscov);
  return s;
}

Projection projection_reference(Setting setting, std::size_t rows, std::uint64_t seed) {
  if (setting == Setting::kCausal) fail(ErrorCode::kConfig, "no projection target for causal designs");
  const Eigen::Index k = setting == Setting::kSsl ? 5 : 3;
  auto draw = [&](std::mt19937_64& rng, Vector& z, double& y) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    z[0] = 1.0;
    if (setting == Setting::kSsl) {
      double x[4];
      for (double& v : x) v = normal(rng);
      y = ssl_outcome(2, x, normal(rng));
      for (int j = 0; j < 4; ++j) z[j + 1] = x[j];
    } else {
      const double x1 = normal(rng);
      const double x2 = unif(rng) < 0.5 ? 1.0 : 0.0;
      y = misscov_outcome(2, x1, x2, normal(rng));
      z[1] = x1;
      z[2] = x2;
    }
  };
  Matrix xtx = Matrix::Zero(k, k);
  Vector xty = Vector::Zero(k);
  Vector z(k);
  double y = 0.0;
  std::mt19937_64 rng(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    draw(rng, z, y);
    xtx.selfadjointView<Eigen::Lower>().rankUpdate(z);
    xty += y * z;
  }
  xtx = xtx.selfadjointView<Eigen::Lower>();
  const Eigen::LDLT<Matrix> ldlt(xtx);
  Projection out;
  out.beta = ldlt.solve(xty);
  // Second pass for the heteroskedasticity-robust spread.
  Matrix meat = Matrix::Zero(k, k);
  rng.seed(seed);
  for (std::size_t r = 0; r < rows; ++r) {
    draw(rng, z, y);
    const double e = y - z.dot(out.beta);
    meat.selfadjointView<Eigen::Lower>().rankUpdate(z, e * e);
  }
  meat = meat.selfadjointView<Eigen::Lower>();
  const Matrix bread = ldlt.solve(Matrix::Identity(k, k));
  out.se = (bread * meat * bread).diagonal().cwiseSqrt();
  return out;
}

const Vector& or2_beta_true(Setting setting) {
  static std::once_flag ssl_once, mc_once;
  static Vector ssl_beta, mc_beta;
  if (setting == Setting::kSsl) {
    std::call_once(ssl_once, [] { ssl_beta = projection_reference(Setting::kSsl, kReferenceRows, kReferenceSeed).beta; });
    return ssl_beta;
  }
  if (setting == Setting::kMisscov) {
    std::call_once(mc_once, [] { mc_beta = projection_reference(Setting::kMisscov, kReferenceRows, kReferenceSeed).beta; });
    return mc_beta;
  }
  fail(ErrorCode::kConfig, "no projection target for causal designs");
}

Method parse_method(std::string_view token) {
  const std::string t = lower(token);
  if (t == "ipw") return Method::kIPW;
  if (t == "aipw") return Method::kAIPW;
  if (t == "et") return Method::kET;
  if (t == "hd") return Method::kHD;
  if (t == "el") return Method::kEL;
  if (t == "sq") return Method::kSQ;
  if (t == "sup") return Method::kSup;
  if (t == "full") return Method::kFull;
  if (t == "cc") return Method::kCC;
  if (t == "ht") return Method::kHT;
  fail(ErrorCode::kConfig, "unknown method '" + std::string(token) +
                               "'; use ipw, aipw, et, hd, el, sq, sup, full, cc or ht");
}

std::string method_name(Method method) {
  switch (method) {
    case Method::kIPW: return "IPW";
    case Method::kAIPW: return "AIPW";
    case Method::kET: return "ET";
    case Method::kHD: return "HD";
    case Method::kEL: return "EL";
    case Method::kSQ: return "SQ";
    case Method::kSup: return "Sup";
    case Method::kFull: return "Full";
    case Method::kCC: return "CC";
    case Method::kHT: return "HT";
  }
  return "?";
}

std::vector<Method> default_methods(Setting setting) {
  switch (setting) {
    case Setting::kCausal: return {Method::kIPW, Method::kAIPW, Method::kET, Method::kHD};
    case Setting::kSsl: return {Method::kSup, Method::kET, Method::kHD};
    case Setting::kMisscov:
      return {Method::kFull, Method::kCC, Method::kHT, Method::kAIPW, Method::kHD};
  }
  return {};
}

namespace {

std::optional<EntropyKind> method_entropy(Method m) {
  switch (m) {
    case Method::kET: return EntropyKind::kET;
    case Method::kHD: return EntropyKind::kHD;
    case Method::kEL: return EntropyKind::kEL;
    case Method::kSQ: return EntropyKind::kSQ;
    default: return std::nullopt;
  }
}

BaselineKind method_baseline(Method m, Setting setting) {
  switch (m) {
    case Method::kIPW:
    case Method::kHT: return BaselineKind::kIPW;
    case Method::kAIPW: return BaselineKind::kAIPW;
    case Method::kSup:
    case Method::kCC: return BaselineKind::kCC;
    case Method::kFull:
      if (setting == Setting::kMisscov) return BaselineKind::kFull;
      break;
    default: break;
  }
  fail(ErrorCode::kConfig, "method " + method_name(m) + " is not available for " +
                               setting_token(setting) + " simulations");
}

// Simulation settings: GAM-style additive splines for continuous outcomes,
// logistic predictions for the binary covariate.
AppConfig sim_config(Setting setting, std::uint64_t fold_seed) {
  AppConfig c;
  c.seed = fold_seed;
  c.se = SeMethod::kNone;
  if (setting != Setting::kMisscov) c.family = PredictorFamily::kSplineAdditive;
  return c;
}

struct Replicate {
  Vector truth;
  std::vector<std::optional<Vector>> estimates;  // per method
};

Replicate run_replicate(const SimDesign& d, const std::vector<Method>& methods, int r) {
  std::mt19937_64 rng(stream_seed(d.seed, static_cast<std::uint64_t>(r)));
  const AppConfig base = sim_config(d.setting, splitmix64(stream_seed(d.seed ^ kFoldStream, r)));
  Replicate out;
  out.estimates.resize(methods.size());

  auto attempt = [&](std::size_t k, const std::function<Vector()>& fn) {
    try {
      out.estimates[k] = fn();
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::kConfig || e.category() == ErrorCategory::kIo) throw;
    }
  };

  switch (d.setting) {
    case Setting::kCausal: {
      const CausalSample s = gen_causal(d, rng);
      out.truth = Vector::Constant(1, s.true_ate);
      for (std::size_t k = 0; k < methods.size(); ++k) {
        attempt(k, [&] {
          AppConfig c = base;
          if (auto ent = method_entropy(methods[k])) {
            c.entropy = *ent;
            return Vector(Vector::Constant(1, ate_estimate(s.x, s.t, s.y, c).ate));
          }
          return Vector(Vector::Constant(
              1, ate_baseline(s.x, s.t, s.y, method_baseline(methods[k], d.setting), c)));
        });
      }
      break;
    }
    case Setting::kSsl: {
      const SslSample s = gen_ssl(d, rng);
      out.truth = s.beta_true;
      std::vector<Eigen::Index> lab, unl;
      for (Eigen::Index i = 0; i < s.delta.size(); ++i) (s.delta[i] == 1.0 ? lab : unl).push_back(i);
      const Matrix xl = s.x(lab, Eigen::all);
      const Vector yl = s.y(lab);
      const Matrix xu = s.x(unl, Eigen::all);
      const Mechanism mech = d.ps_model == 1 ? Mechanism::kMar : Mechanism::kMcar;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        attempt(k, [&] {
          AppConfig c = base;
          if (auto ent = method_entropy(methods[k])) {
            c.entropy = *ent;
            return ssl_estimate(xl, yl, xu, mech, c).gec.theta_hat;
          }
          return ssl_baseline(xl, yl, xu, mech, method_baseline(methods[k], d.setting), c);
        });
      }
      break;
    }
    case Setting::kMisscov: {
      const MisscovSample s = gen_misscov(d, rng);
      out.truth = s.beta_true;
      for (std::size_t k = 0; k < methods.size(); ++k) {
        attempt(k, [&] {
          AppConfig c = base;
          if (auto ent = method_entropy(methods[k])) {
            c.entropy = *ent;
            return misscov_estimate(s.x1, s.x2_obs, s.y, c).gec.theta_hat;
          }
          return misscov_baseline(s.x1, s.x2_obs, s.y, method_baseline(methods[k], d.setting), c,
                                  &s.x2);
        });
      }
      break;
    }
  }
  return out;
}

std::vector<std::string> coef_names_for(Setting setting) {
  if (setting == Setting::kCausal) return {"ate"};
  return ols_ef(setting == Setting::kSsl ? 4 : 2, true)->coef_names();
}

}  // namespace

MonteCarloRun run_monte_carlo(const SimDesign& design_in, const std::vector<Method>& methods) {
  const SimDesign d = resolve(design_in);
  if (methods.empty()) fail(ErrorCode::kConfig, "no methods requested");
  for (Method m : methods) {
    if (!method_entropy(m)) method_baseline(m, d.setting);
  }

  std::vector<Replicate> reps(static_cast<std::size_t>(d.reps));
  parallel_for(reps.size(), [&](std::size_t r) { reps[r] = run_replicate(d, methods, static_cast<int>(r)); });

  MonteCarloRun run;
  run.design = d;
  run.coef_names = coef_names_for(d.setting);
  const auto q = static_cast<Eigen::Index>(run.coef_names.size());
  const Vector truth = reps.front().truth;

  for (std::size_t r = 0; r < reps.size(); ++r) {
    for (std::size_t k = 0; k < methods.size(); ++k) {
      if (!reps[r].estimates[k]) continue;
      for (Eigen::Index j = 0; j < q; ++j) {
        run.records.push_back({static_cast<int>(r), method_name(methods[k]),
                               run.coef_names[static_cast<std::size_t>(j)], (*reps[r].estimates[k])[j]});
      }
    }
  }

  for (std::size_t k = 0; k < methods.size(); ++k) {
    std::vector<Vector> ok;
    for (const Replicate& rep : reps)
      if (rep.estimates[k]) ok.push_back(*rep.estimates[k]);
    if (ok.empty()) {
      fail(ErrorCode::kAllReplicatesFailed,
           "every replicate failed for method " + method_name(methods[k]));
    }
    const double s = static_cast<double>(ok.size());
    for (Eigen::Index j = 0; j < q; ++j) {
      MetricRow row;
      row.method = method_name(methods[k]);
      row.coef = run.coef_names[static_cast<std::size_t>(j)];
      row.truth = truth[j];
      double sum = 0.0;
      for (const Vector& v : ok) sum += v[j];
      row.mean = sum / s;
      double ss = 0.0;
      for (const Vector& v : ok) ss += (v[j] - row.mean) * (v[j] - row.mean);
      row.se = ok.size() > 1 ? std::sqrt(ss / (s - 1.0)) : NAN;
      row.bias = row.mean - row.truth;
      row.rmse = std::sqrt(row.bias * row.bias + row.se * row.se);
      row.mc_se = row.se / std::sqrt(s);
      row.successes = static_cast<int>(ok.size());
      row.failures = d.reps - row.successes;
      run.table.push_back(row);
    }
  }
  return run;
}

const MetricRow& find_row(const MetricTable& table, std::string_view method, std::string_view coef) {
  for (const MetricRow& row : table)
    if (row.method == method && row.coef == coef) return row;
  fail(ErrorCode::kConfig, "no metric row for " + std::string(method) + "/" + std::string(coef));
}

std::string emit_replicates(const std::vector<ReplicateRecord>& records) {
  std::string out = "replicate,method,coef,estimate\n";
  char buf[64];
  for (const ReplicateRecord& r : records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.estimate);
    out += std::to_string(r.replicate) + ',' + r.method + ',' + r.coef + ',' + buf + '\n';
  }
  return out;
}

std::vector<ReplicateRecord> parse_replicates(std::string_view csv) {
  std::vector<ReplicateRecord> out;
  std::size_t pos = 0;
  int line = 0;
  while (pos < csv.size()) {
    std::size_t end = csv.find('\n', pos);
    if (end == std::string_view::npos) end = csv.size();
    std::string_view row = csv.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (row.empty()) continue;
    if (line == 1) {
      if (row != "replicate,method,coef,estimate") {
        fail(ErrorCode::kParse, "replicate file header must be replicate,method,coef,estimate");
      }
      continue;
    }
    std::vector<std::string_view> f;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= row.size(); ++i) {
      if (i == row.size() || row[i] == ',') {
        f.push_back(row.substr(start, i - start));
        start = i + 1;
      }
    }
    if (f.size() != 4) {
      fail(ErrorCode::kParse, "line " + std::to_string(line) + ": expected 4 fields, found " +
                                  std::to_string(f.size()));
    }
    ReplicateRecord r;
    r.method = std::string(f[1]);
    r.coef = std::string(f[2]);
    const auto [p1, e1] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), r.replicate);
    const std::string est(f[3]);
    char* tail = nullptr;
    r.estimate = std::strtod(est.c_str(), &tail);
    if (e1 != std::errc() || p1 != f[0].data() + f[0].size() || est.empty() || *tail != '\0') {
      fail(ErrorCode::kNonNumeric, "line " + std::to_string(line) + ": non-numeric field");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gecal
