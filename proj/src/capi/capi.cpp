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

#include "gecal/gecal.h"

#include <charconv>
#include <cmath>
#include <new>
#include <string>
#include <vector>

#include "gecal/apps.hpp"
#include "gecal/error.hpp"
#include "gecal/io.hpp"
#include "gecal/simlab.hpp"

using namespace gecal;

struct gecal_options {
  AppConfig app;
  Mechanism mechanism = Mechanism::kMar;
  ColumnRoles roles;
  OutputOptions output;
  std::vector<Method> methods;
  std::size_t n = 0;
  std::size_t n_labeled = 500;
};

struct gecal_dataset {
  Dataset data;
  ColumnRoles roles;
  std::string analysis;
};

struct gecal_result {
  EstimateResult summary;
};

struct gecal_simulation {
  MonteCarloRun run;
};

struct gecal_weights {
  WeightsResult result;
};

namespace {

thread_local std::string g_message;
thread_local std::string g_name;

gecal_status record(gecal_status status, std::string name, std::string message) {
  g_name = std::move(name);
  g_message = std::move(message);
  return status;
}

gecal_status status_of(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kConfig: return GECAL_ERR_CONFIG;
    case ErrorCategory::kData: return GECAL_ERR_DATA;
    case ErrorCategory::kNumerical: return GECAL_ERR_NUMERICAL;
    case ErrorCategory::kIo: return GECAL_ERR_IO;
  }
  return GECAL_ERR_INTERNAL;
}

template <class F>
gecal_status guarded(F&& body) {
  try {
    body();
    g_name.clear();
    g_message.clear();
    return GECAL_OK;
  } catch (const Error& e) {
    return record(status_of(e.category()), std::string(error_code_name(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return record(GECAL_ERR_INTERNAL, "OutOfMemory", "out of memory");
  } catch (const std::exception& e) {
    return record(GECAL_ERR_INTERNAL, "InternalError", e.what());
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kConfig, std::string(what) + " must not be null");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ' && c != '\t') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

template <class T>
T parse_int(const std::string& key, const std::string& v, T lo) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || out < lo) {
    fail(ErrorCode::kConfig, "--" + key + " expects an integer >= " + std::to_string(lo) + ", got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0' || !std::isfinite(d)) {
    fail(ErrorCode::kConfig, "--" + key + " expects a number, got '" + v + "'");
  }
  return d;
}

std::optional<bool> parse_tristate(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  if (v == "auto") return std::nullopt;
  fail(ErrorCode::kConfig, "--" + key + " expects true, false or auto, got '" + v + "'");
}

void set_option(gecal_options& o, const std::string& key, const std::string& v) {
  if (key == "entropy") {
    o.app.entropy = parse_entropy(v);
  } else if (key == "folds") {
    o.app.folds = parse_int<int>(key, v, 2);
  } else if (key == "seed") {
    o.app.seed = parse_int<std::uint64_t>(key, v, 0);
  } else if (key == "se") {
    o.app.se = parse_se_method(v);
  } else if (key == "bootstrap_b") {
    o.app.bootstrap_b = parse_int<int>(key, v, 2);
  } else if (key == "family") {
    if (v == "auto") o.app.family.reset();
    else o.app.family = parse_family(v);
  } else if (key == "spline_knots") {
    o.app.predictor.spline_knots = parse_int<int>(key, v, 1);
  } else if (key == "ps_trunc") {
    const double e = parse_real(key, v);
    if (e < 0.0 || e >= 0.5) fail(ErrorCode::kConfig, "--ps-trunc must lie in [0, 0.5)");
    o.app.ps_truncation = e;
  } else if (key == "normalize") {
    o.app.normalization = parse_tristate(key, v);
  } else if (key == "mechanism") {
    o.mechanism = parse_mechanism(v);
  } else if (key == "ps_uses_outcome") {
    const auto b = parse_tristate(key, v);
    o.app.misscov_ps_uses_outcome = b.value_or(true);
  } else if (key == "ci_level") {
    o.output.ci_level = parse_real(key, v);
    ci_multiplier(o.output.ci_level);
  } else if (key == "precision") {
    if (v == "full") o.output.full_precision = true;
    else if (v == "6" || v == "default") o.output.full_precision = false;
    else fail(ErrorCode::kConfig, "--precision expects 'full' or 'default', got '" + v + "'");
  } else if (key == "format") {
    if (v == "csv") o.output.json_lines = false;
    else if (v == "json-lines" || v == "jsonl") o.output.json_lines = true;
    else fail(ErrorCode::kConfig, "--format expects csv or json-lines, got '" + v + "'");
  } else if (key == "outcome") {
    o.roles.outcome = v;
  } else if (key == "treatment") {
    o.roles.treatment = v;
  } else if (key == "delta") {
    o.roles.delta = v;
  } else if (key == "x2") {
    o.roles.x2 = v;
  } else if (key == "covariates") {
    o.roles.covariates = split_list(v);
  } else if (key == "x1") {
    o.roles.x1 = split_list(v);
  } else if (key == "methods") {
    o.methods.clear();
    for (const auto& m : split_list(v)) o.methods.push_back(parse_method(m));
  } else if (key == "n") {
    o.n = parse_int<std::size_t>(key, v, 0);
  } else if (key == "n_labeled") {
    o.n_labeled = parse_int<std::size_t>(key, v, 1);
  } else {
    fail(ErrorCode::kUnknownFlag, "unknown option '" + key + "'; see gecal --help for the option list");
  }
}

void require_role(bool present, const char* flag, const char* what) {
  if (!present) {
    fail(ErrorCode::kMissingRequired,
         std::string("missing --") + flag + "; pass the name of the " + what + " column");
  }
}

// Roles each analysis needs, and roles it does not accept.
ColumnRoles roles_for(const std::string& analysis, const ColumnRoles& r, MissingRole& missing) {
  ColumnRoles out;
  if (analysis == "ate") {
    require_role(r.treatment.has_value(), "treatment", "treatment indicator");
    require_role(r.outcome.has_value(), "outcome", "outcome");
    require_role(!r.covariates.empty(), "covariates", "covariate");
    out.treatment = r.treatment;
    out.outcome = r.outcome;
    out.covariates = r.covariates;
    missing = MissingRole::kNone;
  } else if (analysis == "ssl") {
    require_role(r.outcome.has_value(), "outcome", "outcome");
    require_role(!r.covariates.empty(), "covariates", "covariate");
    out.outcome = r.outcome;
    out.delta = r.delta;
    out.covariates = r.covariates;
    missing = MissingRole::kOutcome;
  } else if (analysis == "misscov") {
    require_role(r.outcome.has_value(), "outcome", "outcome");
    require_role(!r.x1.empty(), "x1", "always-observed covariate");
    require_role(r.x2.has_value(), "x2", "partially missing covariate");
    out.outcome = r.outcome;
    out.delta = r.delta;
    out.x1 = r.x1;
    out.x2 = r.x2;
    missing = MissingRole::kX2;
  } else if (analysis == "weights") {
    require_role(!r.covariates.empty(), "covariates", "covariate");
    if (!r.delta && !r.outcome) {
      fail(ErrorCode::kMissingRequired,
           "missing --delta; pass a 0/1 response column, or --outcome to infer it from gaps");
    }
    out.outcome = r.outcome;
    out.delta = r.delta;
    out.covariates = r.covariates;
    missing = MissingRole::kOutcome;
  } else {
    fail(ErrorCode::kConfig, "unknown analysis '" + analysis + "'; use ate, ssl, misscov or weights");
  }
  return out;
}

gecal_dataset* load(const CsvTable& table, const std::string& analysis, const gecal_options* opts) {
  const gecal_options defaults;
  const gecal_options& o = opts ? *opts : defaults;
  MissingRole missing = MissingRole::kNone;
  ColumnRoles roles = roles_for(analysis, o.roles, missing);
  auto ds = std::make_unique<gecal_dataset>();
  ds->data = read_dataset(table, roles, missing);
  ds->roles = std::move(roles);
  ds->analysis = analysis;
  return ds.release();
}

std::vector<std::string> with_intercept_names(std::vector<std::string> names) {
  names.insert(names.begin(), "intercept");
  return names;
}

EstimateResult run_estimate(const std::string& analysis, const gecal_dataset& ds, const gecal_options& o) {
  const Dataset& d = ds.data;
  const ColumnRoles& r = ds.roles;
  if (analysis != ds.analysis) {
    fail(ErrorCode::kConfig, "dataset was loaded for '" + ds.analysis + "', not '" + analysis + "'");
  }
  if (analysis == "ate") {
    const AteResult res = ate_estimate(d.columns(r.covariates), d.column(*r.treatment),
                                       d.column(*r.outcome), o.app);
    return res.summary(o.app.entropy);
  }
  if (analysis == "ssl") {
    const Matrix x = d.columns(r.covariates);
    const Vector y = d.column(*r.outcome);
    std::vector<Eigen::Index> lab, unl;
    for (Eigen::Index i = 0; i < d.delta.size(); ++i) (d.delta[i] == 1.0 ? lab : unl).push_back(i);
    const Vector y_lab = y(lab);
    for (Eigen::Index i = 0; i < y_lab.size(); ++i) {
      if (std::isnan(y_lab[i])) {
        fail(ErrorCode::kNonNumeric, "outcome is missing on a row marked as labeled (data row " +
                                         std::to_string(lab[static_cast<std::size_t>(i)] + 1) + ")");
      }
    }
    const RegressionResult res = ssl_estimate(x(lab, Eigen::all), y_lab, x(unl, Eigen::all), o.mechanism, o.app);
    EstimateResult s = res.summary("ols", o.app.entropy);
    s.coef_names = with_intercept_names(r.covariates);
    return s;
  }
  const Matrix x1 = d.columns(r.x1);
  Vector x2 = d.column(*r.x2);
  if (r.delta) {
    for (Eigen::Index i = 0; i < x2.size(); ++i) {
      if (d.delta[i] == 0.0) {
        x2[i] = NAN;
      } else if (std::isnan(x2[i])) {
        fail(ErrorCode::kNonNumeric, "x2 is missing on a row marked as observed (data row " + std::to_string(i + 1) + ")");
      }
    }
  }
  const RegressionResult res = misscov_estimate(x1, x2, d.column(*r.outcome), o.app);
  EstimateResult s = res.summary("ols", o.app.entropy);
  std::vector<std::string> names = r.x1;
  names.push_back(*r.x2);
  s.coef_names = with_intercept_names(names);
  return s;
}

}  // namespace

extern "C" {

const char* gecal_version(void) { return "0.1.0"; }
const char* gecal_last_error(void) { return g_message.c_str(); }
const char* gecal_last_error_name(void) { return g_name.c_str(); }

gecal_status gecal_options_create(gecal_options** out) {
  return guarded([&] {
    need(out, "out");
    *out = new gecal_options();
  });
}

void gecal_options_destroy(gecal_options* opts) { delete opts; }

gecal_status gecal_options_set(gecal_options* opts, const char* key, const char* value) {
  return guarded([&] {
    need(opts, "options");
    need(key, "key");
    need(value, "value");
    set_option(*opts, key, value);
  });
}

gecal_status gecal_options_validate(const gecal_options* opts) {
  return guarded([&] {
    need(opts, "options");
    GecConfig c = opts->app.solver;
    c.entropy = opts->app.entropy;
    validate(c);
  });
}

gecal_status gecal_dataset_read(const char* path, const char* analysis, const gecal_options* opts,
                                gecal_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(analysis, "analysis");
    need(out, "out");
    *out = nullptr;
    *out = load(parse_csv(read_text_file(path)), analysis, opts);
  });
}

gecal_status gecal_dataset_from_columns(size_t rows, size_t cols, const char* const* names,
                                        const double* values, const char* analysis,
                                        const gecal_options* opts, gecal_dataset** out) {
  return guarded([&] {
    need(names, "names");
    need(analysis, "analysis");
    need(out, "out");
    if (rows > 0 && cols > 0) need(values, "values");
    *out = nullptr;
    CsvTable t;
    for (size_t j = 0; j < cols; ++j) {
      need(names[j], "column name");
      t.header.emplace_back(names[j]);
    }
    t.rows.assign(rows, std::vector<std::string>(cols));
    for (size_t j = 0; j < cols; ++j) {
      for (size_t i = 0; i < rows; ++i) {
        const double v = values[j * rows + i];
        t.rows[i][j] = std::isnan(v) ? "" : format_number(v, true);
      }
    }
    *out = load(t, analysis, opts);
  });
}

void gecal_dataset_destroy(gecal_dataset* ds) { delete ds; }
size_t gecal_dataset_rows(const gecal_dataset* ds) { return ds ? ds->data.rows : 0; }

size_t gecal_dataset_respondents(const gecal_dataset* ds) {
  if (!ds) return 0;
  if (ds->data.delta.size() == 0) return ds->data.rows;
  return static_cast<size_t>(ds->data.delta.sum());
}

size_t gecal_dataset_column_count(const gecal_dataset* ds) { return ds ? ds->data.names.size() : 0; }

const char* gecal_dataset_column_name(const gecal_dataset* ds, size_t j) {
  return ds && j < ds->data.names.size() ? ds->data.names[j].c_str() : nullptr;
}

double gecal_dataset_missing_rate(const gecal_dataset* ds, size_t j) {
  return ds && j < ds->data.missing_rate.size() ? ds->data.missing_rate[j] : NAN;
}

gecal_status gecal_estimate(const char* analysis, const gecal_dataset* ds, const gecal_options* opts,
                            gecal_result** out) {
  return guarded([&] {
    need(analysis, "analysis");
    need(ds, "dataset");
    need(out, "out");
    *out = nullptr;
    const gecal_options defaults;
    auto r = std::make_unique<gecal_result>();
    r->summary = run_estimate(analysis, *ds, opts ? *opts : defaults);
    *out = r.release();
  });
}

void gecal_result_destroy(gecal_result* r) { delete r; }
size_t gecal_result_size(const gecal_result* r) { return r ? r->summary.coef_names.size() : 0; }

const char* gecal_result_coef(const gecal_result* r, size_t j) {
  return r && j < r->summary.coef_names.size() ? r->summary.coef_names[j].c_str() : nullptr;
}

double gecal_result_estimate(const gecal_result* r, size_t j) {
  return r && j < r->summary.coef_names.size() ? r->summary.estimate[static_cast<Eigen::Index>(j)] : NAN;
}

double gecal_result_se(const gecal_result* r, size_t j) {
  return r && j < r->summary.coef_names.size() ? r->summary.se[static_cast<Eigen::Index>(j)] : NAN;
}

size_t gecal_result_n(const gecal_result* r) { return r ? r->summary.n : 0; }
size_t gecal_result_respondents(const gecal_result* r) { return r ? r->summary.n_respondents : 0; }

gecal_status gecal_result_write(const gecal_result* r, const gecal_options* opts, const char* path) {
  return guarded([&] {
    need(r, "result");
    need(path, "path");
    const gecal_options defaults;
    write_text_file(path, format_estimate(r->summary, (opts ? *opts : defaults).output));
  });
}

gecal_status gecal_simulate(const char* setting, int or_model, int ps_model, int reps, uint64_t seed,
                            const gecal_options* opts, gecal_simulation** out) {
  return guarded([&] {
    need(setting, "setting");
    need(out, "out");
    *out = nullptr;
    const gecal_options defaults;
    const gecal_options& o = opts ? *opts : defaults;
    SimDesign d;
    d.setting = parse_setting(setting);
    d.or_model = or_model;
    d.ps_model = ps_model;
    d.reps = reps;
    d.seed = seed;
    d.n = o.n;
    d.n_labeled = o.n_labeled;
    const std::vector<Method> methods = o.methods.empty() ? default_methods(d.setting) : o.methods;
    auto s = std::make_unique<gecal_simulation>();
    s->run = run_monte_carlo(d, methods);
    *out = s.release();
  });
}

void gecal_simulation_destroy(gecal_simulation* s) { delete s; }
size_t gecal_simulation_rows(const gecal_simulation* s) { return s ? s->run.table.size() : 0; }

const char* gecal_simulation_method(const gecal_simulation* s, size_t row) {
  return s && row < s->run.table.size() ? s->run.table[row].method.c_str() : nullptr;
}

const char* gecal_simulation_coef(const gecal_simulation* s, size_t row) {
  return s && row < s->run.table.size() ? s->run.table[row].coef.c_str() : nullptr;
}

double gecal_simulation_value(const gecal_simulation* s, size_t row, const char* field) {
  if (!s || !field || row >= s->run.table.size()) return NAN;
  const MetricRow& m = s->run.table[row];
  const std::string f = field;
  if (f == "truth") return m.truth;
  if (f == "mean") return m.mean;
  if (f == "bias") return m.bias;
  if (f == "se") return m.se;
  if (f == "rmse") return m.rmse;
  if (f == "mc_se") return m.mc_se;
  if (f == "successes") return m.successes;
  if (f == "failures") return m.failures;
  return NAN;
}

gecal_status gecal_simulation_write_table(const gecal_simulation* s, const gecal_options* opts,
                                          const char* path) {
  return guarded([&] {
    need(s, "simulation");
    need(path, "path");
    const gecal_options defaults;
    write_text_file(path, format_metric_table(s->run.table, (opts ? *opts : defaults).output));
  });
}

gecal_status gecal_simulation_write_replicates(const gecal_simulation* s, const char* path) {
  return guarded([&] {
    need(s, "simulation");
    need(path, "path");
    write_text_file(path, emit_replicates(s->run.records));
  });
}

gecal_status gecal_weights_compute(const gecal_dataset* ds, const gecal_options* opts, gecal_weights** out) {
  return guarded([&] {
    need(ds, "dataset");
    need(out, "out");
    *out = nullptr;
    if (ds->analysis != "weights") {
      fail(ErrorCode::kConfig, "dataset was loaded for '" + ds->analysis + "', not 'weights'");
    }
    const gecal_options defaults;
    auto w = std::make_unique<gecal_weights>();
    w->result = weights_estimate(ds->data.columns(ds->roles.covariates), ds->data.delta,
                                 (opts ? *opts : defaults).app);
    *out = w.release();
  });
}

void gecal_weights_destroy(gecal_weights* w) { delete w; }
size_t gecal_weights_size(const gecal_weights* w) { return w ? static_cast<size_t>(w->result.weights.size()) : 0; }

double gecal_weights_value(const gecal_weights* w, size_t i) {
  return w && i < gecal_weights_size(w) ? w->result.weights[static_cast<Eigen::Index>(i)] : NAN;
}

double gecal_weights_pi_hat(const gecal_weights* w, size_t i) {
  return w && i < gecal_weights_size(w) ? w->result.pi_hat[static_cast<Eigen::Index>(i)] : NAN;
}

gecal_status gecal_weights_write(const gecal_weights* w, const gecal_options* opts, const char* path) {
  return guarded([&] {
    need(w, "weights");
    need(path, "path");
    const gecal_options defaults;
    write_text_file(path, format_weights(w->result, (opts ? *opts : defaults).output));
  });
}

}  // extern "C"
