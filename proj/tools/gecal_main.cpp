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

#include <CLI11.hpp>
#include <cstdio>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gecal/gecal.h"

namespace {

enum Exit { kOk = 0, kInternal = 1, kConfig = 2, kData = 3, kNumerical = 4 };

int exit_code(gecal_status s) {
  switch (s) {
    case GECAL_OK: return kOk;
    case GECAL_ERR_CONFIG: return kConfig;
    case GECAL_ERR_DATA:
    case GECAL_ERR_IO: return kData;
    case GECAL_ERR_NUMERICAL: return kNumerical;
    default: return kInternal;
  }
}

int report(gecal_status s) {
  std::fprintf(stderr, "gecal: %s\n", gecal_last_error());
  return exit_code(s);
}

int usage_error(const char* name, const std::string& message) {
  std::fprintf(stderr, "gecal: %s: %s\n", name, message.c_str());
  return kConfig;
}

struct OptionsDeleter {
  void operator()(gecal_options* o) const { gecal_options_destroy(o); }
};
struct DatasetDeleter {
  void operator()(gecal_dataset* d) const { gecal_dataset_destroy(d); }
};
struct ResultDeleter {
  void operator()(gecal_result* r) const { gecal_result_destroy(r); }
};
struct SimulationDeleter {
  void operator()(gecal_simulation* s) const { gecal_simulation_destroy(s); }
};
struct WeightsDeleter {
  void operator()(gecal_weights* w) const { gecal_weights_destroy(w); }
};

// Flag name -> library option key, for values forwarded verbatim.
const std::vector<std::pair<std::string, std::string>> kForwarded = {
    {"entropy", "entropy"},       {"folds", "folds"},
    {"seed", "seed"},             {"se", "se"},
    {"bootstrap-b", "bootstrap_b"}, {"family", "family"},
    {"spline-knots", "spline_knots"}, {"ps-trunc", "ps_trunc"},
    {"normalize", "normalize"},   {"mechanism", "mechanism"},
    {"ps-uses-outcome", "ps_uses_outcome"}, {"ci-level", "ci_level"},
    {"precision", "precision"},   {"format", "format"},
    {"outcome", "outcome"},       {"treatment", "treatment"},
    {"delta", "delta"},           {"x2", "x2"},
    {"covariates", "covariates"}, {"x1", "x1"},
    {"methods", "methods"},       {"n", "n"},
    {"n-labeled", "n_labeled"},
};

void print_data_report(const gecal_dataset* ds) {
  std::fprintf(stderr, "read %zu rows (%zu respondents)", gecal_dataset_rows(ds), gecal_dataset_respondents(ds));
  const size_t cols = gecal_dataset_column_count(ds);
  for (size_t j = 0; j < cols; ++j) {
    const double rate = gecal_dataset_missing_rate(ds, j);
    if (rate > 0.0) std::fprintf(stderr, "; %s missing %.4g%%", gecal_dataset_column_name(ds, j), 100.0 * rate);
  }
  std::fprintf(stderr, "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized entropy calibration estimators and simulation lab", "gecal"};
  app.set_config("--config", "", "flat TOML/INI file whose keys match flag names; flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gecal_version()));

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> opts;
  for (const auto& [flag, key] : kForwarded) {
    opts[flag] = app.add_option(flag == "folds" ? "--folds,-K" : "--" + flag, values[flag]);
  }
  opts["entropy"]->description("sq, el, et or hd (default et)");
  opts["folds"]->description("cross-fitting folds (default 4)");
  opts["seed"]->description("random seed (default 20240901)");
  opts["se"]->description("sandwich, bootstrap or none (default sandwich)");
  opts["bootstrap-b"]->description("bootstrap replicates (default 500)");
  opts["family"]->description("predictor family: linear, logistic, spline or auto");
  opts["spline-knots"]->description("interior spline knots (default 5)");
  opts["ps-trunc"]->description("clip propensities to [eps, 1-eps] (default 0)");
  opts["normalize"]->description("add the normalization constraint: true, false or auto");
  opts["mechanism"]->description("ssl labeling mechanism: mar or mcar (default mar)");
  opts["ps-uses-outcome"]->description("misscov: include the outcome in the propensity design (default true)");
  opts["ci-level"]->description("confidence level (default 0.95)");
  opts["precision"]->description("output digits: default (6 significant) or full");
  opts["format"]->description("csv or json-lines");
  opts["outcome"]->description("outcome column");
  opts["treatment"]->description("0/1 treatment column");
  opts["delta"]->description("0/1 response indicator column; inferred from gaps when absent");
  opts["x2"]->description("misscov: partially observed covariate column");
  opts["covariates"]->description("comma separated covariate columns");
  opts["x1"]->description("misscov: comma separated always-observed covariates");
  opts["methods"]->description("simulate: comma separated methods");
  opts["n"]->description("simulate: sample size per replicate");
  opts["n-labeled"]->description("simulate ssl: expected labeled count (default 500)");

  std::string data_path;
  std::string output_path = "-";
  std::string replicates_path;
  int or_model = 1;
  int ps_model = 1;
  int reps = 200;
  auto* data_opt = app.add_option("--data", data_path, "input CSV file");
  app.add_option("--output,-o", output_path, "output path, - for stdout");
  app.add_option("--replicates", replicates_path, "simulate: write per-replicate estimates here");
  app.add_option("--or", or_model, "simulate: outcome model 1 or 2")->check(CLI::IsMember({1, 2}));
  app.add_option("--ps", ps_model, "simulate: propensity model 1 or 2")->check(CLI::IsMember({1, 2}));
  app.add_option("--reps", reps, "simulate: Monte Carlo replicates")->check(CLI::PositiveNumber);

  auto* estimate = app.add_subcommand("estimate", "point estimates and standard errors from a CSV file");
  estimate->fallthrough();
  estimate->require_subcommand(1);
  auto* est_ate = estimate->add_subcommand("ate", "average treatment effect")->fallthrough();
  auto* est_ssl = estimate->add_subcommand("ssl", "regression with unlabeled rows")->fallthrough();
  auto* est_mc = estimate->add_subcommand("misscov", "regression with a partially missing covariate")->fallthrough();

  auto* simulate = app.add_subcommand("simulate", "Monte Carlo study on a built-in design");
  simulate->fallthrough();
  simulate->require_subcommand(1);
  auto* sim_causal = simulate->add_subcommand("causal")->fallthrough();
  auto* sim_ssl = simulate->add_subcommand("ssl")->fallthrough();
  auto* sim_mc = simulate->add_subcommand("misscov")->fallthrough();

  auto* weights = app.add_subcommand("weights", "per-unit calibration weights")->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    return usage_error("UnknownFlag", std::string(e.what()) + "; run gecal --help for the flag list");
  } catch (const CLI::ConfigError& e) {
    return usage_error("UnknownFlag", std::string(e.what()) + "; config keys must match flag names");
  } catch (const CLI::RequiredError& e) {
    return usage_error("MissingRequired", e.what());
  } catch (const CLI::ParseError& e) {
    return usage_error("ConfigError", e.what());
  }

  gecal_options* raw_opts = nullptr;
  if (gecal_status s = gecal_options_create(&raw_opts); s != GECAL_OK) return report(s);
  std::unique_ptr<gecal_options, OptionsDeleter> options(raw_opts);
  for (const auto& [flag, key] : kForwarded) {
    if (opts[flag]->count() == 0) continue;
    if (gecal_status s = gecal_options_set(options.get(), key.c_str(), values[flag].c_str()); s != GECAL_OK) {
      return report(s);
    }
  }

  auto load = [&](const char* analysis, std::unique_ptr<gecal_dataset, DatasetDeleter>& out) -> int {
    if (data_opt->count() == 0) {
      return usage_error("MissingRequired", "missing --data; pass the path of the input CSV file");
    }
    gecal_dataset* ds = nullptr;
    if (gecal_status s = gecal_dataset_read(data_path.c_str(), analysis, options.get(), &ds); s != GECAL_OK) {
      return report(s);
    }
    out.reset(ds);
    print_data_report(ds);
    return kOk;
  };

  if (estimate->parsed()) {
    const char* analysis = est_ate->parsed() ? "ate" : est_ssl->parsed() ? "ssl" : "misscov";
    (void)est_mc;
    std::unique_ptr<gecal_dataset, DatasetDeleter> ds;
    if (int rc = load(analysis, ds); rc != kOk) return rc;
    gecal_result* raw = nullptr;
    if (gecal_status s = gecal_estimate(analysis, ds.get(), options.get(), &raw); s != GECAL_OK) return report(s);
    std::unique_ptr<gecal_result, ResultDeleter> result(raw);
    if (gecal_status s = gecal_result_write(result.get(), options.get(), output_path.c_str()); s != GECAL_OK) {
      return report(s);
    }
    return kOk;
  }

  if (simulate->parsed()) {
    const char* setting = sim_causal->parsed() ? "causal" : sim_ssl->parsed() ? "ssl" : "misscov";
    (void)sim_mc;
    std::uint64_t seed = 20240901;
    if (opts["seed"]->count() > 0) {
      try {
        seed = std::stoull(values["seed"]);
      } catch (const std::exception&) {
        return usage_error("ConfigError", "--seed expects a non-negative integer");
      }
    }
    if (reps < 2) return usage_error("ConfigError", "--reps must be at least 2");
    gecal_simulation* raw = nullptr;
    if (gecal_status s = gecal_simulate(setting, or_model, ps_model, reps, seed, options.get(), &raw); s != GECAL_OK) {
      return report(s);
    }
    std::unique_ptr<gecal_simulation, SimulationDeleter> sim(raw);
    if (gecal_status s = gecal_simulation_write_table(sim.get(), options.get(), output_path.c_str()); s != GECAL_OK) {
      return report(s);
    }
    if (!replicates_path.empty()) {
      if (gecal_status s = gecal_simulation_write_replicates(sim.get(), replicates_path.c_str()); s != GECAL_OK) {
        return report(s);
      }
    }
    return kOk;
  }

  if (weights->parsed()) {
    std::unique_ptr<gecal_dataset, DatasetDeleter> ds;
    if (int rc = load("weights", ds); rc != kOk) return rc;
    gecal_weights* raw = nullptr;
    if (gecal_status s = gecal_weights_compute(ds.get(), options.get(), &raw); s != GECAL_OK) return report(s);
    std::unique_ptr<gecal_weights, WeightsDeleter> w(raw);
    if (gecal_status s = gecal_weights_write(w.get(), options.get(), output_path.c_str()); s != GECAL_OK) {
      return report(s);
    }
    return kOk;
  }
  return kInternal;
}
