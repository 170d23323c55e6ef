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

#ifndef GECAL_IO_HPP
#define GECAL_IO_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gecal/apps.hpp"
#include "gecal/simlab.hpp"

namespace gecal {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// RFC 4180. Errors carry 1-based line and column (character) positions.
CsvTable parse_csv(std::string_view text);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);  // "-" is stdout

struct ColumnRoles {
  std::optional<std::string> outcome;
  std::optional<std::string> treatment;
  std::optional<std::string> delta;
  std::optional<std::string> x2;  // possibly-missing covariate
  std::vector<std::string> covariates;
  std::vector<std::string> x1;
};

// Which role carries the missingness when no explicit delta column is named.
enum class MissingRole { kNone, kOutcome, kX2 };

struct Dataset {
  std::vector<std::string> names;  // referenced columns, in role order
  Matrix values;                   // NaN where missing
  Vector delta;                    // empty when there is no missingness role
  std::size_t rows = 0;
  std::vector<double> missing_rate;

  Vector column(std::string_view name) const;
  Matrix columns(const std::vector<std::string>& names) const;
};

// Parses only the columns the roles reference; "" and NA are missing.
Dataset read_dataset(const CsvTable& table, const ColumnRoles& roles, MissingRole missing_role);
Dataset read_dataset(const std::string& path, const ColumnRoles& roles, MissingRole missing_role);

struct OutputOptions {
  bool full_precision = false;  // %.17g instead of %.6g
  double ci_level = 0.95;
  bool json_lines = false;
};

double ci_multiplier(double level);
std::string format_number(double v, bool full_precision);

std::string format_estimate(const EstimateResult& result, const OutputOptions& options);
std::string format_metric_table(const MetricTable& table, const OutputOptions& options);
std::string format_weights(const WeightsResult& result, const OutputOptions& options);

}  // namespace gecal

#endif  // GECAL_IO_HPP
