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

#include "gecal/io.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "gecal/error.hpp"

namespace gecal {

namespace {

std::string where(std::size_t line, std::size_t col) {
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  std::size_t line = 1, col = 0;
  std::size_t i = 0;
  bool field_started = false;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };

  while (i < text.size()) {
    const char c = text[i];
    ++col;
    if (c == '"' && !field_started) {
      const std::size_t open_line = line, open_col = col;
      ++i;
      bool closed = false;
      while (i < text.size()) {
        const char d = text[i];
        ++col;
        if (d == '"') {
          if (i + 1 < text.size() && text[i + 1] == '"') {
            field.push_back('"');
            i += 2;
            ++col;
            continue;
          }
          ++i;
          closed = true;
          break;
        }
        if (d == '\n') {
          ++line;
          col = 0;
        }
        field.push_back(d);
        ++i;
      }
      if (!closed) fail(ErrorCode::kParse, "unterminated quoted field opened at " + where(open_line, open_col));
      field_started = true;
      if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
        fail(ErrorCode::kParse, "unexpected character after closing quote at " + where(line, col + 1));
      }
      continue;
    }
    if (c == '"') fail(ErrorCode::kParse, "stray quote inside unquoted field at " + where(line, col));
    if (c == ',') {
      end_field();
      ++i;
      continue;
    }
    if (c == '\r' || c == '\n') {
      end_record();
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      ++i;
      ++line;
      col = 0;
      continue;
    }
    field.push_back(c);
    field_started = true;
    ++i;
  }
  if (field_started || !record.empty()) end_record();

  if (records.empty()) fail(ErrorCode::kParse, "input has no header row");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      fail(ErrorCode::kParse, "record " + std::to_string(r + 1) + " has " +
                                  std::to_string(records[r].size()) + " fields, header has " +
                                  std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content << std::flush;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out << content;
  out.flush();
  if (!out) fail(ErrorCode::kIo, "failed writing '" + path + "'");
}

Vector Dataset::column(std::string_view name) const {
  for (std::size_t j = 0; j < names.size(); ++j)
    if (names[j] == name) return values.col(static_cast<Eigen::Index>(j));
  fail(ErrorCode::kConfig, "column '" + std::string(name) + "' was not loaded");
}

Matrix Dataset::columns(const std::vector<std::string>& cols) const {
  Matrix out(values.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = column(cols[j]);
  return out;
}

Dataset read_dataset(const CsvTable& table, const ColumnRoles& roles, MissingRole missing_role) {
  std::vector<std::pair<std::string, std::string>> wanted;  // role, column
  if (roles.outcome) wanted.emplace_back("outcome", *roles.outcome);
  if (roles.treatment) wanted.emplace_back("treatment", *roles.treatment);
  if (roles.delta) wanted.emplace_back("delta", *roles.delta);
  if (roles.x2) wanted.emplace_back("x2", *roles.x2);
  for (const auto& c : roles.covariates) wanted.emplace_back("covariates", c);
  for (const auto& c : roles.x1) wanted.emplace_back("x1", c);

  std::set<std::string> seen;
  for (const auto& [role, name] : wanted) {
    if (!seen.insert(name).second) {
      fail(ErrorCode::kConflictingRoles,
           "column '" + name + "' is assigned to more than one role; give each column one role");
    }
  }

  Dataset ds;
  ds.rows = table.rows.size();
  ds.values.resize(static_cast<Eigen::Index>(ds.rows), static_cast<Eigen::Index>(wanted.size()));
  for (std::size_t j = 0; j < wanted.size(); ++j) {
    const auto& [role, name] = wanted[j];
    std::size_t src = table.header.size();
    for (std::size_t h = 0; h < table.header.size(); ++h)
      if (table.header[h] == name) src = h;
    if (src == table.header.size()) {
      fail(ErrorCode::kConfig, "--" + role + " names column '" + name +
                                   "', which is not in the input header");
    }
    ds.names.push_back(name);
    std::size_t missing = 0;
    for (std::size_t r = 0; r < ds.rows; ++r) {
      const std::string& cell = table.rows[r][src];
      double v = NAN;
      if (cell.empty() || cell == "NA") {
        ++missing;
      } else {
        errno = 0;
        char* end = nullptr;
        v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
          fail(ErrorCode::kNonNumeric, "non-numeric value '" + cell + "' at data row " +
                                           std::to_string(r + 1) + ", column '" + name + "' (" +
                                           std::to_string(src + 1) + ")");
        }
      }
      ds.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = v;
    }
    ds.missing_rate.push_back(ds.rows ? static_cast<double>(missing) / static_cast<double>(ds.rows) : 0.0);
  }

  if (roles.delta) {
    ds.delta = ds.column(*roles.delta);
    for (Eigen::Index i = 0; i < ds.delta.size(); ++i) {
      if (ds.delta[i] != 0.0 && ds.delta[i] != 1.0) {
        fail(ErrorCode::kNonNumeric, "delta column must be 0/1 (data row " + std::to_string(i + 1) + ")");
      }
    }
  } else if (missing_role != MissingRole::kNone) {
    const std::optional<std::string>& m = missing_role == MissingRole::kOutcome ? roles.outcome : roles.x2;
    if (m) {
      const Vector col = ds.column(*m);
      ds.delta.resize(col.size());
      for (Eigen::Index i = 0; i < col.size(); ++i) ds.delta[i] = std::isnan(col[i]) ? 0.0 : 1.0;
    }
  }
  return ds;
}

Dataset read_dataset(const std::string& path, const ColumnRoles& roles, MissingRole missing_role) {
  return read_dataset(parse_csv(read_text_file(path)), roles, missing_role);
}

double ci_multiplier(double level) {
  if (!(level > 0.0 && level < 1.0)) fail(ErrorCode::kConfig, "--ci-level must lie in (0, 1)");
  if (level == 0.95) return 1.959964;
  return boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
}

std::string format_number(double v, bool full_precision) {
  if (std::isnan(v)) return "NA";
  if (v == 0.0) v = 0.0;  // no negative zero
  char buf[40];
  std::snprintf(buf, sizeof buf, full_precision ? "%.17g" : "%.6g", v);
  return buf;
}

namespace {

// JSON-lines values go through the same rounding as the CSV.
nlohmann::ordered_json json_rounded(double v, bool full) {
  if (!std::isfinite(v)) return nullptr;
  return std::strtod(format_number(v, full).c_str(), nullptr);
}

}  // namespace

std::string format_estimate(const EstimateResult& r, const OutputOptions& o) {
  const double z = ci_multiplier(o.ci_level);
  std::string out;
  if (!o.json_lines) out = "target,coef,estimate,se,ci_low,ci_high,entropy,n,n_respondents\n";
  for (std::size_t j = 0; j < r.coef_names.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double est = r.estimate[jj];
    const double se = r.se[jj];
    const double lo = std::isnan(se) ? NAN : est - z * se;
    const double hi = std::isnan(se) ? NAN : est + z * se;
    if (o.json_lines) {
      nlohmann::ordered_json row;
      row["target"] = r.target;
      row["coef"] = r.coef_names[j];
      row["estimate"] = json_rounded(est, o.full_precision);
      row["se"] = json_rounded(se, o.full_precision);
      row["ci_low"] = json_rounded(lo, o.full_precision);
      row["ci_high"] = json_rounded(hi, o.full_precision);
      row["entropy"] = r.entropy;
      row["n"] = r.n;
      row["n_respondents"] = r.n_respondents;
      out += row.dump() + "\n";
    } else {
      out += r.target + ',' + r.coef_names[j] + ',' + format_number(est, o.full_precision) + ',' +
             format_number(se, o.full_precision) + ',' + format_number(lo, o.full_precision) + ',' +
             format_number(hi, o.full_precision) + ',' + r.entropy + ',' + std::to_string(r.n) +
             ',' + std::to_string(r.n_respondents) + '\n';
    }
  }
  return out;
}

std::string format_metric_table(const MetricTable& table, const OutputOptions& o) {
  std::string out;
  if (!o.json_lines) out = "method,coef,bias_x10,se_x10,rmse_x10,mc_se_x10,failures\n";
  for (const MetricRow& r : table) {
    if (o.json_lines) {
      nlohmann::ordered_json row;
      row["method"] = r.method;
      row["coef"] = r.coef;
      row["bias_x10"] = json_rounded(10.0 * r.bias, o.full_precision);
      row["se_x10"] = json_rounded(10.0 * r.se, o.full_precision);
      row["rmse_x10"] = json_rounded(10.0 * r.rmse, o.full_precision);
      row["mc_se_x10"] = json_rounded(10.0 * r.mc_se, o.full_precision);
      row["failures"] = r.failures;
      out += row.dump() + "\n";
    } else {
      out += r.method + ',' + r.coef + ',' + format_number(10.0 * r.bias, o.full_precision) + ',' +
             format_number(10.0 * r.se, o.full_precision) + ',' +
             format_number(10.0 * r.rmse, o.full_precision) + ',' +
             format_number(10.0 * r.mc_se, o.full_precision) + ',' + std::to_string(r.failures) +
             '\n';
    }
  }
  return out;
}

std::string format_weights(const WeightsResult& w, const OutputOptions& o) {
  std::string out;
  if (!o.json_lines) out = "unit,delta,pi_hat,weight\n";
  for (Eigen::Index i = 0; i < w.weights.size(); ++i) {
    if (o.json_lines) {
      nlohmann::ordered_json row;
      row["unit"] = i + 1;
      row["delta"] = static_cast<int>(w.delta[i]);
      row["pi_hat"] = json_rounded(w.pi_hat[i], o.full_precision);
      row["weight"] = json_rounded(w.weights[i], o.full_precision);
      out += row.dump() + "\n";
    } else {
      out += std::to_string(i + 1) + ',' + std::to_string(static_cast<int>(w.delta[i])) + ',' +
             format_number(w.pi_hat[i], o.full_precision) + ',' +
             format_number(w.weights[i], o.full_precision) + '\n';
    }
  }
  return out;
}

}  // namespace gecal
