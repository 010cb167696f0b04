// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "errors.hpp"

namespace covprice {

namespace {

constexpr std::array kAllSeries{SeriesId::kPrice,      SeriesId::kRegret,     SeriesId::kLambdaMin,
                                SeriesId::kTOverLambdaMin, SeriesId::kRawErrorSq, SeriesId::kTruncatedErrorSq};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    out.push_back(field);
  }
  return out;
}

double parse(const std::string& s, std::size_t lineno) {
  if (s == "nan" || s == "-nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw DataError("summary CSV line " + std::to_string(lineno) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const SeriesStats& series(const ReplicationSummary& s, SeriesId id) {
  switch (id) {
    case SeriesId::kPrice:
      return s.price;
    case SeriesId::kRegret:
      return s.cumulative_regret;
    case SeriesId::kLambdaMin:
      return s.lambda_min;
    case SeriesId::kTOverLambdaMin:
      return s.t_over_lambda_min;
    case SeriesId::kRawErrorSq:
      return s.raw_error_sq;
    case SeriesId::kTruncatedErrorSq:
      return s.truncated_error_sq;
  }
  return s.price;
}

const char* series_name(SeriesId id) {
  switch (id) {
    case SeriesId::kPrice:
      return "price";
    case SeriesId::kRegret:
      return "regret";
    case SeriesId::kLambdaMin:
      return "lambda_min";
    case SeriesId::kTOverLambdaMin:
      return "t_over_lambda_min";
    case SeriesId::kRawErrorSq:
      return "error_sq";
    case SeriesId::kTruncatedErrorSq:
      return "truncated_error_sq";
  }
  return "";
}

void write_summary_csv(const ReplicationSummary& s, std::ostream& out) {
  out << "t,replications";
  for (auto id : kAllSeries) out << ",mean_" << series_name(id) << ",ci_halfwidth_" << series_name(id);
  out << '\n';
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    out << s.t[i] << ',' << s.replications;
    for (auto id : kAllSeries) {
      const auto& st = series(s, id);
      out << ',' << format_double(st.mean[i]) << ',' << format_double(st.ci_halfwidth[i]);
    }
    out << '\n';
  }
}

void write_series_csv(const ReplicationSummary& s, SeriesId id, std::ostream& out) {
  const auto& st = series(s, id);
  out << "t,mean,ci_halfwidth\n";
  for (std::size_t i = 0; i < s.t.size(); ++i)
    out << s.t[i] << ',' << format_double(st.mean[i]) << ',' << format_double(st.ci_halfwidth[i]) << '\n';
}

void write_final_regrets_csv(const ReplicationSummary& s, std::ostream& out) {
  out << "replication,seed,final_regret\n";
  for (std::size_t i = 0; i < s.final_regrets.size(); ++i)
    out << i << ',' << s.seeds[i] << ',' << format_double(s.final_regrets[i]) << '\n';
}

SummaryColumns read_summary_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("summary CSV is empty");
  const auto header = split(line);
  auto col = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError(std::string("summary CSV is missing column '") + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t ct = col("t");
  const std::size_t cr = col("mean_regret");
  const std::size_t cl = col("mean_lambda_min");
  const std::size_t ce = col("mean_error_sq");

  SummaryColumns out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto f = split(line);
    if (f.size() != header.size())
      throw DataError("summary CSV line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                      " fields");
    out.t.push_back(static_cast<std::uint64_t>(parse(f[ct], lineno)));
    out.mean_regret.push_back(parse(f[cr], lineno));
    out.mean_lambda_min.push_back(parse(f[cl], lineno));
    out.mean_error_sq.push_back(parse(f[ce], lineno));
  }
  return out;
}

void write_derived_csv(const DerivedSeries& d, std::ostream& out) {
  out << "t,t_over_lambda_min,log_t_over_regret,t_error_sq,regret_over_log_t\n";
  for (std::size_t i = 0; i < d.t.size(); ++i)
    out << d.t[i] << ',' << format_double(d.t_over_lambda_min[i]) << ',' << format_double(d.log_t_over_regret[i])
        << ',' << format_double(d.t_error_sq[i]) << ',' << format_double(d.regret_over_log_t[i]) << '\n';
}

}  // namespace covprice
