// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string_view>

#include "errors.hpp"

namespace covprice {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<ColumnRole> parse_role(std::string_view s) {
  if (s == "demand") return ColumnRole::kDemand;
  if (s == "price") return ColumnRole::kPrice;
  if (s == "covariate") return ColumnRole::kCovariate;
  if (s == "ignore") return ColumnRole::kIgnore;
  return std::nullopt;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void Schema::validate() const {
  std::size_t demand = 0, price = 0;
  for (const auto& [name, role] : columns) {
    demand += role == ColumnRole::kDemand;
    price += role == ColumnRole::kPrice;
  }
  if (demand != 1) throw ConfigError("schema must define exactly one demand column");
  if (price != 1) throw ConfigError("schema must define exactly one price column");
  for (std::size_t i = 0; i < columns.size(); ++i)
    for (std::size_t j = i + 1; j < columns.size(); ++j)
      if (columns[i].first == columns[j].first) throw ConfigError("schema lists column '" + columns[i].first + "' twice");
}

Schema parse_schema(std::istream& in) {
  Schema schema;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view s = line;
    if (auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError("schema line " + std::to_string(lineno) + ": expected 'column = role'");
    const auto name = trim(s.substr(0, eq));
    const auto role_text = trim(s.substr(eq + 1));
    const auto role = parse_role(role_text);
    if (name.empty() || !role)
      throw ConfigError("schema line " + std::to_string(lineno) + ": unknown role '" + std::string(role_text) +
                        "' (expected demand, price, covariate or ignore)");
    schema.columns.emplace_back(std::string(name), *role);
  }
  schema.validate();
  return schema;
}

Schema load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file " + path);
  return parse_schema(in);
}

void write_schema(const Schema& schema, std::ostream& out) {
  for (const auto& [name, role] : schema.columns) {
    const char* text = role == ColumnRole::kDemand  ? "demand"
                       : role == ColumnRole::kPrice ? "price"
                       : role == ColumnRole::kCovariate ? "covariate"
                                                        : "ignore";
    out << name << " = " << text << '\n';
  }
}

std::vector<ColumnStats> column_stats(const Matrix& raw, const std::vector<std::string>& names) {
  std::vector<ColumnStats> stats(raw.cols());
  const auto n = static_cast<double>(raw.rows());
  for (std::size_t c = 0; c < raw.cols(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < raw.rows(); ++r) sum += raw(r, c);
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t r = 0; r < raw.rows(); ++r) ss += (raw(r, c) - mean) * (raw(r, c) - mean);
    stats[c] = {c < names.size() ? names[c] : std::string{}, mean, raw.rows() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0};
  }
  return stats;
}

Matrix standardize(const Matrix& raw, const std::vector<ColumnStats>& stats) {
  if (stats.size() != raw.cols()) throw ConfigError("standardization stats do not match the column count");
  Matrix out(raw.rows(), raw.cols());
  for (std::size_t r = 0; r < raw.rows(); ++r)
    for (std::size_t c = 0; c < raw.cols(); ++c) out(r, c) = (raw(r, c) - stats[c].mean) / stats[c].std;
  return out;
}

Dataset parse_csv(std::istream& in, const Schema& schema) {
  schema.validate();
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (!have_header && std::getline(in, line)) {
    ++lineno;
    have_header = !trim(line).empty();
  }
  if (!have_header) throw DataError("CSV input is empty");

  const auto header = split_fields(line);
  std::vector<std::string> header_names(header.begin(), header.end());
  auto column_of = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header_names.begin(), header_names.end(), name);
    if (it == header_names.end()) throw ConfigError("CSV header has no column '" + name + "' required by the schema");
    return static_cast<std::size_t>(it - header_names.begin());
  };

  std::size_t demand_col = 0, price_col = 0;
  std::vector<std::size_t> cov_cols;
  std::vector<std::string> cov_names;
  for (const auto& [name, role] : schema.columns) {
    switch (role) {
      case ColumnRole::kDemand:
        demand_col = column_of(name);
        break;
      case ColumnRole::kPrice:
        price_col = column_of(name);
        break;
      case ColumnRole::kCovariate:
        cov_cols.push_back(column_of(name));
        cov_names.push_back(name);
        break;
      case ColumnRole::kIgnore:
        break;
    }
  }

  Dataset ds;
  std::vector<double> raw_cov;
  std::vector<double> row_cov(cov_cols.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    bool ok = fields.size() == header_names.size();
    std::optional<double> d, p;
    if (ok) {
      d = parse_number(fields[demand_col]);
      p = parse_number(fields[price_col]);
      ok = d && p;
      for (std::size_t i = 0; ok && i < cov_cols.size(); ++i) {
        const auto v = parse_number(fields[cov_cols[i]]);
        ok = v.has_value();
        if (ok) row_cov[i] = *v;
      }
    }
    if (!ok) {
      ++ds.rejected_rows;
      ds.rejected_lines.push_back(lineno);
      continue;
    }
    ds.demand.push_back(*d);
    ds.price.push_back(*p);
    raw_cov.insert(raw_cov.end(), row_cov.begin(), row_cov.end());
  }
  if (ds.demand.empty()) throw DataError("CSV has no valid data rows (" + std::to_string(ds.rejected_rows) + " rejected)");

  const std::size_t n = ds.demand.size();
  Matrix raw(n, cov_cols.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < cov_cols.size(); ++c) raw(r, c) = raw_cov[r * cov_cols.size() + c];
  auto stats = column_stats(raw, cov_names);

  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < stats.size(); ++c) {
    if (stats[c].std > 0.0 && std::isfinite(stats[c].std)) {
      keep.push_back(c);
      ds.stats.push_back(stats[c]);
      ds.covariate_names.push_back(cov_names[c]);
    } else {
      ds.dropped_covariates.push_back(cov_names[c]);
    }
  }
  Matrix kept(n, keep.size());
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < keep.size(); ++c) kept(r, c) = raw(r, keep[c]);
  ds.covariates = standardize(kept, ds.stats);
  return ds;
}

Dataset load_csv(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open CSV file " + path);
  return parse_csv(in, schema);
}

GroundTruthFit fit_ground_truth(const Dataset& ds) {
  const std::size_t n = ds.rows();
  const std::size_t m = ds.covariates.cols();
  const std::size_t k = m + 2;
  if (n < k + 1)
    throw DataError("fit needs at least " + std::to_string(k + 1) + " rows, dataset has " + std::to_string(n));

  std::vector<std::string> names{"intercept", "price"};
  names.insert(names.end(), ds.covariate_names.begin(), ds.covariate_names.end());

  auto build = [&](bool standardized) {
    Matrix x(n, k);
    for (std::size_t r = 0; r < n; ++r) {
      x(r, 0) = 1.0;
      x(r, 1) = ds.price[r];
      for (std::size_t c = 0; c < m; ++c) {
        const double z = ds.covariates(r, c);
        x(r, c + 2) = standardized ? z : z * ds.stats[c].std + ds.stats[c].mean;
      }
    }
    return x;
  };

  const auto sol = qr_least_squares(build(true), ds.demand);
  if (!sol.dependent_columns.empty()) {
    std::string cols;
    for (auto c : sol.dependent_columns) cols += (cols.empty() ? "" : ", ") + names[c];
    throw DataError("rank-deficient design; collinear columns: " + cols);
  }
  const auto raw = qr_least_squares(build(false), ds.demand);
  if (!raw.dependent_columns.empty()) throw DataError("rank-deficient design on the raw covariate scale");

  GroundTruthFit fit;
  fit.rows = n;
  fit.intercept = sol.coef[0];
  fit.price_coef = sol.coef[1];
  fit.covariate_names = ds.covariate_names;
  fit.covariate_coefs.assign(sol.coef.begin() + 2, sol.coef.end());
  fit.raw_intercept = raw.coef[0];
  fit.raw_covariate_coefs.assign(raw.coef.begin() + 2, raw.coef.end());

  const double dof = static_cast<double>(n - k);
  fit.residual_std = std::sqrt(sol.residual_sum_squares / dof);
  for (double g : sol.inverse_gram_diag) fit.std_errors.push_back(fit.residual_std * std::sqrt(g));
  const double raw_sigma = std::sqrt(raw.residual_sum_squares / dof);
  for (double g : raw.inverse_gram_diag) fit.raw_std_errors.push_back(raw_sigma * std::sqrt(g));

  double mean = 0.0;
  for (double d : ds.demand) mean += d;
  mean /= static_cast<double>(n);
  double tss = 0.0;
  for (double d : ds.demand) tss += (d - mean) * (d - mean);
  fit.r_squared = tss > 0.0 ? 1.0 - sol.residual_sum_squares / tss : 1.0;
  return fit;
}

std::string fit_report(const GroundTruthFit& fit) {
  std::ostringstream os;
  char buf[160];
  os << "Ground-truth OLS fit: demand ~ 1 + price + standardized covariates\n";
  os << "rows: " << fit.rows << "\n";
  std::snprintf(buf, sizeof buf, "R^2: %.6f   residual std: %.6g\n\n", fit.r_squared, fit.residual_std);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-16s %16s %14s %16s %14s\n", "term", "coef(std)", "se(std)", "coef(raw)", "se(raw)");
  os << buf;
  auto line = [&](const std::string& name, double c, double se, double rc, double rse) {
    std::snprintf(buf, sizeof buf, "%-16s %16.8g %14.6g %16.8g %14.6g\n", name.c_str(), c, se, rc, rse);
    os << buf;
  };
  line("intercept", fit.intercept, fit.std_errors[0], fit.raw_intercept, fit.raw_std_errors[0]);
  line("price", fit.price_coef, fit.std_errors[1], fit.price_coef, fit.raw_std_errors[1]);
  for (std::size_t i = 0; i < fit.covariate_names.size(); ++i)
    line(fit.covariate_names[i], fit.covariate_coefs[i], fit.std_errors[i + 2], fit.raw_covariate_coefs[i],
         fit.raw_std_errors[i + 2]);
  return os.str();
}

void write_fit_kv(const GroundTruthFit& fit, std::ostream& out) {
  out << "rows = " << fit.rows << "\n";
  out << "r_squared = " << fmt(fit.r_squared) << "\n";
  out << "residual_std = " << fmt(fit.residual_std) << "\n";
  out << "intercept = " << fmt(fit.intercept) << "\n";
  out << "intercept.se = " << fmt(fit.std_errors[0]) << "\n";
  out << "price = " << fmt(fit.price_coef) << "\n";
  out << "price.se = " << fmt(fit.std_errors[1]) << "\n";
  out << "raw.intercept = " << fmt(fit.raw_intercept) << "\n";
  out << "raw.intercept.se = " << fmt(fit.raw_std_errors[0]) << "\n";
  for (std::size_t i = 0; i < fit.covariate_names.size(); ++i) {
    const auto& n = fit.covariate_names[i];
    out << "covariate." << n << " = " << fmt(fit.covariate_coefs[i]) << "\n";
    out << "covariate." << n << ".se = " << fmt(fit.std_errors[i + 2]) << "\n";
    out << "raw.covariate." << n << " = " << fmt(fit.raw_covariate_coefs[i]) << "\n";
    out << "raw.covariate." << n << ".se = " << fmt(fit.raw_std_errors[i + 2]) << "\n";
  }
}

std::shared_ptr<const MarketConfig> make_replay_market(const Dataset& ds, const GroundTruthFit& fit,
                                                       const ReplayOptions& opts) {
  if (ds.rows() == 0) throw ConfigError("replay needs a non-empty dataset");
  if (!(fit.price_coef < 0.0))
    throw ConfigError("fitted price coefficient " + fmt(fit.price_coef) + " is not negative; pricing is ill-posed");
  if (fit.covariate_coefs.size() != ds.covariates.cols()) throw ConfigError("fit does not match the dataset columns");

  auto market = std::make_shared<MarketConfig>();
  market->p0 = opts.p0;
  market->a_prime = fit.intercept + fit.price_coef * opts.p0;
  market->true_theta = Theta{fit.price_coef, fit.covariate_coefs};
  market->space = opts.space;
  market->shocks = opts.shocks;
  market->covariates = CovariateSource(
      EmpiricalCovariates{std::make_shared<const Matrix>(ds.covariates), opts.permute});
  if (opts.bounds) {
    market->bounds = *opts.bounds;
  } else {
    const auto [lo, hi] = market->covariates.projection_range(market->true_theta.gamma);
    const double scale = -2.0 * fit.price_coef;
    const double p_lo = (market->a_prime + lo) / scale + opts.p0 / 2.0;
    const double p_hi = (market->a_prime + hi) / scale + opts.p0 / 2.0;
    if (!(p_lo > 0.0)) throw ConfigError("fitted model has a non-positive optimal price for some rows");
    market->bounds = PriceBounds{0.5 * p_lo, 1.5 * p_hi};
  }
  market->validate();
  return market;
}

EpisodeConfig make_replay_config(const Dataset& ds, const GroundTruthFit& fit, const ReplayOptions& opts,
                                 const PolicySpec& policy, std::uint64_t seed) {
  EpisodeConfig cfg;
  cfg.market = make_replay_market(ds, fit, opts);
  cfg.policy = policy;
  cfg.horizon = ds.rows();
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

Schema planted_schema(const PlantedModel& model) {
  Schema s;
  s.columns.emplace_back("Demand", ColumnRole::kDemand);
  s.columns.emplace_back("Price", ColumnRole::kPrice);
  for (const auto& n : model.names) s.columns.emplace_back(n, ColumnRole::kCovariate);
  return s;
}

void write_planted_csv(std::ostream& out, std::size_t rows, std::uint64_t seed, const PlantedModel& model) {
  if (model.names.size() != 7 || model.coefs.size() != 7)
    throw ConfigError("planted hotel model has exactly seven covariates");
  Rng rng(splitmix64(seed));
  std::uniform_int_distribution<int> star(1, 5);
  std::uniform_int_distribution<int> review_half(2, 10);
  std::bernoulli_distribution brand(0.6), weekend(2.0 / 7.0), summer(0.4);
  std::uniform_real_distribution<double> position(1.0, 40.0);
  std::exponential_distribution<double> location(8.0);
  std::normal_distribution<double> price_noise(0.0, 25.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  out << "Demand,Price";
  for (const auto& n : model.names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < rows; ++r) {
    const double x[7] = {
        static_cast<double>(star(rng)),
        0.5 * review_half(rng),
        brand(rng) ? 1.0 : 0.0,
        std::round(position(rng) * 4.0) / 4.0,
        weekend(rng) ? 1.0 : 0.0,
        std::min(location(rng), 1.0),
        summer(rng) ? 1.0 : 0.0,
    };
    const double price = std::clamp(std::round((40.0 + 25.0 * x[0] + price_noise(rng)) * 100.0) / 100.0, 20.0, 999.0);
    double demand = model.intercept + model.price_coef * price;
    for (int i = 0; i < 7; ++i) demand += model.coefs[i] * x[i];
    demand += model.noise_sigma * noise(rng);
    std::snprintf(buf, sizeof buf, "%.17g", demand);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.17g", price);
    out << buf;
    for (double v : x) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace covprice
