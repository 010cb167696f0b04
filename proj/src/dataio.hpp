// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

// Covariate datasets for replay experiments: CSV ingestion against a column
// schema, covariate standardization, an OLS ground-truth fit, and the
// translation of that fit into a replay market.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "linalg.hpp"
#include "market.hpp"
#include "simulator.hpp"

namespace covprice {

enum class ColumnRole { kDemand, kPrice, kCovariate, kIgnore };

// Column name -> role. Text form, one entry per line, '#' starts a comment:
//
//   Demand   = demand
//   Price    = price
//   Star     = covariate
//   HotelId  = ignore
//
// Header columns not listed are ignored.
struct Schema {
  std::vector<std::pair<std::string, ColumnRole>> columns;

  // Throws ConfigError unless exactly one demand and one price column exist.
  void validate() const;
};

Schema parse_schema(std::istream& in);
Schema load_schema(const std::string& path);
void write_schema(const Schema& schema, std::ostream& out);

struct ColumnStats {
  std::string name;
  double mean = 0.0;
  double std = 1.0;
};

struct Dataset {
  std::vector<double> demand;
  std::vector<double> price;
  std::vector<std::string> covariate_names;
  // Standardized covariates, one row per record.
  Matrix covariates;
  std::vector<ColumnStats> stats;
  std::size_t rejected_rows = 0;
  // 1-based file line numbers of rejected rows.
  std::vector<std::size_t> rejected_lines;
  // Covariates dropped for zero sample variance.
  std::vector<std::string> dropped_covariates;

  std::size_t rows() const noexcept { return demand.size(); }
};

// Throws DataError for an empty input or when every row is rejected,
// ConfigError when the header lacks a schema column.
Dataset parse_csv(std::istream& in, const Schema& schema);
Dataset load_csv(const std::string& path, const Schema& schema);

// (raw - mean) / std per column.
Matrix standardize(const Matrix& raw, const std::vector<ColumnStats>& stats);
std::vector<ColumnStats> column_stats(const Matrix& raw, const std::vector<std::string>& names);

struct GroundTruthFit {
  // demand ~ intercept + price_coef * price + covariate_coefs . x_standardized
  double intercept = 0.0;
  double price_coef = 0.0;
  std::vector<std::string> covariate_names;
  std::vector<double> covariate_coefs;
  // Standard errors in the order (intercept, price, covariates...).
  std::vector<double> std_errors;
  // The same model on the unstandardized covariates.
  double raw_intercept = 0.0;
  std::vector<double> raw_covariate_coefs;
  std::vector<double> raw_std_errors;
  double r_squared = 0.0;
  double residual_std = 0.0;
  std::size_t rows = 0;
};

// Throws DataError on too few rows or a rank-deficient design (naming the
// collinear columns).
GroundTruthFit fit_ground_truth(const Dataset& ds);

std::string fit_report(const GroundTruthFit& fit);
// key = value lines, full precision.
void write_fit_kv(const GroundTruthFit& fit, std::ostream& out);

struct ReplayOptions {
  double p0 = 129.92;
  // Defaults to [0.5 * min p*, 1.5 * max p*] over the recorded rows.
  std::optional<PriceBounds> bounds;
  ParamSpace space{-1e10, -1e-10, 1.0};
  ShockSource shocks{ShockKind::kZero, 0.0};
  bool permute = true;
};

// Market with theta = (price_coef, covariate_coefs), a' = intercept +
// price_coef * p0, and the dataset rows as an empirical covariate source.
// Throws ConfigError when price_coef >= 0 or the dataset is empty.
std::shared_ptr<const MarketConfig> make_replay_market(const Dataset& ds, const GroundTruthFit& fit,
                                                       const ReplayOptions& opts);

EpisodeConfig make_replay_config(const Dataset& ds, const GroundTruthFit& fit, const ReplayOptions& opts,
                                 const PolicySpec& policy, std::uint64_t seed);

// Planted hotel-like data: Demand, Price and seven covariates (Star, Review,
// Brand, Position, Weekend, Location, Summer) with demand linear in price and
// the raw covariates plus Gaussian noise.
struct PlantedModel {
  double intercept = 3.0;
  double price_coef = -0.012;
  std::vector<std::string> names{"Star", "Review", "Brand", "Position", "Weekend", "Location", "Summer"};
  std::vector<double> coefs{0.25, 0.15, -0.05, -0.02, 0.1, 1.0, 0.08};
  double noise_sigma = 0.5;
};

void write_planted_csv(std::ostream& out, std::size_t rows, std::uint64_t seed, const PlantedModel& model = {});
Schema planted_schema(const PlantedModel& model = {});

}  // namespace covprice
