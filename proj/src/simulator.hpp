// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "market.hpp"
#include "policies.hpp"

namespace covprice {

// Records t when t is a power of two (if geometric) or a multiple of stride,
// and always the final period.
struct TraceSchedule {
  std::uint64_t stride = 10'000;
  bool geometric = true;

  bool records(std::uint64_t t) const noexcept;
};

struct DiagnosticFlags {
  bool lambda_min = true;
  bool estimation_error = true;
};

struct EpisodeConfig {
  std::shared_ptr<const MarketConfig> market;
  PolicySpec policy;
  std::uint64_t horizon = 1;
  std::uint64_t seed = 0;
  TraceSchedule schedule;
  DiagnosticFlags diagnostics;

  void validate() const;
};

struct TracePoint {
  std::uint64_t t = 0;
  double price = 0.0;
  double covariate_norm = 0.0;
  double regret_increment = 0.0;
  double cumulative_regret = 0.0;
  // NaN when not traced or not yet available.
  double lambda_min = 0.0;
  double raw_error_sq = 0.0;
  double truncated_error_sq = 0.0;
};

struct RunTrace {
  std::vector<TracePoint> points;
  double final_regret = 0.0;
  std::uint64_t periods = 0;
  // True when an empirical covariate source ran out before the horizon.
  bool truncated = false;
};

// Expected single-period revenue shortfall r(p*, x) - r(p, x) under the true
// parameters. For an interior optimum this is -beta (p - p*)^2, which is what
// is returned; both forms are cross-checked to 1e-10.
double regret_increment(const Theta& truth, double a_prime, double p0, double price, std::span<const double> x,
                        const PriceBounds& bounds);

RunTrace run_episode(const EpisodeConfig& cfg);

struct SeriesStats {
  std::vector<double> mean;
  // 1.96 * sample std / sqrt(n); NaN when fewer than two finite values.
  std::vector<double> ci_halfwidth;
};

struct ReplicationSummary {
  std::vector<std::uint64_t> t;
  std::size_t replications = 0;
  SeriesStats price;
  SeriesStats cumulative_regret;
  SeriesStats lambda_min;
  SeriesStats t_over_lambda_min;
  SeriesStats raw_error_sq;
  SeriesStats truncated_error_sq;
  std::vector<double> final_regrets;
  std::vector<std::uint64_t> seeds;
  bool truncated = false;
};

struct ReplicationOptions {
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  // 0 picks std::thread::hardware_concurrency().
  std::size_t max_parallelism = 1;
};

// Runs episodes with seeds base_seed + i and aggregates them in index order,
// so results do not depend on the parallelism degree.
ReplicationSummary run_replications(const EpisodeConfig& cfg, const ReplicationOptions& opts);

SeriesStats aggregate(std::span<const std::vector<double>> series_by_rep);

struct DerivedSeries {
  std::vector<std::uint64_t> t;
  // NaN where the guard fails (lambda_min == 0, t < 2, regret == 0).
  std::vector<double> t_over_lambda_min;
  std::vector<double> log_t_over_regret;
  std::vector<double> t_error_sq;
  std::vector<double> regret_over_log_t;
};

DerivedSeries derive_series(std::span<const std::uint64_t> t, std::span<const double> lambda_min,
                            std::span<const double> cumulative_regret, std::span<const double> error_sq);
DerivedSeries derive_series(const RunTrace& trace);
DerivedSeries derive_series(const ReplicationSummary& summary);

}  // namespace covprice
