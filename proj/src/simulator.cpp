// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "simulator.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

#include "errors.hpp"

namespace covprice {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

bool TraceSchedule::records(std::uint64_t t) const noexcept {
  if (t == 0) return false;
  if (geometric && std::has_single_bit(t)) return true;
  return stride != 0 && t % stride == 0;
}

void EpisodeConfig::validate() const {
  if (!market) throw ConfigError("episode has no market");
  market->validate();
  policy.validate();
  if (horizon < 1) throw ConfigError("horizon must be >= 1");
  if (schedule.stride < 1) throw ConfigError("trace stride must be >= 1");
}

double regret_increment(const Theta& truth, double a_prime, double p0, double price, std::span<const double> x,
                        const PriceBounds& bounds) {
  const double unclamped = unconstrained_optimal_price(truth, a_prime, p0, x);
  const double best = bounds.clamp(unclamped);
  const double best_revenue = expected_revenue(a_prime, p0, truth, best, x);
  const double revenue_gap = best_revenue - expected_revenue(a_prime, p0, truth, price, x);
  if (unclamped != best) return revenue_gap;

  const double quadratic = -truth.beta * (price - best) * (price - best);
  if (std::abs(quadratic - revenue_gap) > 1e-10 * std::max(1.0, std::abs(best_revenue)))
    throw std::logic_error("regret forms disagree: quadratic " + std::to_string(quadratic) + " vs revenue " +
                           std::to_string(revenue_gap));
  return quadratic;
}

RunTrace run_episode(const EpisodeConfig& cfg) {
  cfg.validate();
  const MarketConfig& market = *cfg.market;
  auto policy = make_policy(cfg.policy, market, cfg.seed);
  CovariateStream covariates = market.covariates.open(cfg.seed);
  ShockStream shocks(market.shocks, cfg.seed);
  const Theta truth = policy->model_truth(market.true_theta);

  RunTrace trace;
  std::uint64_t horizon = cfg.horizon;
  if (auto rows = market.covariates.length(); rows && *rows < horizon) {
    horizon = *rows;
    trace.truncated = true;
  }

  std::vector<double> x(market.m(), 0.0);
  double cumulative = 0.0;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    if (!covariates.next(x)) {
      trace.truncated = true;
      break;
    }
    const double price = policy->choose_price(x, t);
    if (!market.bounds.contains(price)) throw std::logic_error("policy emitted an infeasible price");
    const double demand = realize_demand(market, price, x, shocks.next());
    policy->observe(price, x, demand);

    const double inc = regret_increment(market.true_theta, market.a_prime, market.p0, price, x, market.bounds);
    cumulative += inc;
    trace.periods = t;

    if (!cfg.schedule.records(t) && t != horizon) continue;
    TracePoint pt;
    pt.t = t;
    pt.price = price;
    pt.covariate_norm = norm2(x);
    pt.regret_increment = inc;
    pt.cumulative_regret = cumulative;
    pt.lambda_min = kNaN;
    pt.raw_error_sq = kNaN;
    pt.truncated_error_sq = kNaN;
    if (const auto* est = policy->estimator()) {
      if (cfg.diagnostics.lambda_min) pt.lambda_min = est->min_eigenvalue();
      if (cfg.diagnostics.estimation_error) {
        if (auto raw = policy->raw_estimate()) pt.raw_error_sq = distance_sq(*raw, truth);
        if (auto tr = policy->truncated_estimate()) pt.truncated_error_sq = distance_sq(*tr, truth);
      }
    }
    trace.points.push_back(pt);
  }
  trace.final_regret = cumulative;
  return trace;
}

SeriesStats aggregate(std::span<const std::vector<double>> series_by_rep) {
  SeriesStats out;
  if (series_by_rep.empty()) return out;
  const std::size_t len = series_by_rep.front().size();
  out.mean.assign(len, kNaN);
  out.ci_halfwidth.assign(len, kNaN);
  for (std::size_t i = 0; i < len; ++i) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : series_by_rep) {
      if (std::isfinite(s[i])) {
        sum += s[i];
        ++n;
      }
    }
    if (n == 0) continue;
    const double mean = sum / static_cast<double>(n);
    out.mean[i] = mean;
    if (n < 2) continue;
    double ss = 0.0;
    for (const auto& s : series_by_rep)
      if (std::isfinite(s[i])) ss += (s[i] - mean) * (s[i] - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    out.ci_halfwidth[i] = 1.96 * sd / std::sqrt(static_cast<double>(n));
  }
  return out;
}

ReplicationSummary run_replications(const EpisodeConfig& cfg, const ReplicationOptions& opts) {
  if (opts.replications < 1) throw ConfigError("need at least one replication");
  cfg.validate();

  const std::size_t n = opts.replications;
  std::vector<RunTrace> traces(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      EpisodeConfig ep = cfg;
      ep.seed = opts.base_seed + i;
      try {
        traces[i] = run_episode(ep);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t jobs = opts.max_parallelism == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                               : opts.max_parallelism;
  jobs = std::min(jobs, n);
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(jobs);
    for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  std::size_t completed = 0;
  std::string failures;
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) {
      ++completed;
      continue;
    }
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      failures += "\n  replication " + std::to_string(i) + " (seed " + std::to_string(opts.base_seed + i) +
                  "): " + e.what();
    }
  }
  if (!failures.empty())
    throw std::runtime_error(std::to_string(n - completed) + " of " + std::to_string(n) +
                             " replications failed (" + std::to_string(completed) + " completed):" + failures);

  ReplicationSummary s;
  s.replications = n;
  for (const auto& p : traces.front().points) s.t.push_back(p.t);
  for (std::size_t i = 0; i < n; ++i) {
    if (traces[i].points.size() != s.t.size())
      throw std::logic_error("replications recorded different trace grids");
    s.final_regrets.push_back(traces[i].final_regret);
    s.seeds.push_back(opts.base_seed + i);
    s.truncated = s.truncated || traces[i].truncated;
  }

  auto collect = [&](auto field) {
    std::vector<std::vector<double>> by_rep(n);
    for (std::size_t i = 0; i < n; ++i) {
      by_rep[i].reserve(s.t.size());
      for (const auto& p : traces[i].points) by_rep[i].push_back(field(p));
    }
    return aggregate(by_rep);
  };
  s.price = collect([](const TracePoint& p) { return p.price; });
  s.cumulative_regret = collect([](const TracePoint& p) { return p.cumulative_regret; });
  s.lambda_min = collect([](const TracePoint& p) { return p.lambda_min; });
  s.t_over_lambda_min = collect([](const TracePoint& p) {
    return p.lambda_min > 0.0 ? static_cast<double>(p.t) / p.lambda_min : kNaN;
  });
  s.raw_error_sq = collect([](const TracePoint& p) { return p.raw_error_sq; });
  s.truncated_error_sq = collect([](const TracePoint& p) { return p.truncated_error_sq; });
  return s;
}

DerivedSeries derive_series(std::span<const std::uint64_t> t, std::span<const double> lambda_min,
                            std::span<const double> cumulative_regret, std::span<const double> error_sq) {
  const std::size_t n = t.size();
  if (lambda_min.size() != n || cumulative_regret.size() != n || error_sq.size() != n)
    throw ConfigError("derived series inputs must have equal length");
  DerivedSeries d;
  d.t.assign(t.begin(), t.end());
  d.t_over_lambda_min.assign(n, kNaN);
  d.log_t_over_regret.assign(n, kNaN);
  d.t_error_sq.assign(n, kNaN);
  d.regret_over_log_t.assign(n, kNaN);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = static_cast<double>(t[i]);
    if (std::isfinite(lambda_min[i]) && lambda_min[i] > 0.0) d.t_over_lambda_min[i] = ti / lambda_min[i];
    if (std::isfinite(error_sq[i])) d.t_error_sq[i] = ti * error_sq[i];
    if (t[i] >= 2 && std::isfinite(cumulative_regret[i])) {
      const double lt = std::log(ti);
      d.regret_over_log_t[i] = cumulative_regret[i] / lt;
      if (cumulative_regret[i] > 0.0) d.log_t_over_regret[i] = lt / cumulative_regret[i];
    }
  }
  return d;
}

DerivedSeries derive_series(const RunTrace& trace) {
  std::vector<std::uint64_t> t;
  std::vector<double> lam, reg, err;
  for (const auto& p : trace.points) {
    t.push_back(p.t);
    lam.push_back(p.lambda_min);
    reg.push_back(p.cumulative_regret);
    err.push_back(p.raw_error_sq);
  }
  return derive_series(t, lam, reg, err);
}

DerivedSeries derive_series(const ReplicationSummary& s) {
  return derive_series(s.t, s.lambda_min.mean, s.cumulative_regret.mean, s.raw_error_sq.mean);
}

}  // namespace covprice
