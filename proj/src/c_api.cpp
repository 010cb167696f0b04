// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "covprice/covprice.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "dataio.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "market.hpp"
#include "policies.hpp"
#include "report.hpp"
#include "simulator.hpp"

#ifndef COVPRICE_VERSION
#define COVPRICE_VERSION "0.0.0"
#endif

struct cp_market {
  std::shared_ptr<const covprice::MarketConfig> cfg;
};

struct cp_summary {
  covprice::ReplicationSummary summary;
};

struct cp_dataset {
  covprice::Dataset data;
};

struct cp_fit {
  covprice::GroundTruthFit fit;
};

struct cp_estimator {
  explicit cp_estimator(std::size_t m) : est(m) {}
  covprice::LeastSquaresEstimator est;
};

namespace {

using namespace covprice;

thread_local std::string g_last_error;

cp_status fail(cp_status code, std::string msg) {
  g_last_error = std::move(msg);
  return code;
}

template <class F>
cp_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return CP_OK;
  } catch (const ConfigError& e) {
    return fail(CP_ERR_CONFIG, e.what());
  } catch (const InvalidParameter& e) {
    return fail(CP_ERR_INVALID_ARGUMENT, e.what());
  } catch (const DataError& e) {
    return fail(CP_ERR_DATA, e.what());
  } catch (const IoError& e) {
    return fail(CP_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CP_ERR_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return fail(CP_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(CP_ERR_RUNTIME, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw InvalidParameter(what);
}

std::ofstream open_out(const char* path) {
  require(path != nullptr, "path is null");
  std::ofstream out(path);
  if (!out) throw IoError(std::string("cannot open '") + path + "' for writing");
  return out;
}

void close_out(std::ofstream& out, const char* path) {
  out.close();
  if (!out) throw IoError(std::string("failed writing '") + path + "'");
}

std::span<const double> vec(const double* p, std::size_t n, const char* what) {
  require(n == 0 || p != nullptr, what);
  return {p, n};
}

ShockKind to_shock(cp_shock_kind k) {
  switch (k) {
    case CP_SHOCKS_GAUSSIAN:
      return ShockKind::kGaussian;
    case CP_SHOCKS_ZERO:
      return ShockKind::kZero;
    case CP_SHOCKS_UNIFORM:
      return ShockKind::kUniform;
  }
  throw InvalidParameter("unknown shock kind");
}

PolicyKind to_policy(cp_policy_kind k) {
  switch (k) {
    case CP_POLICY_GILS:
      return PolicyKind::kGils;
    case CP_POLICY_GILS_BASE:
      return PolicyKind::kGilsBase;
    case CP_POLICY_GILS_PLUS:
      return PolicyKind::kGilsPlus;
    case CP_POLICY_CILS:
      return PolicyKind::kCils;
    case CP_POLICY_ORACLE:
      return PolicyKind::kOracle;
    case CP_POLICY_FIXED:
      return PolicyKind::kFixed;
  }
  throw InvalidParameter("unknown policy kind");
}

SeriesId to_series(cp_series s) {
  switch (s) {
    case CP_SERIES_PRICE:
      return SeriesId::kPrice;
    case CP_SERIES_REGRET:
      return SeriesId::kRegret;
    case CP_SERIES_LAMBDA_MIN:
      return SeriesId::kLambdaMin;
    case CP_SERIES_T_OVER_LAMBDA_MIN:
      return SeriesId::kTOverLambdaMin;
    case CP_SERIES_RAW_ERROR_SQ:
      return SeriesId::kRawErrorSq;
    case CP_SERIES_TRUNCATED_ERROR_SQ:
      return SeriesId::kTruncatedErrorSq;
  }
  throw InvalidParameter("unknown series");
}

PolicySpec to_policy_spec(const cp_policy_params& p) {
  PolicySpec spec;
  spec.kind = to_policy(p.kind);
  spec.kappa = p.kappa;
  spec.extra_dims = p.extra_dims;
  spec.extra_x_max = p.extra_x_max;
  if (p.bootstrap_periods > 0) spec.bootstrap_periods = p.bootstrap_periods;
  if (p.r_max >= 0.0) spec.r_max = p.r_max;
  spec.fixed_price = p.fixed_price;
  spec.project_estimates = p.no_projection == 0;
  spec.validate();
  return spec;
}

}  // namespace

extern "C" {

const char* cp_version(void) { return COVPRICE_VERSION; }

const char* cp_last_error(void) { return g_last_error.c_str(); }

void cp_policy_params_init(cp_policy_params* params) {
  if (!params) return;
  const PolicySpec d;
  *params = cp_policy_params{};
  params->kind = CP_POLICY_GILS;
  params->kappa = d.kappa;
  params->extra_dims = d.extra_dims;
  params->extra_x_max = d.extra_x_max;
  params->bootstrap_periods = 0;
  params->r_max = -1.0;
  params->fixed_price = d.fixed_price;
  params->no_projection = 0;
}

void cp_run_params_init(cp_run_params* params) {
  if (!params) return;
  *params = cp_run_params{};
  params->horizon = 1;
  params->base_seed = 0;
  params->replications = 1;
  params->max_parallelism = 0;
  params->trace_stride = TraceSchedule{}.stride;
  params->geometric_trace = 1;
}

cp_status cp_market_create(const cp_market_params* params, cp_market** out) {
  return guarded([&] {
    require(params != nullptr && out != nullptr, "null argument");
    *out = nullptr;
    const auto& p = *params;
    auto cfg = std::make_shared<MarketConfig>();
    cfg->a_prime = p.a_prime;
    cfg->p0 = p.p0;
    cfg->bounds = PriceBounds{p.price_lower, p.price_upper};
    const auto gamma = vec(p.gamma, p.m, "gamma is null");
    cfg->true_theta = Theta{p.beta, std::vector<double>(gamma.begin(), gamma.end())};
    cfg->space = ParamSpace{p.b_min, p.b_max, p.r_max};
    if (p.delta0 > 0.0) cfg->delta0 = p.delta0;
    const CovarianceSpectrum cov{p.cov_lambda_min > 0.0 ? p.cov_lambda_min : 1.0,
                                 p.cov_lambda_max > 0.0 ? p.cov_lambda_max : 1.0};
    switch (p.covariate_kind) {
      case CP_COVARIATES_UNIFORM:
        cfg->covariates = CovariateSource(IidUniformCovariates{p.m, p.x_max}, cov);
        break;
      case CP_COVARIATES_MARTINGALE:
        cfg->covariates = CovariateSource(MartingaleCovariates{p.m, p.x_max}, cov);
        break;
      default:
        throw InvalidParameter("unknown covariate kind");
    }
    cfg->shocks = ShockSource{to_shock(p.shock_kind), p.sigma};
    cfg->validate();
    *out = new cp_market{std::move(cfg)};
  });
}

void cp_market_destroy(cp_market* market) { delete market; }

size_t cp_market_dim(const cp_market* market) { return market ? market->cfg->m() : 0; }

cp_status cp_market_optimal_price(const cp_market* market, const double* x, size_t m, double* out) {
  return guarded([&] {
    require(market != nullptr && out != nullptr, "null argument");
    const auto& c = *market->cfg;
    require(m == c.m(), "covariate length does not match the market");
    *out = optimal_price(c.true_theta, c.a_prime, c.p0, vec(x, m, "x is null"), c.bounds);
  });
}

cp_status cp_market_theory_constants(const cp_market* market, cp_theory_constants* out) {
  return guarded([&] {
    require(market != nullptr && out != nullptr, "null argument");
    const auto& c = *market->cfg;
    if (!c.delta0) throw ConfigError("theory constants need a positive delta0");
    TheoryInputs in;
    in.space = c.space;
    in.a_prime = c.a_prime;
    in.p0 = c.p0;
    in.delta0 = *c.delta0;
    in.m = c.m();
    in.x_max = c.covariates.bound();
    in.sigma_eps = c.shocks.kind == ShockKind::kZero ? 0.0 : c.shocks.sigma;
    in.covariance = c.covariates.declared_covariance();
    const auto k = theory_constants(in);
    *out = cp_theory_constants{k.k0, k.lambda0, k.r, k.c};
  });
}

cp_status cp_optimal_price(double a_prime, double p0, double beta, const double* gamma, const double* x, size_t m,
                           double lower, double upper, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const PriceBounds b{lower, upper};
    b.validate();
    const auto g = vec(gamma, m, "gamma is null");
    *out = optimal_price(Theta{beta, {g.begin(), g.end()}}, a_prime, p0, vec(x, m, "x is null"), b);
  });
}

cp_status cp_regret_increment(double a_prime, double p0, double beta, const double* gamma, const double* x, size_t m,
                              double lower, double upper, double price, double* out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    const PriceBounds b{lower, upper};
    b.validate();
    const auto g = vec(gamma, m, "gamma is null");
    *out = regret_increment(Theta{beta, {g.begin(), g.end()}}, a_prime, p0, price, vec(x, m, "x is null"), b);
  });
}

cp_status cp_run_replications(const cp_market* market, const cp_policy_params* policy, const cp_run_params* run,
                              cp_summary** out) {
  return guarded([&] {
    require(market && policy && run && out, "null argument");
    *out = nullptr;
    EpisodeConfig cfg;
    cfg.market = market->cfg;
    cfg.policy = to_policy_spec(*policy);
    cfg.horizon = run->horizon;
    cfg.seed = run->base_seed;
    cfg.schedule.stride = run->trace_stride > 0 ? run->trace_stride : TraceSchedule{}.stride;
    cfg.schedule.geometric = run->geometric_trace != 0;
    cfg.validate();
    ReplicationOptions opts;
    opts.replications = run->replications;
    opts.base_seed = run->base_seed;
    opts.max_parallelism = run->max_parallelism > 0 ? run->max_parallelism
                                                    : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    *out = new cp_summary{run_replications(cfg, opts)};
  });
}

void cp_summary_destroy(cp_summary* summary) { delete summary; }

size_t cp_summary_points(const cp_summary* summary) { return summary ? summary->summary.t.size() : 0; }

size_t cp_summary_replications(const cp_summary* summary) { return summary ? summary->summary.replications : 0; }

int cp_summary_truncated(const cp_summary* summary) { return summary && summary->summary.truncated ? 1 : 0; }

cp_status cp_summary_periods(const cp_summary* summary, uint64_t* t, size_t len) {
  return guarded([&] {
    require(summary && t, "null argument");
    const auto& s = summary->summary;
    require(len == s.t.size(), "length does not match the number of points");
    std::copy(s.t.begin(), s.t.end(), t);
  });
}

cp_status cp_summary_series(const cp_summary* summary, cp_series which, double* mean, double* ci_halfwidth,
                            size_t len) {
  return guarded([&] {
    require(summary != nullptr, "null argument");
    const auto& st = series(summary->summary, to_series(which));
    require(len == st.mean.size(), "length does not match the number of points");
    if (mean) std::copy(st.mean.begin(), st.mean.end(), mean);
    if (ci_halfwidth) std::copy(st.ci_halfwidth.begin(), st.ci_halfwidth.end(), ci_halfwidth);
  });
}

cp_status cp_summary_final_regrets(const cp_summary* summary, double* out, size_t len) {
  return guarded([&] {
    require(summary && out, "null argument");
    const auto& r = summary->summary.final_regrets;
    require(len == r.size(), "length does not match the number of replications");
    std::copy(r.begin(), r.end(), out);
  });
}

cp_status cp_summary_write_csv(const cp_summary* summary, const char* path) {
  return guarded([&] {
    require(summary != nullptr, "null argument");
    auto f = open_out(path);
    write_summary_csv(summary->summary, f);
    close_out(f, path);
  });
}

cp_status cp_summary_write_series_csv(const cp_summary* summary, cp_series which, const char* path) {
  return guarded([&] {
    require(summary != nullptr, "null argument");
    const auto id = to_series(which);
    auto f = open_out(path);
    write_series_csv(summary->summary, id, f);
    close_out(f, path);
  });
}

cp_status cp_summary_write_final_regrets_csv(const cp_summary* summary, const char* path) {
  return guarded([&] {
    require(summary != nullptr, "null argument");
    auto f = open_out(path);
    write_final_regrets_csv(summary->summary, f);
    close_out(f, path);
  });
}

cp_status cp_diagnose_csv(const char* summary_csv, const char* out_csv) {
  return guarded([&] {
    require(summary_csv != nullptr, "null argument");
    std::ifstream in(summary_csv);
    if (!in) throw IoError(std::string("cannot open '") + summary_csv + "'");
    const auto cols = read_summary_csv(in);
    const auto d = derive_series(cols.t, cols.mean_lambda_min, cols.mean_regret, cols.mean_error_sq);
    auto f = open_out(out_csv);
    write_derived_csv(d, f);
    close_out(f, out_csv);
  });
}

cp_status cp_dataset_load(const char* csv_path, const char* schema_path, cp_dataset** out) {
  return guarded([&] {
    require(csv_path && schema_path && out, "null argument");
    *out = nullptr;
    const auto schema = load_schema(schema_path);
    *out = new cp_dataset{load_csv(csv_path, schema)};
  });
}

cp_status cp_dataset_write_planted(const char* csv_path, const char* schema_path, size_t rows, uint64_t seed,
                                   double noise_sigma) {
  return guarded([&] {
    require(csv_path != nullptr, "null argument");
    require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be finite and non-negative");
    PlantedModel model;
    model.noise_sigma = noise_sigma;
    auto f = open_out(csv_path);
    write_planted_csv(f, rows, seed, model);
    close_out(f, csv_path);
    if (schema_path) {
      auto s = open_out(schema_path);
      write_schema(planted_schema(model), s);
      close_out(s, schema_path);
    }
  });
}

void cp_dataset_destroy(cp_dataset* dataset) { delete dataset; }

size_t cp_dataset_rows(const cp_dataset* dataset) { return dataset ? dataset->data.rows() : 0; }

size_t cp_dataset_rejected(const cp_dataset* dataset) { return dataset ? dataset->data.rejected_rows : 0; }

size_t cp_dataset_covariates(const cp_dataset* dataset) { return dataset ? dataset->data.covariates.cols() : 0; }

cp_status cp_fit_create(const cp_dataset* dataset, cp_fit** out) {
  return guarded([&] {
    require(dataset && out, "null argument");
    *out = nullptr;
    *out = new cp_fit{fit_ground_truth(dataset->data)};
  });
}

void cp_fit_destroy(cp_fit* fit) { delete fit; }

cp_status cp_fit_coefficients(const cp_fit* fit, int raw, double* coef, double* std_error, size_t len) {
  return guarded([&] {
    require(fit != nullptr, "null argument");
    const auto& f = fit->fit;
    require(len == f.covariate_coefs.size() + 2, "length must be covariates + 2");
    if (coef) {
      coef[0] = raw ? f.raw_intercept : f.intercept;
      coef[1] = f.price_coef;
      const auto& c = raw ? f.raw_covariate_coefs : f.covariate_coefs;
      std::copy(c.begin(), c.end(), coef + 2);
    }
    if (std_error) {
      const auto& se = raw ? f.raw_std_errors : f.std_errors;
      std::copy(se.begin(), se.end(), std_error);
    }
  });
}

double cp_fit_residual_std(const cp_fit* fit) { return fit ? fit->fit.residual_std : std::nan(""); }

cp_status cp_fit_write_report(const cp_fit* fit, const char* report_path, const char* kv_path) {
  return guarded([&] {
    require(fit != nullptr, "null argument");
    if (report_path) {
      auto f = open_out(report_path);
      f << fit_report(fit->fit);
      close_out(f, report_path);
    }
    if (kv_path) {
      auto f = open_out(kv_path);
      write_fit_kv(fit->fit, f);
      close_out(f, kv_path);
    }
  });
}

void cp_replay_params_init(cp_replay_params* params) {
  if (!params) return;
  const ReplayOptions d;
  *params = cp_replay_params{};
  params->p0 = d.p0;
  params->price_lower = 0.0;
  params->price_upper = 0.0;
  params->b_min = d.space.b_min;
  params->b_max = d.space.b_max;
  params->r_max = d.space.r_max;
  params->shock_kind = CP_SHOCKS_ZERO;
  params->sigma = 0.0;
  params->permute = d.permute ? 1 : 0;
}

cp_status cp_market_create_replay(const cp_dataset* dataset, const cp_fit* fit, const cp_replay_params* params,
                                  cp_market** out) {
  return guarded([&] {
    require(dataset && fit && params && out, "null argument");
    *out = nullptr;
    ReplayOptions opts;
    opts.p0 = params->p0;
    if (params->price_lower < params->price_upper)
      opts.bounds = PriceBounds{params->price_lower, params->price_upper};
    opts.space = ParamSpace{params->b_min, params->b_max, params->r_max};
    const double sigma = params->sigma < 0.0 ? fit->fit.residual_std : params->sigma;
    opts.shocks = ShockSource{to_shock(params->shock_kind), sigma};
    opts.permute = params->permute != 0;
    *out = new cp_market{make_replay_market(dataset->data, fit->fit, opts)};
  });
}

cp_status cp_estimator_create(size_t m, cp_estimator** out) {
  return guarded([&] {
    require(out != nullptr, "null argument");
    *out = new cp_estimator(m);
  });
}

void cp_estimator_destroy(cp_estimator* est) { delete est; }

cp_status cp_estimator_update(cp_estimator* est, double price, const double* x, size_t m, double demand,
                              double a_prime, double p0) {
  return guarded([&] {
    require(est != nullptr, "null argument");
    require(m == est->est.dim(), "covariate length does not match the estimator");
    est->est.update(price, vec(x, m, "x is null"), demand, a_prime, p0);
  });
}

cp_status cp_estimator_solve(const cp_estimator* est, double* theta, size_t len) {
  try {
    if (!est || !theta) return fail(CP_ERR_INVALID_ARGUMENT, "null argument");
    if (len != est->est.dim() + 1) return fail(CP_ERR_INVALID_ARGUMENT, "length must be m + 1");
    const auto sol = est->est.solve();
    if (!sol) return fail(CP_ERR_NOT_IDENTIFIABLE, "Gram matrix is not yet identifiable");
    const auto flat = sol->flatten();
    std::copy(flat.begin(), flat.end(), theta);
    g_last_error.clear();
    return CP_OK;
  } catch (const std::exception& e) {
    return fail(CP_ERR_RUNTIME, e.what());
  }
}

double cp_estimator_min_eigenvalue(const cp_estimator* est) {
  if (!est) return std::nan("");
  try {
    return est->est.min_eigenvalue();
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return std::nan("");
  }
}

cp_status cp_project(double* theta, size_t len, double b_min, double b_max, double r_max) {
  return guarded([&] {
    require(theta != nullptr && len >= 1, "theta must have length >= 1");
    const ParamSpace space{b_min, b_max, r_max};
    space.validate();
    const auto p = project(Theta::unflatten({theta, len}), space);
    const auto flat = p.flatten();
    std::copy(flat.begin(), flat.end(), theta);
  });
}

}  // extern "C"
