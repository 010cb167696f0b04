/* Copyright 2026 The covprice Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the covprice dynamic-pricing simulation library.
 *
 * Conventions:
 *  - Every fallible function returns a cp_status; CP_OK is zero.
 *  - On failure, cp_last_error() returns a message for the calling thread,
 *    valid until the next covprice call on that thread.
 *  - Objects are opaque handles created by *_create / *_load / *_run and
 *    released with the matching *_destroy. Destroying NULL is a no-op.
 *  - Handles are immutable after creation except cp_estimator; immutable
 *    handles may be shared read-only across threads.
 */
#ifndef COVPRICE_H
#define COVPRICE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define COVPRICE_API __declspec(dllexport)
#else
#  define COVPRICE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cp_status {
  CP_OK = 0,
  CP_ERR_INVALID_ARGUMENT = 1, /* null pointer, unknown enum, bad parameter */
  CP_ERR_CONFIG = 2,           /* inconsistent configuration */
  CP_ERR_DATA = 3,             /* malformed or rank-deficient data */
  CP_ERR_IO = 4,               /* file cannot be read or written */
  CP_ERR_NOT_IDENTIFIABLE = 5, /* estimator Gram matrix still singular */
  CP_ERR_RUNTIME = 6           /* any other failure */
} cp_status;

typedef enum cp_covariate_kind {
  CP_COVARIATES_UNIFORM = 0,    /* iid U[-x_max, x_max] per coordinate */
  CP_COVARIATES_MARTINGALE = 1  /* bounded martingale differences */
} cp_covariate_kind;

typedef enum cp_shock_kind {
  CP_SHOCKS_GAUSSIAN = 0,
  CP_SHOCKS_ZERO = 1,
  CP_SHOCKS_UNIFORM = 2 /* U[-sqrt(3) sigma, sqrt(3) sigma] */
} cp_shock_kind;

typedef enum cp_policy_kind {
  CP_POLICY_GILS = 0,
  CP_POLICY_GILS_BASE = 1,
  CP_POLICY_GILS_PLUS = 2,
  CP_POLICY_CILS = 3,
  CP_POLICY_ORACLE = 4,
  CP_POLICY_FIXED = 5
} cp_policy_kind;

typedef struct cp_market_params {
  double a_prime;
  double p0;
  double price_lower;
  double price_upper;
  double beta;
  const double* gamma; /* length m; may be NULL when m == 0 */
  size_t m;
  double b_min;
  double b_max;
  double r_max;
  double delta0; /* <= 0 disables the incumbent-separation check */
  cp_covariate_kind covariate_kind;
  double x_max;
  /* Declared covariance spectrum for theory constants; 0 means 1. */
  double cov_lambda_min;
  double cov_lambda_max;
  cp_shock_kind shock_kind;
  double sigma;
} cp_market_params;

typedef struct cp_policy_params {
  cp_policy_kind kind;
  double kappa;             /* CILS */
  size_t extra_dims;        /* GILS+ */
  double extra_x_max;       /* GILS+ */
  size_t bootstrap_periods; /* 0 = default max(m+1, 2) */
  double r_max;             /* < 0 = use the market's r_max */
  double fixed_price;       /* fixed */
  int no_projection;        /* nonzero prices from the raw, unprojected estimate */
} cp_policy_params;

typedef struct cp_run_params {
  uint64_t horizon;
  uint64_t base_seed;
  size_t replications;
  size_t max_parallelism; /* 0 = hardware concurrency */
  uint64_t trace_stride;  /* 0 = default 10000 */
  int geometric_trace;    /* nonzero also records powers of two */
} cp_run_params;

typedef struct cp_theory_constants {
  double k0;
  double lambda0;
  double r;
  double c;
} cp_theory_constants;

typedef enum cp_series {
  CP_SERIES_PRICE = 0,
  CP_SERIES_REGRET = 1,
  CP_SERIES_LAMBDA_MIN = 2,
  CP_SERIES_T_OVER_LAMBDA_MIN = 3,
  CP_SERIES_RAW_ERROR_SQ = 4,
  CP_SERIES_TRUNCATED_ERROR_SQ = 5
} cp_series;

typedef struct cp_market cp_market;
typedef struct cp_summary cp_summary;
typedef struct cp_dataset cp_dataset;
typedef struct cp_fit cp_fit;
typedef struct cp_estimator cp_estimator;

COVPRICE_API const char* cp_version(void);
COVPRICE_API const char* cp_last_error(void);

/* Defaults: policy GILS, kappa 0.1, extra_dims 1, extra_x_max 1.1447,
 * estimates projected onto the parameter space. */
COVPRICE_API void cp_policy_params_init(cp_policy_params* params);
/* Defaults: horizon 1, seed 0, 1 replication, stride 10000, geometric. */
COVPRICE_API void cp_run_params_init(cp_run_params* params);

/* ---- market ---------------------------------------------------------- */

COVPRICE_API cp_status cp_market_create(const cp_market_params* params, cp_market** out);
COVPRICE_API void cp_market_destroy(cp_market* market);
COVPRICE_API size_t cp_market_dim(const cp_market* market);
COVPRICE_API cp_status cp_market_optimal_price(const cp_market* market, const double* x, size_t m, double* out);
COVPRICE_API cp_status cp_market_theory_constants(const cp_market* market, cp_theory_constants* out);

/* Pure formulas on raw parameters. */
COVPRICE_API cp_status cp_optimal_price(double a_prime, double p0, double beta, const double* gamma, const double* x,
                                        size_t m, double lower, double upper, double* out);
COVPRICE_API cp_status cp_regret_increment(double a_prime, double p0, double beta, const double* gamma,
                                           const double* x, size_t m, double lower, double upper, double price,
                                           double* out);

/* ---- simulation ------------------------------------------------------ */

COVPRICE_API cp_status cp_run_replications(const cp_market* market, const cp_policy_params* policy,
                                           const cp_run_params* run, cp_summary** out);
COVPRICE_API void cp_summary_destroy(cp_summary* summary);
COVPRICE_API size_t cp_summary_points(const cp_summary* summary);
COVPRICE_API size_t cp_summary_replications(const cp_summary* summary);
COVPRICE_API int cp_summary_truncated(const cp_summary* summary);
/* Copies the recorded periods into t[0..points). */
COVPRICE_API cp_status cp_summary_periods(const cp_summary* summary, uint64_t* t, size_t len);
/* Mean and 95% half-width (NaN when undefined) of a series. Either output
 * may be NULL. */
COVPRICE_API cp_status cp_summary_series(const cp_summary* summary, cp_series series, double* mean,
                                         double* ci_halfwidth, size_t len);
COVPRICE_API cp_status cp_summary_final_regrets(const cp_summary* summary, double* out, size_t len);
/* Writes the summary CSV (see README for the column layout). */
COVPRICE_API cp_status cp_summary_write_csv(const cp_summary* summary, const char* path);
/* Writes one t,mean,ci_halfwidth CSV for a single series. */
COVPRICE_API cp_status cp_summary_write_series_csv(const cp_summary* summary, cp_series series, const char* path);
COVPRICE_API cp_status cp_summary_write_final_regrets_csv(const cp_summary* summary, const char* path);

/* Reads a summary CSV and writes the derived diagnostic series CSV. */
COVPRICE_API cp_status cp_diagnose_csv(const char* summary_csv, const char* out_csv);

/* ---- datasets and replay --------------------------------------------- */

COVPRICE_API cp_status cp_dataset_load(const char* csv_path, const char* schema_path, cp_dataset** out);
/* Writes a planted hotel-like CSV and its schema file. */
COVPRICE_API cp_status cp_dataset_write_planted(const char* csv_path, const char* schema_path, size_t rows,
                                                uint64_t seed, double noise_sigma);
COVPRICE_API void cp_dataset_destroy(cp_dataset* dataset);
COVPRICE_API size_t cp_dataset_rows(const cp_dataset* dataset);
COVPRICE_API size_t cp_dataset_rejected(const cp_dataset* dataset);
COVPRICE_API size_t cp_dataset_covariates(const cp_dataset* dataset);

COVPRICE_API cp_status cp_fit_create(const cp_dataset* dataset, cp_fit** out);
COVPRICE_API void cp_fit_destroy(cp_fit* fit);
/* Coefficients on the standardized scale: (intercept, price, covariates...);
 * raw != 0 selects the unstandardized covariate scale. len must be m + 2. */
COVPRICE_API cp_status cp_fit_coefficients(const cp_fit* fit, int raw, double* coef, double* std_error, size_t len);
COVPRICE_API double cp_fit_residual_std(const cp_fit* fit);
COVPRICE_API cp_status cp_fit_write_report(const cp_fit* fit, const char* report_path, const char* kv_path);

typedef struct cp_replay_params {
  double p0;
  double price_lower; /* lower >= upper selects data-driven bounds */
  double price_upper;
  double b_min;
  double b_max;
  double r_max;
  cp_shock_kind shock_kind;
  double sigma; /* < 0 uses the fit's residual std */
  int permute;
} cp_replay_params;

/* Defaults: p0 129.92, data-driven bounds, b in [-1e10, -1e-10], r_max 1,
 * zero shocks, permuted rows. */
COVPRICE_API void cp_replay_params_init(cp_replay_params* params);
COVPRICE_API cp_status cp_market_create_replay(const cp_dataset* dataset, const cp_fit* fit,
                                               const cp_replay_params* params, cp_market** out);

/* ---- online estimator ------------------------------------------------ */

COVPRICE_API cp_status cp_estimator_create(size_t m, cp_estimator** out);
COVPRICE_API void cp_estimator_destroy(cp_estimator* est);
COVPRICE_API cp_status cp_estimator_update(cp_estimator* est, double price, const double* x, size_t m, double demand,
                                           double a_prime, double p0);
/* theta[0] = beta, theta[1..m] = gamma; CP_ERR_NOT_IDENTIFIABLE until the
 * Gram matrix is nonsingular. */
COVPRICE_API cp_status cp_estimator_solve(const cp_estimator* est, double* theta, size_t len);
COVPRICE_API double cp_estimator_min_eigenvalue(const cp_estimator* est);
/* Projects theta (length len = m + 1) onto the parameter space in place. */
COVPRICE_API cp_status cp_project(double* theta, size_t len, double b_min, double b_max, double r_max);

#ifdef __cplusplus
}
#endif

#endif /* COVPRICE_H */
