// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "covprice/covprice.h"
#include "doctest.h"

namespace {

cp_market_params base_params(const std::vector<double>& gamma) {
  cp_market_params p{};
  p.a_prime = 0.6;
  p.p0 = 1.0;
  p.price_lower = 0.75;
  p.price_upper = 2.0;
  p.beta = -0.5;
  p.gamma = gamma.data();
  p.m = gamma.size();
  p.b_min = -0.55;
  p.b_max = -0.4;
  p.r_max = 1.0;
  p.delta0 = 0.5;
  p.covariate_kind = CP_COVARIATES_UNIFORM;
  p.x_max = 1.1447;
  p.shock_kind = CP_SHOCKS_GAUSSIAN;
  p.sigma = 0.05;
  return p;
}

std::filesystem::path temp_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / ("covprice_c_api_" + std::string(name));
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_SUITE("c_api") {
  TEST_CASE("invalid arguments report a status and a message") {
    cp_market* m = nullptr;
    CHECK(cp_market_create(nullptr, &m) == CP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(cp_last_error()).size() > 0);

    const std::vector<double> gamma{0.01, 0.01};
    auto p = base_params(gamma);
    p.beta = -0.3;  // outside [b_min, b_max]
    CHECK(cp_market_create(&p, &m) == CP_ERR_CONFIG);
    CHECK(m == nullptr);
    CHECK(std::string(cp_last_error()).find("parameter space") != std::string::npos);

    p = base_params(gamma);
    p.price_lower = 3.0;
    CHECK(cp_market_create(&p, &m) == CP_ERR_CONFIG);
    CHECK(cp_optimal_price(0.6, 1.0, 0.1, nullptr, nullptr, 0, 0.5, 2.0, nullptr) == CP_ERR_INVALID_ARGUMENT);
    double out = 0.0;
    CHECK(cp_optimal_price(0.6, 1.0, 0.1, nullptr, nullptr, 0, 0.5, 2.0, &out) == CP_ERR_INVALID_ARGUMENT);
    CHECK(std::string(cp_version()).size() > 0);
  }

  TEST_CASE("closed forms") {
    double p = 0.0, r = 0.0;
    REQUIRE(cp_optimal_price(0.6, 1.0, -0.5, nullptr, nullptr, 0, 0.5, 2.0, &p) == CP_OK);
    CHECK(p == doctest::Approx(1.1));
    REQUIRE(cp_regret_increment(0.6, 1.0, -0.5, nullptr, nullptr, 0, 0.5, 2.0, 1.3, &r) == CP_OK);
    CHECK(r == doctest::Approx(0.02));
    const double gamma[] = {0.2}, x[] = {0.5};
    REQUIRE(cp_optimal_price(0.6, 1.0, -0.5, gamma, x, 1, 0.5, 2.0, &p) == CP_OK);
    CHECK(p == doctest::Approx(1.2));
  }

  TEST_CASE("market and replication accessors") {
    const std::vector<double> gamma{0.01, 0.01};
    const auto params = base_params(gamma);
    cp_market* m = nullptr;
    REQUIRE(cp_market_create(&params, &m) == CP_OK);
    CHECK(cp_market_dim(m) == 2);
    const double x[] = {0.0, 0.0};
    double p = 0.0;
    REQUIRE(cp_market_optimal_price(m, x, 2, &p) == CP_OK);
    CHECK(p == doctest::Approx(1.1));
    CHECK(cp_market_optimal_price(m, x, 3, &p) != CP_OK);

    cp_theory_constants k{};
    REQUIRE(cp_market_theory_constants(m, &k) == CP_OK);
    CHECK(k.lambda0 == doctest::Approx(0.04));

    cp_policy_params oracle;
    cp_policy_params_init(&oracle);
    oracle.kind = CP_POLICY_ORACLE;
    cp_run_params run;
    cp_run_params_init(&run);
    run.horizon = 1000;
    run.replications = 4;
    run.max_parallelism = 2;
    run.trace_stride = 250;
    cp_summary* s = nullptr;
    REQUIRE(cp_run_replications(m, &oracle, &run, &s) == CP_OK);
    const size_t n = cp_summary_points(s);
    CHECK(n > 4);
    CHECK(cp_summary_replications(s) == 4);
    CHECK(cp_summary_truncated(s) == 0);
    std::vector<uint64_t> t(n);
    std::vector<double> mean(n), ci(n), fin(4);
    REQUIRE(cp_summary_periods(s, t.data(), n) == CP_OK);
    CHECK(t.back() == 1000);
    REQUIRE(cp_summary_series(s, CP_SERIES_REGRET, mean.data(), ci.data(), n) == CP_OK);
    for (double v : mean) CHECK(v == 0.0);
    REQUIRE(cp_summary_final_regrets(s, fin.data(), 4) == CP_OK);
    for (double v : fin) CHECK(v == 0.0);
    CHECK(cp_summary_series(s, CP_SERIES_REGRET, mean.data(), ci.data(), n - 1) == CP_ERR_INVALID_ARGUMENT);

    const auto dir = temp_dir("summary");
    CHECK(cp_summary_write_csv(s, (dir / "summary.csv").c_str()) == CP_OK);
    CHECK(cp_summary_write_series_csv(s, CP_SERIES_PRICE, (dir / "price.csv").c_str()) == CP_OK);
    CHECK(cp_summary_write_final_regrets_csv(s, (dir / "final.csv").c_str()) == CP_OK);
    CHECK(cp_diagnose_csv((dir / "summary.csv").c_str(), (dir / "derived.csv").c_str()) == CP_OK);
    CHECK(std::filesystem::exists(dir / "derived.csv"));
    CHECK(cp_summary_write_csv(s, "/nonexistent/dir/summary.csv") == CP_ERR_IO);
    CHECK(cp_diagnose_csv("/nonexistent/summary.csv", (dir / "d.csv").c_str()) == CP_ERR_IO);
    cp_summary_destroy(s);

    cp_policy_params bad;
    cp_policy_params_init(&bad);
    bad.kind = CP_POLICY_CILS;
    bad.kappa = -1.0;
    CHECK(cp_run_replications(m, &bad, &run, &s) == CP_ERR_CONFIG);
    cp_market_destroy(m);
  }

  TEST_CASE("estimator handle") {
    cp_estimator* e = nullptr;
    REQUIRE(cp_estimator_create(1, &e) == CP_OK);
    double theta[2];
    CHECK(cp_estimator_solve(e, theta, 2) == CP_ERR_NOT_IDENTIFIABLE);
    const double xs[][1] = {{0.5}, {-0.25}, {1.0}};
    const double prices[] = {1.2, 0.9, 1.5};
    for (int i = 0; i < 3; ++i) {
      const double d = 0.6 - 0.5 * (prices[i] - 1.0) + 0.2 * xs[i][0];
      REQUIRE(cp_estimator_update(e, prices[i], xs[i], 1, d, 0.6, 1.0) == CP_OK);
    }
    REQUIRE(cp_estimator_solve(e, theta, 2) == CP_OK);
    CHECK(theta[0] == doctest::Approx(-0.5));
    CHECK(theta[1] == doctest::Approx(0.2));
    CHECK(cp_estimator_min_eigenvalue(e) > 0.0);
    CHECK(cp_estimator_update(e, NAN, xs[0], 1, 1.0, 0.6, 1.0) == CP_ERR_DATA);
    CHECK(cp_estimator_update(e, 1.0, xs[0], 2, 1.0, 0.6, 1.0) != CP_OK);
    cp_estimator_destroy(e);

    double t2[] = {-0.6, 3.0, 4.0};
    REQUIRE(cp_project(t2, 3, -0.55, -0.4, 1.0) == CP_OK);
    CHECK(t2[0] == -0.55);
    CHECK(t2[1] == doctest::Approx(0.6));
    CHECK(t2[2] == doctest::Approx(0.8));
    CHECK(cp_project(t2, 3, -0.4, -0.55, 1.0) == CP_ERR_CONFIG);
  }

  TEST_CASE("dataset, fit and replay") {
    const auto dir = temp_dir("data");
    const auto csv = (dir / "planted.csv").string(), schema = (dir / "planted.schema").string();
    REQUIRE(cp_dataset_write_planted(csv.c_str(), schema.c_str(), 3000, 3, 0.5) == CP_OK);
    cp_dataset* ds = nullptr;
    REQUIRE(cp_dataset_load(csv.c_str(), schema.c_str(), &ds) == CP_OK);
    CHECK(cp_dataset_rows(ds) == 3000);
    CHECK(cp_dataset_rejected(ds) == 0);
    CHECK(cp_dataset_covariates(ds) == 7);
    cp_fit* fit = nullptr;
    REQUIRE(cp_fit_create(ds, &fit) == CP_OK);
    std::vector<double> coef(9), se(9);
    REQUIRE(cp_fit_coefficients(fit, 1, coef.data(), se.data(), 9) == CP_OK);
    CHECK(std::abs(coef[1] + 0.012) < 4.0 * se[1]);
    CHECK(cp_fit_residual_std(fit) == doctest::Approx(0.5).epsilon(0.05));
    CHECK(cp_fit_write_report(fit, (dir / "fit.txt").c_str(), (dir / "fit.kv").c_str()) == CP_OK);

    cp_replay_params rp;
    cp_replay_params_init(&rp);
    cp_market* m = nullptr;
    REQUIRE(cp_market_create_replay(ds, fit, &rp, &m) == CP_OK);
    cp_policy_params oracle;
    cp_policy_params_init(&oracle);
    oracle.kind = CP_POLICY_ORACLE;
    cp_run_params run;
    cp_run_params_init(&run);
    run.horizon = 5000;
    cp_summary* s = nullptr;
    REQUIRE(cp_run_replications(m, &oracle, &run, &s) == CP_OK);
    CHECK(cp_summary_truncated(s) == 1);
    double fin = -1.0;
    REQUIRE(cp_summary_final_regrets(s, &fin, 1) == CP_OK);
    CHECK(fin == 0.0);
    cp_summary_destroy(s);
    cp_market_destroy(m);
    cp_fit_destroy(fit);
    cp_dataset_destroy(ds);

    CHECK(cp_dataset_load("/nonexistent.csv", schema.c_str(), &ds) == CP_ERR_IO);
    std::FILE* f = std::fopen((dir / "bad.schema").c_str(), "w");
    std::fputs("Demand = demand\n", f);
    std::fclose(f);
    CHECK(cp_dataset_load(csv.c_str(), (dir / "bad.schema").c_str(), &ds) == CP_ERR_CONFIG);
  }
}
