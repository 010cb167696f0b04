// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "experiment_spec.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace covprice::cli {

namespace {

std::string where(const YAML::Node& n) {
  const auto mark = n.Mark();
  if (mark.is_null()) return "";
  return "line " + std::to_string(mark.line + 1) + ": ";
}

[[noreturn]] void bad(const YAML::Node& n, const std::string& msg) { throw SpecError(where(n) + msg); }

void expect_map(const YAML::Node& n, const std::string& what, std::initializer_list<const char*> keys) {
  if (!n.IsMap()) bad(n, what + " must be a mapping");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) bad(kv.first, "unknown key '" + key + "' in " + what);
  }
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  if (!n.IsScalar()) bad(n, "'" + key + "' must be a scalar");
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    bad(n, "'" + key + "' has an invalid value '" + n.Scalar() + "'");
  }
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out) {
  if (const auto n = map[key]) out = scalar<T>(n, key);
}

template <class T>
void read(const YAML::Node& map, const char* key, std::optional<T>& out) {
  if (const auto n = map[key]) out = scalar<T>(n, key);
}

void read_pair(const YAML::Node& map, const char* key, double& lo, double& hi) {
  const auto n = map[key];
  if (!n) return;
  if (!n.IsSequence() || n.size() != 2) bad(n, std::string("'") + key + "' must be a two-element list");
  lo = scalar<double>(n[0], key);
  hi = scalar<double>(n[1], key);
}

MarketSpec parse_market(const YAML::Node& n) {
  expect_map(n, "market", {"a_prime", "p0", "price_bounds", "beta", "gamma", "param_space", "delta0", "covariates",
                           "shocks"});
  MarketSpec m;
  read(n, "a_prime", m.a_prime);
  read(n, "p0", m.p0);
  read_pair(n, "price_bounds", m.price_lower, m.price_upper);
  read(n, "beta", m.beta);
  if (const auto g = n["gamma"]) {
    if (!g.IsSequence()) bad(g, "'gamma' must be a list");
    for (const auto& v : g) m.gamma.push_back(scalar<double>(v, "gamma"));
  }
  if (const auto s = n["param_space"]) {
    expect_map(s, "param_space", {"b_min", "b_max", "r_max"});
    read(s, "b_min", m.b_min);
    read(s, "b_max", m.b_max);
    read(s, "r_max", m.r_max);
  }
  read(n, "delta0", m.delta0);
  if (const auto c = n["covariates"]) {
    expect_map(c, "covariates", {"kind", "x_max", "covariance_spectrum"});
    read(c, "kind", m.covariates);
    read(c, "x_max", m.x_max);
    read_pair(c, "covariance_spectrum", m.cov_lambda_min, m.cov_lambda_max);
  }
  if (const auto s = n["shocks"]) {
    expect_map(s, "shocks", {"kind", "sigma"});
    read(s, "kind", m.shocks);
    read(s, "sigma", m.sigma);
  }
  return m;
}

PolicyEntry parse_policy(const YAML::Node& n) {
  expect_map(n, "policy", {"name", "kind", "kappa", "extra_dims", "extra_x_max", "bootstrap_periods", "r_max",
                           "fixed_price", "project"});
  PolicyEntry p;
  read(n, "kind", p.kind);
  p.name = p.kind;
  read(n, "name", p.name);
  read(n, "kappa", p.kappa);
  read(n, "extra_dims", p.extra_dims);
  read(n, "extra_x_max", p.extra_x_max);
  read(n, "bootstrap_periods", p.bootstrap_periods);
  read(n, "r_max", p.r_max);
  read(n, "fixed_price", p.fixed_price);
  read(n, "project", p.project);
  return p;
}

ReplaySpec parse_replay(const YAML::Node& n) {
  expect_map(n, "replay", {"csv", "schema", "planted", "p0", "price_bounds", "param_space", "shocks", "permute"});
  ReplaySpec r;
  read(n, "csv", r.csv);
  read(n, "schema", r.schema);
  if (const auto p = n["planted"]) {
    expect_map(p, "planted", {"rows", "seed", "noise_sigma"});
    PlantedSpec ps;
    read(p, "rows", ps.rows);
    read(p, "seed", ps.seed);
    read(p, "noise_sigma", ps.noise_sigma);
    r.planted = ps;
  }
  read(n, "p0", r.p0);
  if (n["price_bounds"]) {
    double lo = 0.0, hi = 0.0;
    read_pair(n, "price_bounds", lo, hi);
    r.price_lower = lo;
    r.price_upper = hi;
  }
  if (const auto s = n["param_space"]) {
    expect_map(s, "param_space", {"b_min", "b_max", "r_max"});
    read(s, "b_min", r.b_min);
    read(s, "b_max", r.b_max);
    read(s, "r_max", r.r_max);
  }
  if (const auto s = n["shocks"]) {
    expect_map(s, "shocks", {"kind", "sigma"});
    read(s, "kind", r.shocks);
    if (const auto sig = s["sigma"]) {
      if (sig.IsScalar() && sig.Scalar() == "fit")
        r.sigma.reset();
      else
        r.sigma = scalar<double>(sig, "sigma");
    }
  }
  read(n, "permute", r.permute);
  return r;
}

bool one_of(const std::string& s, std::initializer_list<const char*> options) {
  return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

void emit_double(YAML::Emitter& e, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s = buf;
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  e << s;
}

void emit_pair(YAML::Emitter& e, const char* key, double lo, double hi) {
  e << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
  emit_double(e, lo);
  emit_double(e, hi);
  e << YAML::EndSeq;
}

}  // namespace

ExperimentSpec parse_spec(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw SpecError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) throw SpecError("spec is empty");
  expect_map(root, "spec", {"name", "horizon", "replications", "seed", "output", "trace", "market", "replay",
                            "policies"});
  ExperimentSpec s;
  read(root, "name", s.name);
  read(root, "horizon", s.horizon);
  read(root, "replications", s.replications);
  read(root, "seed", s.seed);
  read(root, "output", s.output);
  if (const auto t = root["trace"]) {
    expect_map(t, "trace", {"stride", "geometric"});
    read(t, "stride", s.trace_stride);
    read(t, "geometric", s.geometric_trace);
  }
  if (const auto m = root["market"]) s.market = parse_market(m);
  if (const auto r = root["replay"]) s.replay = parse_replay(r);
  const auto pols = root["policies"];
  if (!pols || !pols.IsSequence() || pols.size() == 0) bad(root, "'policies' must be a non-empty list");
  for (const auto& p : pols) s.policies.push_back(parse_policy(p));
  validate_spec(s);
  return s;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("cannot open spec '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_spec(ss.str());
  } catch (const SpecError& e) {
    throw SpecError(path + ": " + e.what());
  }
}

void validate_spec(const ExperimentSpec& s) {
  if (s.name.empty()) throw SpecError("'name' is required");
  if (s.horizon == 0) throw SpecError("'horizon' must be positive");
  if (s.replications == 0) throw SpecError("'replications' must be positive");
  if (s.trace_stride == 0) throw SpecError("'trace.stride' must be positive");
  if (!one_of(s.market.covariates, {"uniform", "martingale"}))
    throw SpecError("unknown covariate kind '" + s.market.covariates + "'");
  if (!one_of(s.market.shocks, {"gaussian", "zero", "uniform"}))
    throw SpecError("unknown shock kind '" + s.market.shocks + "'");
  std::set<std::string> names;
  for (const auto& p : s.policies) {
    if (!one_of(p.kind, {"gils", "gils_base", "gils_plus", "cils", "oracle", "fixed"}))
      throw SpecError("unknown policy kind '" + p.kind + "'");
    if (p.name.empty() || p.name.find_first_of("/\\ ") != std::string::npos || p.name == "." || p.name == "..")
      throw SpecError("policy name '" + p.name + "' is not a valid directory name");
    if (!names.insert(p.name).second) throw SpecError("duplicate policy name '" + p.name + "'");
  }
  if (s.replay) {
    const auto& r = *s.replay;
    if (r.planted && !r.csv.empty()) throw SpecError("replay takes either 'csv' or 'planted', not both");
    if (!r.planted && (r.csv.empty() || r.schema.empty()))
      throw SpecError("replay needs 'csv' and 'schema', or 'planted'");
    if (r.price_lower.has_value() != r.price_upper.has_value())
      throw SpecError("replay price_bounds needs both ends");
    if (!one_of(r.shocks, {"gaussian", "zero", "uniform"})) throw SpecError("unknown shock kind '" + r.shocks + "'");
  }
}

std::string serialize_spec(const ExperimentSpec& s) {
  YAML::Emitter e;
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << s.name;
  e << YAML::Key << "horizon" << YAML::Value << s.horizon;
  e << YAML::Key << "replications" << YAML::Value << s.replications;
  e << YAML::Key << "seed" << YAML::Value << s.seed;
  if (!s.output.empty()) e << YAML::Key << "output" << YAML::Value << s.output;
  e << YAML::Key << "trace" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "stride" << YAML::Value << s.trace_stride;
  e << YAML::Key << "geometric" << YAML::Value << s.geometric_trace;
  e << YAML::EndMap;

  const auto& m = s.market;
  e << YAML::Key << "market" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "a_prime" << YAML::Value;
  emit_double(e, m.a_prime);
  e << YAML::Key << "p0" << YAML::Value;
  emit_double(e, m.p0);
  emit_pair(e, "price_bounds", m.price_lower, m.price_upper);
  e << YAML::Key << "beta" << YAML::Value;
  emit_double(e, m.beta);
  e << YAML::Key << "gamma" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (double g : m.gamma) emit_double(e, g);
  e << YAML::EndSeq;
  e << YAML::Key << "param_space" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "b_min" << YAML::Value;
  emit_double(e, m.b_min);
  e << YAML::Key << "b_max" << YAML::Value;
  emit_double(e, m.b_max);
  e << YAML::Key << "r_max" << YAML::Value;
  emit_double(e, m.r_max);
  e << YAML::EndMap;
  if (m.delta0) {
    e << YAML::Key << "delta0" << YAML::Value;
    emit_double(e, *m.delta0);
  }
  e << YAML::Key << "covariates" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << m.covariates;
  e << YAML::Key << "x_max" << YAML::Value;
  emit_double(e, m.x_max);
  emit_pair(e, "covariance_spectrum", m.cov_lambda_min, m.cov_lambda_max);
  e << YAML::EndMap;
  e << YAML::Key << "shocks" << YAML::Value << YAML::Flow << YAML::BeginMap;
  e << YAML::Key << "kind" << YAML::Value << m.shocks;
  e << YAML::Key << "sigma" << YAML::Value;
  emit_double(e, m.sigma);
  e << YAML::EndMap;
  e << YAML::EndMap;

  if (s.replay) {
    const auto& r = *s.replay;
    e << YAML::Key << "replay" << YAML::Value << YAML::BeginMap;
    if (r.planted) {
      e << YAML::Key << "planted" << YAML::Value << YAML::Flow << YAML::BeginMap;
      e << YAML::Key << "rows" << YAML::Value << r.planted->rows;
      e << YAML::Key << "seed" << YAML::Value << r.planted->seed;
      e << YAML::Key << "noise_sigma" << YAML::Value;
      emit_double(e, r.planted->noise_sigma);
      e << YAML::EndMap;
    } else {
      e << YAML::Key << "csv" << YAML::Value << r.csv;
      e << YAML::Key << "schema" << YAML::Value << r.schema;
    }
    e << YAML::Key << "p0" << YAML::Value;
    emit_double(e, r.p0);
    if (r.price_lower) emit_pair(e, "price_bounds", *r.price_lower, *r.price_upper);
    e << YAML::Key << "param_space" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "b_min" << YAML::Value;
    emit_double(e, r.b_min);
    e << YAML::Key << "b_max" << YAML::Value;
    emit_double(e, r.b_max);
    e << YAML::Key << "r_max" << YAML::Value;
    emit_double(e, r.r_max);
    e << YAML::EndMap;
    e << YAML::Key << "shocks" << YAML::Value << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "kind" << YAML::Value << r.shocks;
    e << YAML::Key << "sigma" << YAML::Value;
    if (r.sigma)
      emit_double(e, *r.sigma);
    else
      e << "fit";
    e << YAML::EndMap;
    e << YAML::Key << "permute" << YAML::Value << r.permute;
    e << YAML::EndMap;
  }

  e << YAML::Key << "policies" << YAML::Value << YAML::BeginSeq;
  for (const auto& p : s.policies) {
    e << YAML::Flow << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << p.name;
    e << YAML::Key << "kind" << YAML::Value << p.kind;
    e << YAML::Key << "kappa" << YAML::Value;
    emit_double(e, p.kappa);
    e << YAML::Key << "extra_dims" << YAML::Value << p.extra_dims;
    e << YAML::Key << "extra_x_max" << YAML::Value;
    emit_double(e, p.extra_x_max);
    if (p.bootstrap_periods) e << YAML::Key << "bootstrap_periods" << YAML::Value << *p.bootstrap_periods;
    if (p.r_max) {
      e << YAML::Key << "r_max" << YAML::Value;
      emit_double(e, *p.r_max);
    }
    e << YAML::Key << "fixed_price" << YAML::Value;
    emit_double(e, p.fixed_price);
    if (!p.project) e << YAML::Key << "project" << YAML::Value << false;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
  e << YAML::EndMap;
  if (!e.good()) throw SpecError(std::string("cannot serialize spec: ") + e.GetLastError());
  return std::string(e.c_str()) + "\n";
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

cp_shock_kind shock_kind(const std::string& s) {
  if (s == "zero") return CP_SHOCKS_ZERO;
  if (s == "uniform") return CP_SHOCKS_UNIFORM;
  return CP_SHOCKS_GAUSSIAN;
}

}  // namespace

cp_market_params to_market_params(const MarketSpec& m) {
  cp_market_params p{};
  p.a_prime = m.a_prime;
  p.p0 = m.p0;
  p.price_lower = m.price_lower;
  p.price_upper = m.price_upper;
  p.beta = m.beta;
  p.gamma = m.gamma.empty() ? nullptr : m.gamma.data();
  p.m = m.gamma.size();
  p.b_min = m.b_min;
  p.b_max = m.b_max;
  p.r_max = m.r_max;
  p.delta0 = m.delta0.value_or(0.0);
  p.covariate_kind = m.covariates == "martingale" ? CP_COVARIATES_MARTINGALE : CP_COVARIATES_UNIFORM;
  p.x_max = m.x_max;
  p.cov_lambda_min = m.cov_lambda_min;
  p.cov_lambda_max = m.cov_lambda_max;
  p.shock_kind = shock_kind(m.shocks);
  p.sigma = m.sigma;
  return p;
}

cp_policy_params to_policy_params(const PolicyEntry& e) {
  cp_policy_params p;
  cp_policy_params_init(&p);
  if (e.kind == "gils") p.kind = CP_POLICY_GILS;
  if (e.kind == "gils_base") p.kind = CP_POLICY_GILS_BASE;
  if (e.kind == "gils_plus") p.kind = CP_POLICY_GILS_PLUS;
  if (e.kind == "cils") p.kind = CP_POLICY_CILS;
  if (e.kind == "oracle") p.kind = CP_POLICY_ORACLE;
  if (e.kind == "fixed") p.kind = CP_POLICY_FIXED;
  p.kappa = e.kappa;
  p.extra_dims = e.extra_dims;
  p.extra_x_max = e.extra_x_max;
  p.bootstrap_periods = e.bootstrap_periods.value_or(0);
  p.r_max = e.r_max.value_or(-1.0);
  p.fixed_price = e.fixed_price;
  p.no_projection = e.project ? 0 : 1;
  return p;
}

cp_replay_params to_replay_params(const ReplaySpec& r) {
  cp_replay_params p;
  cp_replay_params_init(&p);
  p.p0 = r.p0;
  if (r.price_lower) {
    p.price_lower = *r.price_lower;
    p.price_upper = *r.price_upper;
  }
  p.b_min = r.b_min;
  p.b_max = r.b_max;
  p.r_max = r.r_max;
  p.shock_kind = shock_kind(r.shocks);
  p.sigma = r.sigma.value_or(-1.0);
  p.permute = r.permute ? 1 : 0;
  return p;
}

}  // namespace covprice::cli
