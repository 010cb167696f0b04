// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "bundled_specs.hpp"
#include "covprice/covprice.h"

namespace covprice::cli {

namespace fs = std::filesystem;

namespace {

// Library failure carrying its status; config-type statuses exit with 2.
class LibraryError : public std::runtime_error {
 public:
  LibraryError(cp_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
  cp_status status;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(cp_status s, const std::string& context) {
  if (s != CP_OK) throw LibraryError(s, context + ": " + cp_last_error());
}

struct MarketDeleter {
  void operator()(cp_market* p) const { cp_market_destroy(p); }
};
struct SummaryDeleter {
  void operator()(cp_summary* p) const { cp_summary_destroy(p); }
};
struct DatasetDeleter {
  void operator()(cp_dataset* p) const { cp_dataset_destroy(p); }
};
struct FitDeleter {
  void operator()(cp_fit* p) const { cp_fit_destroy(p); }
};
using MarketPtr = std::unique_ptr<cp_market, MarketDeleter>;
using SummaryPtr = std::unique_ptr<cp_summary, SummaryDeleter>;
using DatasetPtr = std::unique_ptr<cp_dataset, DatasetDeleter>;
using FitPtr = std::unique_ptr<cp_fit, FitDeleter>;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> horizon;
  std::optional<std::uint64_t> reps;
  std::optional<std::string> out;
  std::size_t jobs = 0;
  std::vector<std::string> policies;
  bool quiet = false;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void apply_overrides(ExperimentSpec& spec, const Overrides& o) {
  if (o.seed) spec.seed = *o.seed;
  if (o.horizon) spec.horizon = *o.horizon;
  if (o.reps) spec.replications = *o.reps;
  if (o.out) spec.output = *o.out;
  if (spec.output.empty()) spec.output = (fs::path("runs") / spec.name).string();
  if (!o.policies.empty()) {
    std::vector<PolicyEntry> kept;
    for (const auto& name : o.policies) {
      const auto it = std::find_if(spec.policies.begin(), spec.policies.end(),
                                   [&](const PolicyEntry& p) { return p.name == name; });
      if (it != spec.policies.end()) {
        kept.push_back(*it);
      } else {
        PolicyEntry e;
        e.name = name;
        e.kind = name;
        kept.push_back(e);
      }
    }
    spec.policies = std::move(kept);
  }
  validate_spec(spec);
}

std::string spec_hash(const ExperimentSpec& spec) {
  auto copy = spec;
  copy.output.clear();
  return fnv1a_hex(serialize_spec(copy));
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  f.close();
  if (!f) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory '" + dir.string() + "': " + ec.message());
}

std::string manifest_text(const ExperimentSpec& spec, const std::string& command, const std::string& policy) {
  std::ostringstream m;
  m << "name = " << spec.name << "\n";
  m << "spec_hash = " << spec_hash(spec) << "\n";
  m << "seed = " << spec.seed << "\n";
  m << "horizon = " << spec.horizon << "\n";
  m << "replications = " << spec.replications << "\n";
  m << "version = " << cp_version() << "\n";
  if (!policy.empty()) m << "policy = " << policy << "\n";
  m << "reproduce = covprice " << command << " " << (policy.empty() ? "spec.yaml" : "../spec.yaml") << "\n";
  return m.str();
}

cp_run_params run_params(const ExperimentSpec& spec, const Overrides& o) {
  cp_run_params r;
  cp_run_params_init(&r);
  r.horizon = spec.horizon;
  r.base_seed = spec.seed;
  r.replications = spec.replications;
  r.max_parallelism = o.jobs;
  r.trace_stride = spec.trace_stride;
  r.geometric_trace = spec.geometric_trace ? 1 : 0;
  return r;
}

struct PolicyRun {
  PolicyEntry entry;
  SummaryPtr summary;
};

std::vector<PolicyRun> run_policies(const ExperimentSpec& spec, const cp_market* market, const Overrides& o,
                                    std::ostream& err) {
  std::vector<PolicyRun> runs;
  const auto rp = run_params(spec, o);
  for (const auto& entry : spec.policies) {
    const auto pp = to_policy_params(entry);
    const auto start = std::chrono::steady_clock::now();
    cp_summary* raw = nullptr;
    check(cp_run_replications(market, &pp, &rp, &raw), "policy '" + entry.name + "'");
    SummaryPtr summary(raw);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!o.quiet) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%s: %s, %zu reps x %llu periods, %.2f s\n", spec.name.c_str(),
                    entry.name.c_str(), cp_summary_replications(summary.get()),
                    static_cast<unsigned long long>(spec.horizon), secs);
      err << buf;
    }
    if (cp_summary_truncated(summary.get()))
      err << "warning: " << entry.name << ": horizon truncated to the dataset length\n";
    runs.push_back({entry, std::move(summary)});
  }
  return runs;
}

void write_policy_outputs(const ExperimentSpec& spec, const std::string& command, const fs::path& root,
                          const std::vector<PolicyRun>& runs) {
  struct SeriesFile {
    cp_series id;
    const char* file;
  };
  const SeriesFile files[] = {
      {CP_SERIES_PRICE, "price.csv"},
      {CP_SERIES_REGRET, "regret.csv"},
      {CP_SERIES_LAMBDA_MIN, "lambda_min.csv"},
      {CP_SERIES_T_OVER_LAMBDA_MIN, "t_over_lambda_min.csv"},
      {CP_SERIES_RAW_ERROR_SQ, "error.csv"},
      {CP_SERIES_TRUNCATED_ERROR_SQ, "truncated_error.csv"},
  };
  for (const auto& run : runs) {
    const auto dir = root / run.entry.name;
    make_dirs(dir);
    const auto* s = run.summary.get();
    check(cp_summary_write_csv(s, (dir / "summary.csv").c_str()), "write summary");
    for (const auto& f : files)
      check(cp_summary_write_series_csv(s, f.id, (dir / f.file).c_str()), std::string("write ") + f.file);
    check(cp_summary_write_final_regrets_csv(s, (dir / "final_regrets.csv").c_str()), "write final regrets");
    write_text(dir / "manifest.txt", manifest_text(spec, command, run.entry.name));
  }
}

void write_root_outputs(const ExperimentSpec& spec, const std::string& command, const fs::path& root) {
  write_text(root / "spec.yaml", serialize_spec(spec));
  write_text(root / "manifest.txt", manifest_text(spec, command, ""));
}

MarketPtr make_market(const MarketSpec& m) {
  const auto params = to_market_params(m);
  cp_market* raw = nullptr;
  check(cp_market_create(&params, &raw), "market");
  return MarketPtr(raw);
}

int cmd_simulate(ExperimentSpec spec, const Overrides& o, std::ostream& out, std::ostream& err);
int cmd_replay_spec(ExperimentSpec spec, const Overrides& o, std::ostream& out, std::ostream& err);

int cmd_simulate(ExperimentSpec spec, const Overrides& o, std::ostream& out, std::ostream& err) {
  if (spec.replay) return cmd_replay_spec(std::move(spec), o, out, err);
  apply_overrides(spec, o);
  const auto market = make_market(spec.market);
  const auto runs = run_policies(spec, market.get(), o, err);
  const fs::path root = spec.output;
  make_dirs(root);
  write_root_outputs(spec, "simulate", root);
  write_policy_outputs(spec, "simulate", root, runs);
  out << "wrote " << root.string() << "\n";
  return kExitOk;
}

void write_fit(const cp_fit* fit, const fs::path& root, std::ostream& out) {
  const auto report = root / "fit_report.txt";
  check(cp_fit_write_report(fit, report.c_str(), (root / "fit.kv").c_str()), "write fit report");
  out << read_text(report);
}

int cmd_replay_spec(ExperimentSpec spec, const Overrides& o, std::ostream& out, std::ostream& err) {
  if (!spec.replay) throw UsageError("spec '" + spec.name + "' has no replay section; use simulate");
  apply_overrides(spec, o);
  const fs::path root = spec.output;
  auto& r = *spec.replay;
  std::string csv = r.csv, schema = r.schema;
  if (r.planted) {
    make_dirs(root);
    csv = (root / "planted.csv").string();
    schema = (root / "planted.schema").string();
    check(cp_dataset_write_planted(csv.c_str(), schema.c_str(), r.planted->rows, r.planted->seed,
                                   r.planted->noise_sigma),
          "planted data");
  }
  cp_dataset* raw_ds = nullptr;
  check(cp_dataset_load(csv.c_str(), schema.c_str(), &raw_ds), "dataset '" + csv + "'");
  DatasetPtr ds(raw_ds);
  if (cp_dataset_rejected(ds.get()) > 0)
    err << "warning: " << cp_dataset_rejected(ds.get()) << " malformed rows skipped in " << csv << "\n";
  cp_fit* raw_fit = nullptr;
  check(cp_fit_create(ds.get(), &raw_fit), "fit");
  FitPtr fit(raw_fit);

  const auto params = to_replay_params(r);
  cp_market* raw_market = nullptr;
  check(cp_market_create_replay(ds.get(), fit.get(), &params, &raw_market), "replay market");
  MarketPtr market(raw_market);

  const auto rows = static_cast<std::uint64_t>(cp_dataset_rows(ds.get()));
  if (spec.horizon > rows) spec.horizon = rows;
  const auto runs = run_policies(spec, market.get(), o, err);
  make_dirs(root);
  write_fit(fit.get(), root, out);
  write_root_outputs(spec, "replay", root);
  write_policy_outputs(spec, "replay", root, runs);
  out << "wrote " << root.string() << "\n";
  return kExitOk;
}

std::vector<fs::path> find_summaries(const fs::path& dir) {
  std::vector<fs::path> found;
  if (fs::is_regular_file(dir / "summary.csv")) found.push_back(dir);
  std::vector<fs::path> subdirs;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_directory() && fs::is_regular_file(e.path() / "summary.csv")) subdirs.push_back(e.path());
  std::sort(subdirs.begin(), subdirs.end());
  found.insert(found.end(), subdirs.begin(), subdirs.end());
  return found;
}

// Last data row's regret_over_log_t from a derived.csv.
double final_regret_over_log_t(const fs::path& derived) {
  std::ifstream in(derived);
  std::string line, last;
  std::getline(in, line);
  while (std::getline(in, line))
    if (!line.empty()) last = line;
  const auto pos = last.rfind(',');
  if (pos == std::string::npos) return std::nan("");
  try {
    return std::stod(last.substr(pos + 1));
  } catch (const std::exception&) {
    return std::nan("");
  }
}

int cmd_diagnose(const std::string& dir_arg, const std::optional<std::string>& spec_arg, std::ostream& out,
                 std::ostream& err) {
  const fs::path dir = dir_arg;
  if (!fs::is_directory(dir)) throw UsageError("trace directory '" + dir_arg + "' does not exist");
  const auto targets = find_summaries(dir);
  if (targets.empty()) throw UsageError("no summary.csv found in '" + dir_arg + "' or its subdirectories");

  for (const auto& t : targets)
    check(cp_diagnose_csv((t / "summary.csv").c_str(), (t / "derived.csv").c_str()),
          "diagnose '" + (t / "summary.csv").string() + "'");

  std::optional<ExperimentSpec> spec;
  if (spec_arg) {
    spec = resolve_spec(*spec_arg);
  } else {
    for (const auto& candidate : {dir / "spec.yaml", dir.parent_path() / "spec.yaml"})
      if (fs::is_regular_file(candidate)) {
        spec = load_spec(candidate.string());
        break;
      }
  }

  std::ostringstream report;
  if (!spec) {
    err << "note: no spec found; theory constants skipped\n";
  } else if (spec->replay || !spec->market.delta0) {
    err << "note: theory constants need a synthetic market with delta0; skipped\n";
  } else {
    const auto market = make_market(spec->market);
    cp_theory_constants k{};
    check(cp_market_theory_constants(market.get(), &k), "theory constants");
    report << "spec = " << spec->name << "\n";
    report << "delta0 = " << fmt(*spec->market.delta0) << "\n";
    report << "k0 = " << fmt(k.k0) << "\n";
    report << "lambda0 = " << fmt(k.lambda0) << "\n";
    report << "r = " << fmt(k.r) << "\n";
    report << "c = " << fmt(k.c) << "\n";
    for (const auto& t : targets) {
      const double ratio = final_regret_over_log_t(t / "derived.csv");
      const auto name = t == dir ? std::string("trace") : t.filename().string();
      report << name << ".regret_over_log_t = " << fmt(ratio) << "\n";
      report << name << ".within_c = " << (ratio <= k.c ? "true" : "false") << "\n";
    }
    write_text(dir / "theory_constants.txt", report.str());
  }
  for (const auto& t : targets) out << "wrote " << (t / "derived.csv").string() << "\n";
  out << report.str();
  return kExitOk;
}

int cmd_fit(const std::string& csv, const std::string& schema, const Overrides& o, std::ostream& out,
            std::ostream& err) {
  cp_dataset* raw_ds = nullptr;
  check(cp_dataset_load(csv.c_str(), schema.c_str(), &raw_ds), "dataset '" + csv + "'");
  DatasetPtr ds(raw_ds);
  if (cp_dataset_rejected(ds.get()) > 0)
    err << "warning: " << cp_dataset_rejected(ds.get()) << " malformed rows skipped in " << csv << "\n";
  cp_fit* raw_fit = nullptr;
  check(cp_fit_create(ds.get(), &raw_fit), "fit");
  FitPtr fit(raw_fit);
  const fs::path root = o.out.value_or("runs/fit");
  make_dirs(root);
  write_fit(fit.get(), root, out);
  return kExitOk;
}

bool looks_like_csv(const std::string& s) {
  return s.size() > 4 && s.compare(s.size() - 4, 4, ".csv") == 0;
}

}  // namespace

ExperimentSpec resolve_spec(const std::string& name_or_path) {
  if (const auto text = bundled_spec(name_or_path)) return parse_spec(*text);
  if (!fs::is_regular_file(name_or_path)) {
    std::string names;
    for (const auto& n : bundled_spec_names()) names += " " + n;
    throw SpecError("spec '" + name_or_path + "' is neither a file nor a bundled spec (bundled:" + names + ")");
  }
  return load_spec(name_or_path);
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic pricing with demand covariates: simulation, replay and diagnostics", "covprice"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(cp_version()));

  Overrides o;
  std::uint64_t seed = 0, horizon = 0, reps = 0;
  std::string out_dir;
  auto* seed_opt = app.add_option("--seed", seed, "Base seed (replication i uses seed + i)");
  app.add_option("--jobs", o.jobs, "Maximum worker threads (0 = all cores)");
  auto* out_opt = app.add_option("--out", out_dir, "Output directory");
  auto* t_opt = app.add_option("--T", horizon, "Horizon in periods")->check(CLI::PositiveNumber);
  auto* reps_opt = app.add_option("--reps", reps, "Replications")->check(CLI::PositiveNumber);
  app.add_option("--policy", o.policies, "Run only these policies (name or kind; repeatable)");
  app.add_flag("--quiet", o.quiet, "Suppress progress messages");

  std::string spec_arg;
  auto* sim = app.add_subcommand("simulate", "Run a synthetic experiment spec");
  sim->add_option("spec", spec_arg, "Spec file or bundled name")->required();

  std::string replay_input, replay_schema;
  auto* replay = app.add_subcommand("replay", "Replay a covariate dataset (CSV + schema) or a replay spec");
  replay->add_option("input", replay_input, "Replay spec (file or bundled name) or dataset CSV")->required();
  replay->add_option("schema", replay_schema, "Column schema when input is a CSV");

  std::string diag_dir, diag_spec;
  auto* diag = app.add_subcommand("diagnose", "Derive diagnostic series and theory constants from a run");
  diag->add_option("trace_dir", diag_dir, "Output directory of simulate or replay")->required();
  auto* diag_spec_opt = diag->add_option("--spec", diag_spec, "Spec for theory constants (default: spec.yaml)");

  std::string fit_csv, fit_schema;
  auto* fit = app.add_subcommand("fit", "Fit the linear demand model to a dataset");
  fit->add_option("csv", fit_csv, "Dataset CSV")->required();
  fit->add_option("schema", fit_schema, "Column schema")->required();

  std::vector<std::string> argv_store{"covprice"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }
  if (*seed_opt) o.seed = seed;
  if (*t_opt) o.horizon = horizon;
  if (*reps_opt) o.reps = reps;
  if (*out_opt) o.out = out_dir;

  try {
    if (*sim) return cmd_simulate(resolve_spec(spec_arg), o, out, err);
    if (*replay) {
      if (looks_like_csv(replay_input) || !replay_schema.empty()) {
        if (replay_schema.empty()) throw UsageError("replay of a CSV needs a schema file");
        ExperimentSpec spec;
        spec.name = "replay";
        spec.horizon = UINT64_MAX;
        ReplaySpec r;
        r.csv = replay_input;
        r.schema = replay_schema;
        spec.replay = r;
        PolicyEntry gils, oracle;
        gils.name = gils.kind = "gils";
        oracle.name = oracle.kind = "oracle";
        spec.policies = {gils, oracle};
        return cmd_replay_spec(std::move(spec), o, out, err);
      }
      return cmd_replay_spec(resolve_spec(replay_input), o, out, err);
    }
    if (*diag) return cmd_diagnose(diag_dir, *diag_spec_opt ? std::optional(diag_spec) : std::nullopt, out, err);
    if (*fit) return cmd_fit(fit_csv, fit_schema, o, out, err);
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const LibraryError& e) {
    err << "error: " << e.what() << "\n";
    const bool config = e.status == CP_ERR_CONFIG || e.status == CP_ERR_INVALID_ARGUMENT;
    return config ? kExitUsage : kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

}  // namespace covprice::cli
