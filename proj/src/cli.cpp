#include "rbench/cli.hpp"

#include "rbench/analysis.hpp"
#include "rbench/error.hpp"
#include "rbench/experiment.hpp"
#include "rbench/oracle.hpp"
#include "rbench/report.hpp"
#include "rbench/scenario.hpp"
#include "rbench/suite.hpp"
#include "rbench/timer.hpp"
#include "rbench/tuning.hpp"
#include "rbench/workloads.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>

namespace rbench {

namespace {

using nlohmann::json;

struct TimerOptions {
  std::optional<std::int64_t> tau_acc_ns;
  std::optional<std::int64_t> tau_prec_ns;
  std::int64_t j_max = kDefaultJMax;

  void attach(CLI::App& app) {
    app.add_option("--tau-acc-ns", tau_acc_ns, "Timer accuracy in ns (default: 1000 x precision)")
        ->check(CLI::PositiveNumber);
    app.add_option("--tau-prec-ns", tau_prec_ns, "Timer precision in ns (default: measured)")->check(CLI::PositiveNumber);
    app.add_option("--j-max", j_max, "Cap on executions per measurement")->check(CLI::PositiveNumber);
  }

  TimerSpec resolve() const {
    nanoseconds prec{0};
    if (tau_prec_ns) {
      prec = nanoseconds{*tau_prec_ns};
    } else {
      SteadyClock clock;
      prec = measure_precision(clock);
    }
    std::optional<nanoseconds> acc;
    if (tau_acc_ns) acc = nanoseconds{*tau_acc_ns};
    return resolve_timer_spec(prec, acc, j_max);
  }
};

struct OracleOptions {
  std::string kind = "logistic";
  std::optional<std::string> table_path;

  void attach(CLI::App& app) {
    app.add_option("--oracle", kind, "Oracle function")->check(CLI::IsMember({"logistic", "lookup"}));
    app.add_option("--oracle-table", table_path, "Lookup table JSON ([[threshold_ns, n], ...])");
  }

  OracleSpec resolve(const TimerSpec& timer) const {
    if (table_path) return make_lookup_oracle(timer, read_table(*table_path));
    if (kind == "lookup") return make_lookup_oracle(timer, default_lookup_table(timer));
    return make_default_logistic_oracle(timer);
  }

  static std::vector<LookupEntry> read_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PersistenceError(fmt::format("cannot open lookup table {}", path));
    try {
      return lookup_table_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
  }
};

std::filesystem::path resolve_cache_path(const std::optional<std::string>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("RBENCH_CACHE"); env != nullptr && *env != '\0') return env;
  throw ConfigError("no tuning cache given: pass --cache PATH or set RBENCH_CACHE");
}

nanoseconds seconds_to_ns(double seconds, const char* what) {
  if (!(seconds > 0.0) || !std::isfinite(seconds)) throw ConfigError(fmt::format("{} must be positive", what));
  return nanoseconds{static_cast<std::int64_t>(std::llround(seconds * 1e9))};
}

// Looks up the cached tuning for `bench`, tuning and storing it on a miss or
// when the cached entry was produced under a different timer.
TuneResult tuned_for(const BenchmarkDefinition& bench, Executor& executor, const TimerSpec& timer,
                     const OracleSpec& oracle, nanoseconds tuning_budget, const std::filesystem::path& cache,
                     const std::string& fingerprint, bool force, std::ostream& out) {
  if (!force) {
    if (auto cached = cache_lookup(cache, bench.id, fingerprint); cached && cached->timer == timer) {
      return *cached;
    }
  }
  auto result = tune(executor, timer, oracle, tuning_budget, bench.id);
  cache_store(cache, result, fingerprint);
  fmt::print(out, "tuned {}: t_hat = {:.1f} ns, n = {} ({} ramp points)\n", bench.id, result.t_hat_ns, result.n,
             result.ramp_len);
  return result;
}

int cmd_calibrate(const TimerOptions& timer_opts, bool as_json, std::ostream& out) {
  const auto timer = timer_opts.resolve();
  const auto source = timer_opts.tau_acc_ns ? TimerSource::configured : TimerSource::measured;
  if (as_json) {
    out << json{{"tau_acc_ns", timer.tau_acc.count()},
                {"tau_prec_ns", timer.tau_prec.count()},
                {"j", timer.j},
                {"j_max", timer_opts.j_max},
                {"source", std::string(to_string(source))}}
               .dump()
        << '\n';
  } else {
    fmt::print(out, "tau_prec = {} ns\ntau_acc  = {} ns ({})\nj        = {} (cap {})\n", timer.tau_prec.count(),
               timer.tau_acc.count(), to_string(source), timer.j, timer_opts.j_max);
  }
  return kExitOk;
}

int cmd_tune(const std::string& suite_arg, const std::optional<std::string>& cache_flag, double tuning_budget_s,
             bool force, const TimerOptions& timer_opts, const OracleOptions& oracle_opts, std::ostream& out) {
  const auto suite = resolve_suite(suite_arg);
  const auto cache = resolve_cache_path(cache_flag);
  const auto budget = seconds_to_ns(tuning_budget_s, "tuning budget");
  const auto timer = timer_opts.resolve();
  const auto oracle = oracle_opts.resolve(timer);
  const auto fingerprint = machine_fingerprint(host_identity(), timer);

  for (const auto& bench : suite) {
    auto executor = make_executor(bench);
    const auto result = tuned_for(bench, *executor, timer, oracle, budget, cache, fingerprint, force, out);
    fmt::print(out, "{:<24} n = {:<6} t_hat = {:.1f} ns\n", bench.id, result.n, result.t_hat_ns);
  }
  return kExitOk;
}

struct RunOptions {
  std::string suite;
  std::optional<std::string> cache;
  double budget_s = 10.0;
  double tuning_budget_s = 5.0;
  std::string output;
  std::int64_t trials = 10;
  std::int64_t per_trial = 10000;
  std::int64_t warmup = 1;
  bool kde = false;
};

int cmd_run(const RunOptions& opts, const TimerOptions& timer_opts, const OracleOptions& oracle_opts,
            std::ostream& out) {
  const auto suite = resolve_suite(opts.suite);
  const auto cache = resolve_cache_path(opts.cache);
  const ExperimentConfig config{.tau_budget = seconds_to_ns(opts.budget_s, "budget"),
                                .measurements_per_trial = opts.per_trial,
                                .trials = opts.trials,
                                .warmup_execs = opts.warmup};
  validate(config);
  const auto tuning_budget = seconds_to_ns(opts.tuning_budget_s, "tuning budget");

  BenchmarkReport report;
  report.kind = "run";
  report.started_at = now_timestamp();
  const auto timer = timer_opts.resolve();
  const auto oracle = oracle_opts.resolve(timer);
  report.timer = timer;
  report.machine = host_identity();
  report.fingerprint = machine_fingerprint(*report.machine, timer);

  std::optional<nanoseconds> spawn_overhead;
  for (const auto& bench : suite) {
    auto executor = make_executor(bench);
    const auto tuned =
        tuned_for(bench, *executor, timer, oracle, tuning_budget, cache, report.fingerprint, false, out);
    auto record = run_experiment(*executor, bench.id, tuned, config, timer);
    if (bench.kind == BenchmarkKind::command) {
      if (!spawn_overhead) spawn_overhead = measure_spawn_overhead();
      record.spawn_overhead = spawn_overhead;
    }
    if (opts.kde) {
      const auto samples = pooled_samples(record.trials);
      if (samples.size() >= 2) {
        record.density = kde(samples, std::nullopt, 512, static_cast<double>(timer.tau_prec.count()));
      }
    }
    fmt::print(out, "{:<24} min = {:>12.2f} ns  median = {:>12.2f} ns  ({} samples, n = {})\n", record.id,
               record.estimates.min_ns, record.estimates.median_ns, record.estimates.sample_count, record.n_execs);
    report.records.push_back(std::move(record));
  }
  report.finished_at = now_timestamp();
  write_report(opts.output, report);
  return kExitOk;
}

int cmd_compare(const std::string& baseline_path, const std::string& candidate_path, double threshold, bool as_json,
                std::ostream& out) {
  const auto baseline = read_report(baseline_path);
  const auto candidate = read_report(candidate_path);

  std::map<std::string, const BenchmarkRecord*> by_id;
  for (const auto& record : baseline.records) by_id.emplace(record.id, &record);

  json results = json::array();
  json unmatched = json::array();
  int regressions = 0;
  if (!as_json) fmt::print(out, "{:<24} {:>14} {:>14} {:>8}  {}\n", "id", "baseline_ns", "candidate_ns", "ratio", "verdict");
  for (const auto& record : candidate.records) {
    const auto it = by_id.find(record.id);
    if (it == by_id.end()) {
      unmatched.push_back(record.id);
      continue;
    }
    const auto cmp = compare_runs(it->second->estimates, record.estimates, threshold);
    by_id.erase(it);
    if (cmp.verdict == Verdict::regression) ++regressions;
    results.push_back(json{{"id", record.id},
                           {"baseline_min_ns", cmp.baseline_min_ns},
                           {"candidate_min_ns", cmp.candidate_min_ns},
                           {"ratio", cmp.ratio},
                           {"verdict", std::string(to_string(cmp.verdict))}});
    if (!as_json) {
      fmt::print(out, "{:<24} {:>14.2f} {:>14.2f} {:>8.4f}  {}\n", record.id, cmp.baseline_min_ns,
                 cmp.candidate_min_ns, cmp.ratio, to_string(cmp.verdict));
    }
  }
  for (const auto& [id, record] : by_id) unmatched.push_back(id);

  if (as_json) {
    out << json{{"threshold", threshold}, {"results", results}, {"unmatched", unmatched}, {"regressions", regressions}}
               .dump(2)
        << '\n';
  } else {
    for (const auto& id : unmatched) fmt::print(out, "{:<24} present in only one report\n", id.get<std::string>());
  }
  return regressions > 0 ? kExitRegression : kExitOk;
}

int cmd_simulate(const std::string& scenario_path, std::optional<std::uint64_t> seed_flag, const std::string& output,
                 bool with_kde, std::ostream& out) {
  const auto scenario = load_scenario(scenario_path);
  const auto seed = seed_flag.value_or(scenario.seed);

  BenchmarkRecord record;
  record.id = "scenario";
  record.n_execs = scenario.n;
  record.trials = run_scenario(scenario, seed);
  record.estimates = pooled_estimates(record.trials, scenario.n);
  if (with_kde) {
    const double fallback = scenario.timer ? static_cast<double>(scenario.timer->tau_prec.count()) : 1.0;
    record.density = kde(pooled_samples(record.trials), std::nullopt, 512, fallback);
  }

  BenchmarkReport report;
  report.kind = "simulate";
  report.timer = scenario.timer;
  report.seed = seed;
  fmt::print(out, "simulated {} trials x {} measurements (n = {}): min = {:.3f} ns, mean = {:.3f} ns\n",
             scenario.trials, scenario.measurements_per_trial, scenario.n, record.estimates.min_ns,
             record.estimates.mean_ns);
  report.records.push_back(std::move(record));
  write_report(output, report);
  return kExitOk;
}

int cmd_oracle(bool check, bool emit_table, const std::optional<std::string>& params,
               const std::optional<std::string>& table_path, bool default_table, bool no_range_check,
               const TimerOptions& timer_opts, std::ostream& out) {
  if (!check && !emit_table) throw ConfigError("oracle: pass --check or --emit-table");
  const auto timer = timer_opts.resolve();
  const auto range = no_range_check ? RangeCheck::skip : RangeCheck::enforce;

  if (emit_table) {
    out << lookup_table_to_json(default_lookup_table(timer)).dump() << '\n';
    if (!check) return kExitOk;
  }

  OracleSpec spec;
  if (table_path) {
    spec = make_lookup_oracle(timer, OracleOptions::read_table(*table_path), range);
  } else if (default_table) {
    spec = make_lookup_oracle(timer, default_lookup_table(timer), range);
  } else if (params) {
    const auto comma = params->find(',');
    if (comma == std::string::npos) throw ConfigError("--params expects a,b");
    double a_scaled = 0.0;
    double b = 0.0;
    try {
      a_scaled = std::stod(params->substr(0, comma));
      b = std::stod(params->substr(comma + 1));
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("cannot parse --params \"{}\"", *params));
    }
    spec = make_logistic_oracle(timer, a_scaled / static_cast<double>(timer.tau_prec.count()), b, range);
  } else {
    spec = make_default_logistic_oracle(timer);
  }

  const auto grid = make_validation_grid(timer);
  const auto report = validate_oracle(spec, grid);
  fmt::print(out, "{} oracle, tau_prec = {} ns, tau_acc = {} ns, j = {}, {} grid points\n", to_string(spec.kind),
             timer.tau_prec.count(), timer.tau_acc.count(), timer.j, report.grid_points);
  static constexpr const char* kNames[] = {"range within {1..j}", "non-increasing", "nu(tau_prec) >= 0.9 j",
                                           "nu(t >= 2 tau_acc) == 1", "weak dependence at tau_prec, tau_acc"};
  for (int p = 1; p <= 5; ++p) {
    fmt::print(out, "  [{}] {}: {}\n", report.property_passed(p) ? "PASS" : "FAIL", p, kNames[p - 1]);
  }
  for (const auto& failure : report.failures) {
    fmt::print(out, "    property {} at t = {} ns: {}\n", failure.property, failure.witness_ns, failure.detail);
  }
  return report.passed() ? kExitOk : kExitError;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Robust microbenchmark harness: calibrate, tune, run, compare, simulate"};
  app.require_subcommand(1);

  TimerOptions timer_opts;
  OracleOptions oracle_opts;

  auto* calibrate = app.add_subcommand("calibrate", "Measure timer precision and derive j");
  bool calibrate_json = false;
  timer_opts.attach(*calibrate);
  calibrate->add_flag("--json", calibrate_json, "Emit JSON");

  auto* tune_cmd = app.add_subcommand("tune", "Choose executions per measurement and cache the result");
  std::string tune_suite;
  std::optional<std::string> tune_cache;
  double tune_budget_s = 5.0;
  bool tune_force = false;
  tune_cmd->add_option("suite", tune_suite, "Suite file or builtin:NAME / builtin:all")->required();
  tune_cmd->add_option("--cache", tune_cache, "Tuning cache file (default: $RBENCH_CACHE)");
  tune_cmd->add_option("--tuning-budget-s", tune_budget_s, "Time budget for the tuning ramp");
  tune_cmd->add_flag("--force", tune_force, "Retune even when a cached entry exists");
  timer_opts.attach(*tune_cmd);
  oracle_opts.attach(*tune_cmd);

  auto* run = app.add_subcommand("run", "Measure a suite and write a report");
  RunOptions run_opts;
  run->add_option("suite", run_opts.suite, "Suite file or builtin:NAME / builtin:all")->required();
  run->add_option("--cache", run_opts.cache, "Tuning cache file (default: $RBENCH_CACHE)");
  run->add_option("--budget-s", run_opts.budget_s, "Measurement budget per benchmark")->required();
  run->add_option("--tuning-budget-s", run_opts.tuning_budget_s, "Time budget for tuning on a cache miss");
  run->add_option("--output", run_opts.output, "Report path")->required();
  run->add_option("--trials", run_opts.trials, "Maximum number of trials")->check(CLI::PositiveNumber);
  run->add_option("--per-trial", run_opts.per_trial, "Measurements per trial")->check(CLI::PositiveNumber);
  run->add_option("--warmup", run_opts.warmup, "Unmeasured executions before measuring")->check(CLI::NonNegativeNumber);
  run->add_flag("--kde", run_opts.kde, "Include kernel density estimates");
  timer_opts.attach(*run);
  oracle_opts.attach(*run);

  auto* compare = app.add_subcommand("compare", "Compare two reports by minimum time");
  std::string baseline_path;
  std::string candidate_path;
  double threshold = kDefaultRegressionThreshold;
  bool compare_json = false;
  compare->add_option("baseline", baseline_path)->required();
  compare->add_option("candidate", candidate_path)->required();
  compare->add_option("--threshold", threshold, "Relative change that counts as a regression")
      ->check(CLI::PositiveNumber);
  compare->add_flag("--json", compare_json, "Emit JSON verdicts");

  auto* simulate = app.add_subcommand("simulate", "Run a delay-model scenario");
  std::string scenario_path;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_output;
  bool sim_kde = false;
  simulate->add_option("scenario", scenario_path)->required();
  simulate->add_option("--seed", sim_seed, "Override the scenario seed");
  simulate->add_option("--output", sim_output, "Report path")->required();
  simulate->add_flag("--kde", sim_kde, "Include a kernel density estimate");

  auto* oracle = app.add_subcommand("oracle", "Inspect or validate oracle functions");
  bool oracle_check = false;
  bool oracle_emit = false;
  bool oracle_default_table = false;
  bool oracle_no_range = false;
  std::optional<std::string> oracle_params;
  std::optional<std::string> oracle_table;
  oracle->add_flag("--check", oracle_check, "Validate the oracle properties");
  oracle->add_flag("--emit-table", oracle_emit, "Print the default lookup table as JSON");
  oracle->add_option("--params", oracle_params, "Logistic parameters a*tau_prec,b (default 0.009,0.5)");
  oracle->add_option("--table", oracle_table, "Check a lookup table JSON file");
  oracle->add_flag("--default-table", oracle_default_table, "Check the default lookup table");
  oracle->add_flag("--no-range-check", oracle_no_range, "Accept parameters outside the recommended ranges");
  timer_opts.attach(*oracle);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (calibrate->parsed()) return cmd_calibrate(timer_opts, calibrate_json, out);
    if (tune_cmd->parsed()) {
      return cmd_tune(tune_suite, tune_cache, tune_budget_s, tune_force, timer_opts, oracle_opts, out);
    }
    if (run->parsed()) return cmd_run(run_opts, timer_opts, oracle_opts, out);
    if (compare->parsed()) return cmd_compare(baseline_path, candidate_path, threshold, compare_json, out);
    if (simulate->parsed()) return cmd_simulate(scenario_path, sim_seed, sim_output, sim_kde, out);
    if (oracle->parsed()) {
      return cmd_oracle(oracle_check, oracle_emit, oracle_params, oracle_table, oracle_default_table, oracle_no_range,
                        timer_opts, out);
    }
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitError;
  }
  return kExitError;
}

}  // namespace rbench
