#include "rbench/experiment.hpp"

#include "rbench/error.hpp"
#include "rbench/workloads.hpp"

#include <fmt/format.h>

#include <cmath>

namespace rbench {

void validate(const ExperimentConfig& config) {
  if (config.tau_budget.count() <= 0) throw ConfigError("experiment budget must be positive");
  if (config.trials < 1) throw ConfigError(fmt::format("trials must be >= 1, got {}", config.trials));
  if (config.measurements_per_trial < 1) {
    throw ConfigError(fmt::format("measurements per trial must be >= 1, got {}", config.measurements_per_trial));
  }
  if (config.warmup_execs < 0) throw ConfigError("warmup executions must be non-negative");
}

std::vector<BenchmarkDefinition> builtin_workloads() {
  std::vector<BenchmarkDefinition> catalog;
  for (const auto& info : builtin_catalog()) {
    catalog.push_back(BenchmarkDefinition{.id = std::string(info.name),
                                          .kind = BenchmarkKind::builtin,
                                          .builtin_name = std::string(info.name),
                                          .size = info.default_size,
                                          .argv = {},
                                          .workdir = {}});
  }
  return catalog;
}

std::unique_ptr<Executor> make_executor(const BenchmarkDefinition& bench) {
  if (bench.kind == BenchmarkKind::command) return std::make_unique<CommandExecutor>(bench.argv, bench.workdir);
  return std::make_unique<WorkloadExecutor>(make_builtin_workload(bench.builtin_name, bench.size));
}

std::vector<double> pooled_samples(std::span<const Trial> trials) {
  std::vector<double> samples;
  for (const auto& trial : trials) {
    for (const auto& m : trial.measurements) samples.push_back(m.per_execution_ns());
  }
  return samples;
}

EstimateSet pooled_estimates(std::span<const Trial> trials, std::int64_t n_execs) {
  return location_estimates(pooled_samples(trials), n_execs);
}

BenchmarkRecord run_experiment(Executor& executor, const std::string& id, const TuneResult& tune,
                               const ExperimentConfig& config, const TimerSpec& timer) {
  validate(config);
  if (tune.n < 1 || tune.n > timer.j) {
    throw ConfigError(fmt::format("tuned n = {} outside [1, {}]", tune.n, timer.j));
  }
  const double min_feasible = static_cast<double>(tune.n) * tune.t_hat_ns;
  if (static_cast<double>(config.tau_budget.count()) < min_feasible) {
    throw BudgetExhaustedError(fmt::format("budget of {} ns cannot fit one measurement; need at least {} ns (n x t_hat)",
                                           config.tau_budget.count(), std::ceil(min_feasible)));
  }

  if (config.warmup_execs > 0) executor.run(config.warmup_execs);

  BenchmarkRecord record;
  record.id = id;
  record.tune = tune;
  record.n_execs = tune.n;

  Trial current;
  nanoseconds spent{0};
  while (static_cast<std::int64_t>(record.trials.size()) < config.trials) {
    const nanoseconds elapsed = executor.run(tune.n);
    current.measurements.push_back(Measurement{.total_time = elapsed, .n_execs = tune.n});
    spent += elapsed;
    if (static_cast<std::int64_t>(current.measurements.size()) == config.measurements_per_trial) {
      const auto next_index = current.trial_index + 1;
      record.trials.push_back(std::move(current));
      current = Trial{};
      current.trial_index = next_index;
    }
    if (spent >= config.tau_budget) break;
  }
  if (!current.measurements.empty()) record.trials.push_back(std::move(current));

  record.estimates = pooled_estimates(record.trials, tune.n);
  record.checksum = executor.checksum();
  return record;
}

}  // namespace rbench
