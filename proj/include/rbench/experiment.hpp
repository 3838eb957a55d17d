#pragma once

#include "rbench/analysis.hpp"
#include "rbench/delay_model.hpp"
#include "rbench/tuning.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rbench {

struct ExperimentConfig {
  nanoseconds tau_budget = std::chrono::seconds{10};
  std::int64_t measurements_per_trial = 10000;
  std::int64_t trials = 10;
  std::int64_t warmup_execs = 1;
};

void validate(const ExperimentConfig& config);

enum class BenchmarkKind { builtin, command };

struct BenchmarkDefinition {
  std::string id;
  BenchmarkKind kind = BenchmarkKind::builtin;
  std::string builtin_name;  // builtin kind
  std::int64_t size = 0;     // builtin kind
  std::vector<std::string> argv;   // command kind
  std::filesystem::path workdir;   // command kind
};

// The four shipped workloads at their default sizes, ids equal to their names.
std::vector<BenchmarkDefinition> builtin_workloads();

std::unique_ptr<Executor> make_executor(const BenchmarkDefinition& bench);

struct BenchmarkRecord {
  std::string id;
  std::optional<TuneResult> tune;
  std::int64_t n_execs = 1;
  std::vector<Trial> trials;
  EstimateSet estimates;
  std::optional<DensityCurve> density;
  std::uint64_t checksum = 0;
  std::optional<nanoseconds> spawn_overhead;
};

// Per-execution samples of every measurement, trial by trial.
std::vector<double> pooled_samples(std::span<const Trial> trials);

EstimateSet pooled_estimates(std::span<const Trial> trials, std::int64_t n_execs);

// Runs warmup_execs unmeasured executions, then measurements of tune.n
// executions each, grouped into trials of measurements_per_trial. Stops after
// `trials` full trials or as soon as the summed measured time reaches
// tau_budget; a partial last trial is kept. Throws BudgetExhaustedError when
// tau_budget < n * t_hat.
BenchmarkRecord run_experiment(Executor& executor, const std::string& id, const TuneResult& tune,
                               const ExperimentConfig& config, const TimerSpec& timer);

}  // namespace rbench
