#pragma once

// Scenario files drive the delay-model simulator from JSON:
//
//   {"program": {"k": 2, "t_p0_ns": 100},
//    "factors": [{"tau_ns": 10, "probs": 0.5}],
//    "error": {"kind": "uniform", "bound_ns": 1000},
//    "trials": 10, "measurements_per_trial": 10000, "n": 1, "seed": 7}
//
// Optional extensions model inter-trial nonstationarity:
//   factor "regimes": [p | [p...], ...]  one alternative is selected per trial,
//                                        shared selection across factors
//   factor "drift": d                    every probability gains d * trial_index
//   top-level "timer": {"tau_acc_ns", "tau_prec_ns"}  bounds the error model

#include "rbench/delay_model.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace rbench {

struct ScenarioFactor {
  DelayFactor base;
  std::vector<std::variant<double, std::vector<double>>> regimes;
  double drift = 0.0;
};

struct Scenario {
  SyntheticProgram program;
  std::vector<ScenarioFactor> factors;
  TimerErrorModel error;
  std::optional<TimerSpec> timer;
  std::int64_t trials = 1;
  std::int64_t measurements_per_trial = 1;
  std::int64_t n = 1;
  std::uint64_t seed = 0;
};

Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario(const std::filesystem::path& path);

// Delay factors in effect during trial `trial_index`.
std::vector<DelayFactor> factors_for_trial(const Scenario& scenario, std::int64_t trial_index, std::uint64_t seed);

// Trial t is simulated from derive_seed(seed, t).
std::vector<Trial> run_scenario(const Scenario& scenario, std::uint64_t seed);

}  // namespace rbench
