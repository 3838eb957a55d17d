#pragma once

#include "rbench/scenario.hpp"

namespace rbench::test {

inline TimerSpec reference_timer() {
  return TimerSpec{.tau_acc = nanoseconds{1000}, .tau_prec = nanoseconds{1}, .j = 1000};
}

// Nonstationary two-regime scenario: a 50 ns factor fires with probability
// 0.02 or 0.3 per slot depending on the trial, and a rare 5 us factor adds
// heavy-tail outliers. Delay only, no timer error.
inline Scenario bimodal_scenario() {
  Scenario scenario;
  scenario.program = SyntheticProgram{.k = 10, .t_p0 = nanoseconds{100}, .per_instruction_times = std::nullopt};
  ScenarioFactor regime_factor;
  regime_factor.base = DelayFactor{nanoseconds{50}, 0.02};
  regime_factor.regimes = {0.02, 0.3};
  ScenarioFactor outliers;
  outliers.base = DelayFactor{nanoseconds{5000}, 1e-4};
  scenario.factors = {regime_factor, outliers};
  scenario.error = TimerErrorModel{TimerErrorKind::none, nanoseconds{0}};
  scenario.trials = 100;
  scenario.measurements_per_trial = 1000;
  scenario.n = 1;
  scenario.seed = 20170101;
  return scenario;
}

}  // namespace rbench::test
