#include "fixtures.hpp"

#include "rbench/delay_model.hpp"
#include "rbench/error.hpp"
#include "rbench/rng.hpp"
#include "rbench/scenario.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

namespace rbench {
namespace {

// Sums the probability of every one of the 2^k trigger outcomes by popcount.
std::vector<double> enumerate_pmf(const std::vector<double>& probs) {
  const std::size_t k = probs.size();
  std::vector<double> pmf(k + 1, 0.0);
  for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
    double p = 1.0;
    for (std::size_t i = 0; i < k; ++i) p *= (mask >> i) & 1u ? probs[i] : 1.0 - probs[i];
    pmf[static_cast<std::size_t>(__builtin_popcount(mask))] += p;
  }
  return pmf;
}

SyntheticProgram program(std::int64_t k, std::int64_t t_p0) {
  return SyntheticProgram{.k = k, .t_p0 = nanoseconds{t_p0}, .per_instruction_times = std::nullopt};
}

const TimerErrorModel kNoError{TimerErrorKind::none, nanoseconds{0}};

TEST(Rng, SplitMixReferenceVector) {
  SplitMix64 sm{0};
  EXPECT_EQ(sm.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(sm.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(sm.next(), 0x06c45d188009454fULL);
}

TEST(Rng, StreamIsFrozen) {
  // Fixture values: changing the generator invalidates every stored scenario report.
  Xoshiro256 rng{0};
  EXPECT_EQ(rng(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(rng(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(derive_seed(7, 0), derive_seed(7, 0));
  EXPECT_NE(derive_seed(7, 0), derive_seed(7, 1));
  EXPECT_NE(derive_seed(7, 0), derive_seed(8, 0));
}

TEST(Rng, UniformIntStaysInRange) {
  Xoshiro256 rng{5};
  for (int i = 0; i < 10000; ++i) {
    const auto v = rng.uniform_int(-3, 3);
    ASSERT_GE(v, -3);
    ASSERT_LE(v, 3);
  }
}

TEST(TriggerCountPmf, SymmetricBinomial) {
  const std::vector<double> probs{0.5, 0.5};
  const auto pmf = trigger_count_pmf(probs);
  ASSERT_EQ(pmf.size(), 3u);
  EXPECT_DOUBLE_EQ(pmf[0], 0.25);
  EXPECT_DOUBLE_EQ(pmf[1], 0.5);
  EXPECT_DOUBLE_EQ(pmf[2], 0.25);
}

TEST(TriggerCountPmf, DeterministicTrigger) {
  const std::vector<double> probs{1.0};
  const auto pmf = trigger_count_pmf(probs);
  ASSERT_EQ(pmf.size(), 2u);
  EXPECT_EQ(pmf[0], 0.0);
  EXPECT_EQ(pmf[1], 1.0);
}

TEST(TriggerCountPmf, ThreeSlotsMatchEnumeration) {
  const std::vector<double> probs{0.1, 0.2, 0.3};
  const auto expected = enumerate_pmf(probs);
  EXPECT_NEAR(expected[0], 0.504, 1e-15);
  EXPECT_NEAR(expected[1], 0.398, 1e-15);
  EXPECT_NEAR(expected[2], 0.092, 1e-15);
  EXPECT_NEAR(expected[3], 0.006, 1e-15);
  const auto pmf = trigger_count_pmf(probs);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(pmf[m], expected[m], 1e-12);
}

TEST(TriggerCountPmf, MatchesEnumerationForRandomSequences) {
  Xoshiro256 rng{31337};
  for (int iter = 0; iter < 300; ++iter) {
    std::vector<double> probs(static_cast<std::size_t>(rng.uniform_int(0, 12)));
    for (auto& p : probs) p = rng.uniform01();
    const auto pmf = trigger_count_pmf(probs);
    const auto expected = enumerate_pmf(probs);
    ASSERT_EQ(pmf.size(), expected.size());
    for (std::size_t m = 0; m < pmf.size(); ++m) ASSERT_NEAR(pmf[m], expected[m], 1e-12);
  }
}

TEST(TriggerCountPmf, LongSequenceSumsToOne) {
  std::vector<double> probs(100000);
  Xoshiro256 rng{3};
  for (auto& p : probs) p = rng.uniform01() * 0.01;
  const auto pmf = trigger_count_pmf(probs);
  EXPECT_NEAR(std::accumulate(pmf.begin(), pmf.end(), 0.0), 1.0, 1e-12);
}

TEST(TriggerCountPmf, DomainErrors) {
  EXPECT_THROW(trigger_count_pmf(std::vector<double>{0.5, 1.5}), DomainError);
  EXPECT_THROW(trigger_count_pmf(std::vector<double>{-0.1}), DomainError);
  EXPECT_THROW(trigger_count_pmf(std::vector<double>{std::nan("")}), DomainError);
  EXPECT_THROW(trigger_count_pmf(std::vector<double>(100001, 0.5)), DomainError);
}

TEST(SimulateMeasurement, NoiselessRepetition) {
  const auto m = simulate_measurement(program(1, 100), {}, 10, kNoError, 1);
  EXPECT_EQ(m.total_time, nanoseconds{1000});
  EXPECT_EQ(m.n_execs, 10);
}

TEST(SimulateMeasurement, EveryFactorTriggersOnEveryInstruction) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 1.0}};
  const auto m = simulate_measurement(program(2, 100), factors, 5, kNoError, 1);
  EXPECT_EQ(m.total_time, nanoseconds{600});
}

TEST(SimulateMeasurement, HalfProbabilityMeanMatchesPmf) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 0.5}};
  const auto pmf = trigger_count_pmf(std::vector<double>(10, 0.5));
  double mean_count = 0.0;
  double second_moment = 0.0;
  for (std::size_t m = 0; m < pmf.size(); ++m) {
    mean_count += static_cast<double>(m) * pmf[m];
    second_moment += static_cast<double>(m * m) * pmf[m];
  }
  const double expected = 500.0 + 10.0 * mean_count;
  ASSERT_NEAR(expected, 550.0, 1e-9);
  const double sd = 10.0 * std::sqrt(second_moment - mean_count * mean_count);

  constexpr int kSeeds = 100000;
  double sum = 0.0;
  for (int seed = 0; seed < kSeeds; ++seed) {
    sum += static_cast<double>(simulate_measurement(program(2, 100), factors, 5, kNoError, seed).total_time.count());
  }
  const double empirical = sum / kSeeds;
  EXPECT_LE(std::abs(empirical - expected), 3.0 * sd / std::sqrt(kSeeds)) << empirical;
}

TEST(SimulateMeasurement, DelaysOnlyAddTime) {
  Xoshiro256 rng{8};
  for (int iter = 0; iter < 2000; ++iter) {
    const auto k = rng.uniform_int(1, 6);
    const auto prog = program(k, rng.uniform_int(1, 1000));
    std::vector<DelayFactor> factors;
    for (int f = 0; f < 3; ++f) {
      std::vector<double> probs(static_cast<std::size_t>(k));
      for (auto& p : probs) p = rng.uniform01();
      factors.push_back({nanoseconds{rng.uniform_int(0, 500)}, probs});
    }
    const auto n = rng.uniform_int(1, 50);
    const auto m = simulate_measurement(prog, factors, n, kNoError, rng());
    ASSERT_GE(m.total_time, prog.t_p0 * n);
  }
}

TEST(SimulateMeasurement, CertainTriggersGiveExactBias) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 1.0}, {nanoseconds{3}, std::vector<double>{1.0, 1.0, 1.0}}};
  for (std::int64_t n : {1, 2, 7, 100, 1000}) {
    const auto m = simulate_measurement(program(3, 100), factors, n, kNoError, static_cast<std::uint64_t>(n));
    EXPECT_EQ(m.per_execution_ns(), 100.0 + 3.0 * (10.0 + 3.0));
  }
}

TEST(SimulateMeasurement, NegativeTotalsClampToZero) {
  const TimerErrorModel error{TimerErrorKind::uniform, nanoseconds{1000}};
  bool saw_zero = false;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto m = simulate_measurement(program(1, 10), {}, 1, error, seed);
    ASSERT_GE(m.total_time.count(), 0);
    saw_zero = saw_zero || m.total_time.count() == 0;
  }
  EXPECT_TRUE(saw_zero);
}

TEST(SimulateMeasurement, UniformErrorStaysInBound) {
  const TimerErrorModel error{TimerErrorKind::uniform, nanoseconds{50}};
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto m = simulate_measurement(program(1, 1000), {}, 1, error, seed);
    ASSERT_LE(std::abs(m.total_time.count() - 1000), 50);
  }
}

TEST(SimulateMeasurement, CyclicPerSlotProbabilities) {
  // Only the second instruction of each execution can trigger.
  const std::vector<DelayFactor> factors{{nanoseconds{1}, std::vector<double>{0.0, 1.0, 0.0}}};
  const auto m = simulate_measurement(program(3, 30), factors, 4, kNoError, 9);
  EXPECT_EQ(m.total_time, nanoseconds{4 * 30 + 4});
}

TEST(SimulateMeasurement, ValidationErrors) {
  EXPECT_THROW(simulate_measurement(program(1, 100), {}, 0, kNoError, 1), DomainError);
  EXPECT_THROW(simulate_measurement(program(0, 100), {}, 1, kNoError, 1), ConfigError);
  EXPECT_THROW(simulate_measurement(program(1, 0), {}, 1, kNoError, 1), ConfigError);
  const std::vector<DelayFactor> wrong_length{{nanoseconds{1}, std::vector<double>{0.5}}};
  EXPECT_THROW(simulate_measurement(program(2, 100), wrong_length, 1, kNoError, 1), ConfigError);
  const std::vector<DelayFactor> bad_prob{{nanoseconds{1}, 1.5}};
  EXPECT_THROW(simulate_measurement(program(2, 100), bad_prob, 1, kNoError, 1), DomainError);

  SyntheticProgram mismatched{.k = 2, .t_p0 = nanoseconds{100},
                              .per_instruction_times = std::vector<nanoseconds>{nanoseconds{40}, nanoseconds{50}}};
  EXPECT_THROW(validate(mismatched), ConfigError);
  mismatched.per_instruction_times = std::vector<nanoseconds>{nanoseconds{40}, nanoseconds{60}};
  EXPECT_NO_THROW(validate(mismatched));

  const auto timer = test::reference_timer();
  EXPECT_THROW(validate(TimerErrorModel{TimerErrorKind::uniform, nanoseconds{1001}}, timer), ConfigError);
  EXPECT_NO_THROW(validate(TimerErrorModel{TimerErrorKind::uniform, nanoseconds{1000}}, timer));
}

TEST(SimulateTrial, NoiselessMeasurementsAreIdentical) {
  const auto trial = simulate_trial(program(4, 250), {}, 3, kNoError, 3, 17);
  ASSERT_EQ(trial.measurements.size(), 3u);
  for (const auto& m : trial.measurements) EXPECT_EQ(m, (Measurement{nanoseconds{750}, 3}));
}

TEST(SimulateTrial, TenThousandMeasurements) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 0.1}};
  const auto trial = simulate_trial(program(2, 100), factors, 1, kNoError, 10000, 5, 4);
  EXPECT_EQ(trial.measurements.size(), 10000u);
  EXPECT_EQ(trial.trial_index, 4);
}

TEST(SimulateTrial, SameSeedSameTrial) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 0.3}};
  const TimerErrorModel error{TimerErrorKind::uniform, nanoseconds{20}};
  const auto a = simulate_trial(program(3, 100), factors, 8, error, 500, 1234);
  const auto b = simulate_trial(program(3, 100), factors, 8, error, 500, 1234);
  const auto c = simulate_trial(program(3, 100), factors, 8, error, 500, 1235);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
  EXPECT_THROW(simulate_trial(program(3, 100), factors, 8, error, 0, 1), DomainError);
}

TEST(AsymptoticPerExecTime, WorstCase) {
  const std::vector<DelayFactor> factors{{nanoseconds{10}, 1.0}};
  EXPECT_DOUBLE_EQ(asymptotic_per_exec_time(program(2, 100), factors), 120.0);
}

TEST(AsymptoticPerExecTime, NoFactors) { EXPECT_DOUBLE_EQ(asymptotic_per_exec_time(program(5, 77), {}), 77.0); }

TEST(AsymptoticPerExecTime, PerSlotProbabilitiesMatchSimulation) {
  const std::vector<DelayFactor> factors{{nanoseconds{20}, std::vector<double>{0.1, 0.2, 0.3}}};
  const double expected = asymptotic_per_exec_time(program(3, 100), factors);
  EXPECT_NEAR(expected, 112.0, 1e-12);

  // Per-execution variance: 20^2 * sum p(1-p) / n.
  const double sd = 20.0 * std::sqrt((0.1 * 0.9 + 0.2 * 0.8 + 0.3 * 0.7) / 100.0);
  constexpr int kMeasurements = 1'000'000;
  double sum = 0.0;
  for (int i = 0; i < kMeasurements; ++i) {
    sum += simulate_measurement(program(3, 100), factors, 100, kNoError, derive_seed(77, i)).per_execution_ns();
  }
  const double empirical = sum / kMeasurements;
  EXPECT_LE(std::abs(empirical - expected), 3.0 * sd / std::sqrt(kMeasurements)) << empirical;
}

TEST(AsymptoticPerExecTime, LargeRepetitionConverges) {
  const std::vector<DelayFactor> factors{{nanoseconds{40}, std::vector<double>{0.05, 0.5}}};
  const double expected = asymptotic_per_exec_time(program(2, 100), factors);
  const double sd_per_exec_one = 40.0 * std::sqrt(0.05 * 0.95 + 0.5 * 0.5);
  for (std::int64_t n : {10, 100, 1000}) {
    constexpr int kSeeds = 2000;
    double sum = 0.0;
    for (int s = 0; s < kSeeds; ++s) {
      sum += simulate_measurement(program(2, 100), factors, n, kNoError, derive_seed(n, s)).per_execution_ns();
    }
    const double se = sd_per_exec_one / std::sqrt(static_cast<double>(n) * kSeeds);
    EXPECT_LE(std::abs(sum / kSeeds - expected), 3.0 * se) << "n = " << n;
  }
}

TEST(Scenario, ParsesAndRunsDeterministically) {
  const auto doc = nlohmann::json::parse(R"({
    "program": {"k": 2, "t_p0_ns": 100},
    "factors": [{"tau_ns": 10, "probs": 0.5}, {"tau_ns": 3, "probs": [0.1, 0.9]}],
    "error": {"kind": "uniform", "bound_ns": 5},
    "timer": {"tau_acc_ns": 1000, "tau_prec_ns": 1},
    "trials": 3, "measurements_per_trial": 4, "n": 2, "seed": 9})");
  const auto scenario = parse_scenario(doc);
  EXPECT_EQ(scenario.program.k, 2);
  EXPECT_EQ(scenario.factors.size(), 2u);
  EXPECT_EQ(scenario.error.kind, TimerErrorKind::uniform);
  ASSERT_TRUE(scenario.timer);
  EXPECT_EQ(scenario.timer->j, 1000);

  const auto trials = run_scenario(scenario, scenario.seed);
  ASSERT_EQ(trials.size(), 3u);
  for (std::size_t t = 0; t < trials.size(); ++t) {
    EXPECT_EQ(trials[t].trial_index, static_cast<std::int64_t>(t));
    EXPECT_EQ(trials[t].measurements.size(), 4u);
  }
  EXPECT_EQ(trials, run_scenario(scenario, scenario.seed));
}

TEST(Scenario, RejectsMalformedInput) {
  EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({"program": {"k": 1}})")), ParseError);
  EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({
    "program": {"k": 1, "t_p0_ns": 10}, "factors": [], "error": {"kind": "gaussian"},
    "trials": 1, "measurements_per_trial": 1, "n": 1})")),
               ConfigError);
  EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({
    "program": {"k": 1, "t_p0_ns": 10}, "error": {"kind": "uniform", "bound_ns": 5000},
    "timer": {"tau_acc_ns": 1000, "tau_prec_ns": 1},
    "trials": 1, "measurements_per_trial": 1, "n": 1})")),
               ConfigError);
  EXPECT_THROW(parse_scenario(nlohmann::json::parse(R"({
    "program": {"k": 1, "t_p0_ns": 10}, "trials": 0, "measurements_per_trial": 1, "n": 1})")),
               ConfigError);
}

TEST(Scenario, RegimesSwitchBetweenTrials) {
  const auto scenario = test::bimodal_scenario();
  int high = 0;
  for (std::int64_t t = 0; t < scenario.trials; ++t) {
    const auto factors = factors_for_trial(scenario, t, scenario.seed);
    const double p = std::get<double>(factors[0].trigger_probs);
    ASSERT_TRUE(p == 0.02 || p == 0.3);
    high += p == 0.3;
    EXPECT_EQ(std::get<double>(factors[1].trigger_probs), 1e-4);
  }
  EXPECT_GT(high, 20);
  EXPECT_LT(high, 80);
}

TEST(Scenario, DriftRaisesProbabilityPerTrial) {
  Scenario scenario;
  scenario.program = program(2, 100);
  ScenarioFactor factor;
  factor.base = DelayFactor{nanoseconds{10}, std::vector<double>{0.1, 0.95}};
  factor.drift = 0.02;
  scenario.factors = {factor};
  const auto later = factors_for_trial(scenario, 5, 1);
  const auto& probs = std::get<std::vector<double>>(later[0].trigger_probs);
  EXPECT_NEAR(probs[0], 0.2, 1e-12);
  EXPECT_EQ(probs[1], 1.0);
}

}  // namespace
}  // namespace rbench
