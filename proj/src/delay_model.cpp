#include "rbench/delay_model.hpp"

#include "rbench/error.hpp"
#include "rbench/rng.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numeric>

namespace rbench {

namespace {

constexpr std::size_t kMaxPmfLength = 100000;

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(fmt::format("probability {} outside [0, 1]", p));
}

}  // namespace

void validate(const SyntheticProgram& program) {
  if (program.k < 1) throw ConfigError(fmt::format("program needs k >= 1, got {}", program.k));
  if (program.t_p0.count() <= 0) throw ConfigError(fmt::format("program needs t_p0 > 0, got {} ns", program.t_p0.count()));
  if (program.per_instruction_times) {
    const auto& times = *program.per_instruction_times;
    if (static_cast<std::int64_t>(times.size()) != program.k) {
      throw ConfigError(fmt::format("{} per-instruction times for k = {}", times.size(), program.k));
    }
    const auto sum = std::accumulate(times.begin(), times.end(), nanoseconds{0});
    if (sum != program.t_p0) {
      throw ConfigError(fmt::format("per-instruction times sum to {} ns, t_p0 is {} ns", sum.count(), program.t_p0.count()));
    }
  }
}

double DelayFactor::probability_at(std::int64_t instruction) const {
  if (const auto* shared = std::get_if<double>(&trigger_probs)) return *shared;
  const auto& per_slot = std::get<std::vector<double>>(trigger_probs);
  return per_slot[static_cast<std::size_t>(instruction) % per_slot.size()];
}

void validate(const DelayFactor& factor, const SyntheticProgram& program) {
  if (factor.tau.count() < 0) throw ConfigError(fmt::format("delay factor tau {} ns is negative", factor.tau.count()));
  if (const auto* shared = std::get_if<double>(&factor.trigger_probs)) {
    check_probability(*shared);
    return;
  }
  const auto& per_slot = std::get<std::vector<double>>(factor.trigger_probs);
  if (static_cast<std::int64_t>(per_slot.size()) != program.k) {
    throw ConfigError(fmt::format("delay factor has {} probabilities for k = {}", per_slot.size(), program.k));
  }
  for (double p : per_slot) check_probability(p);
}

void validate(const TimerErrorModel& error, const TimerSpec& timer) {
  if (error.bound.count() < 0) throw ConfigError("timer error bound is negative");
  if (error.kind == TimerErrorKind::uniform && error.bound > timer.tau_acc) {
    throw ConfigError(fmt::format("timer error bound {} ns exceeds timer accuracy {} ns", error.bound.count(),
                                  timer.tau_acc.count()));
  }
}

std::vector<double> trigger_count_pmf(std::span<const double> probs) {
  if (probs.size() > kMaxPmfLength) {
    throw DomainError(fmt::format("{} probabilities exceed the limit of {}", probs.size(), kMaxPmfLength));
  }
  for (double p : probs) check_probability(p);

  // pmf[m] after processing the first i probabilities; updated in place from the top.
  std::vector<double> pmf(probs.size() + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = probs[i];
    const double q = 1.0 - p;
    pmf[i + 1] = pmf[i] * p;
    for (std::size_t m = i; m > 0; --m) pmf[m] = pmf[m] * q + pmf[m - 1] * p;
    pmf[0] *= q;
  }
  return pmf;
}

Measurement simulate_measurement(const SyntheticProgram& program, std::span<const DelayFactor> factors,
                                 std::int64_t n, const TimerErrorModel& error, std::uint64_t seed) {
  if (n < 1) throw DomainError(fmt::format("execution count must be >= 1, got {}", n));
  validate(program);

  Xoshiro256 rng{seed};
  const std::int64_t slots = n * program.k;
  std::int64_t total = n * program.t_p0.count();

  std::vector<double> per_instruction(static_cast<std::size_t>(program.k));
  for (const auto& factor : factors) {
    validate(factor, program);
    for (std::int64_t i = 0; i < program.k; ++i) per_instruction[static_cast<std::size_t>(i)] = factor.probability_at(i);

    std::int64_t triggered = 0;
    for (std::int64_t slot = 0; slot < slots; ++slot) {
      const double p = per_instruction[static_cast<std::size_t>(slot % program.k)];
      if (p >= 1.0) {
        ++triggered;
      } else if (p > 0.0 && rng.bernoulli(p)) {
        ++triggered;
      }
    }
    total += triggered * factor.tau.count();
  }

  if (error.kind == TimerErrorKind::uniform) {
    const std::int64_t bound = error.bound.count();
    total += rng.uniform_int(-bound, bound);
  }
  return Measurement{.total_time = nanoseconds{std::max<std::int64_t>(total, 0)}, .n_execs = n};
}

Trial simulate_trial(const SyntheticProgram& program, std::span<const DelayFactor> factors, std::int64_t n,
                     const TimerErrorModel& error, std::int64_t count, std::uint64_t seed,
                     std::int64_t trial_index) {
  if (count < 1) throw DomainError(fmt::format("trial needs at least one measurement, got {}", count));
  Trial trial;
  trial.trial_index = trial_index;
  trial.measurements.reserve(static_cast<std::size_t>(count));
  for (std::int64_t m = 0; m < count; ++m) {
    trial.measurements.push_back(
        simulate_measurement(program, factors, n, error, derive_seed(seed, static_cast<std::uint64_t>(m))));
  }
  return trial;
}

double asymptotic_per_exec_time(const SyntheticProgram& program, std::span<const DelayFactor> factors) {
  validate(program);
  double expected = static_cast<double>(program.t_p0.count());
  for (const auto& factor : factors) {
    validate(factor, program);
    double triggers_per_exec = 0.0;
    for (std::int64_t i = 0; i < program.k; ++i) triggers_per_exec += factor.probability_at(i);
    expected += static_cast<double>(factor.tau.count()) * triggers_per_exec;
  }
  return expected;
}

}  // namespace rbench
