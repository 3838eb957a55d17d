#pragma once

// Simulator for benchmark timings under random environmental delays.
//
// A program P0 is a tape of k instructions with total minimum time t_p0. Each
// delay factor owns a time scale tau and a trigger probability per instruction
// slot; when it triggers in a slot it adds tau to the run. Timing n back-to-back
// executions covers n*k slots, where slot s uses the probability of instruction
// s mod k. A measured total is n*t_p0 + sum(count * tau) + timer error.
//
// Random stream layout of simulate_measurement (xoshiro256** seeded with the
// measurement seed): factors in declaration order, slots in ascending order, one
// uniform01 draw per slot whose probability is strictly between 0 and 1; then
// one uniform_int draw for the timer error when the error model is uniform.

#include "rbench/timer.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <variant>
#include <vector>

namespace rbench {

struct SyntheticProgram {
  std::int64_t k = 1;
  nanoseconds t_p0{1};
  std::optional<std::vector<nanoseconds>> per_instruction_times;
};

void validate(const SyntheticProgram& program);

struct DelayFactor {
  nanoseconds tau{};
  // A single probability shared by every slot, or one probability per instruction.
  std::variant<double, std::vector<double>> trigger_probs = 0.0;

  double probability_at(std::int64_t instruction) const;
};

void validate(const DelayFactor& factor, const SyntheticProgram& program);

enum class TimerErrorKind { none, uniform };

struct TimerErrorModel {
  TimerErrorKind kind = TimerErrorKind::none;
  nanoseconds bound{};
};

// The error magnitude must stay below the timer accuracy.
void validate(const TimerErrorModel& error, const TimerSpec& timer);

struct Measurement {
  nanoseconds total_time{};
  std::int64_t n_execs = 1;

  double per_execution_ns() const noexcept {
    return static_cast<double>(total_time.count()) / static_cast<double>(n_execs);
  }

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

struct Trial {
  std::vector<Measurement> measurements;
  std::int64_t trial_index = 0;

  friend bool operator==(const Trial&, const Trial&) = default;
};

// P(X = m) for the number of successes among independent Bernoulli trials with
// the given probabilities. Throws DomainError for probabilities outside [0, 1]
// or more than 1e5 entries.
std::vector<double> trigger_count_pmf(std::span<const double> probs);

Measurement simulate_measurement(const SyntheticProgram& program, std::span<const DelayFactor> factors,
                                 std::int64_t n, const TimerErrorModel& error, std::uint64_t seed);

// Measurement m uses derive_seed(seed, m).
Trial simulate_trial(const SyntheticProgram& program, std::span<const DelayFactor> factors, std::int64_t n,
                     const TimerErrorModel& error, std::int64_t count, std::uint64_t seed,
                     std::int64_t trial_index = 0);

// Expected T/n as n grows without bound: t_p0 + sum over factors of tau times
// the sum of its k per-instruction probabilities.
double asymptotic_per_exec_time(const SyntheticProgram& program, std::span<const DelayFactor> factors);

}  // namespace rbench
