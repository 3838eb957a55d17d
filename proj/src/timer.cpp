#include "rbench/timer.hpp"

#include "rbench/error.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <utility>

namespace rbench {

std::string_view to_string(TimerSource source) noexcept {
  return source == TimerSource::measured ? "measured" : "configured";
}

std::int64_t SteadyClock::now_ns() {
  return std::chrono::duration_cast<nanoseconds>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

SimulatedClock::SimulatedClock(std::int64_t granularity_ns, double advance_per_read_ns)
    : granularity_ns_(granularity_ns), advance_per_read_ns_(advance_per_read_ns) {
  if (granularity_ns <= 0 || !(advance_per_read_ns > 0.0)) {
    throw ConfigError("simulated clock needs positive granularity and advance");
  }
}

std::int64_t SimulatedClock::now_ns() {
  true_time_ns_ += advance_per_read_ns_;
  const auto ticks = static_cast<std::int64_t>(std::floor(true_time_ns_ / static_cast<double>(granularity_ns_)));
  return ticks * granularity_ns_;
}

ScriptedClock::ScriptedClock(std::vector<std::int64_t> readings) : readings_(std::move(readings)) {
  if (readings_.empty()) throw ConfigError("scripted clock needs at least one reading");
}

std::int64_t ScriptedClock::now_ns() {
  const auto value = readings_[next_];
  next_ = (next_ + 1) % readings_.size();
  return value;
}

nanoseconds measure_precision(Clock& clock, std::int64_t samples) {
  if (samples < kMinPrecisionSamples) {
    throw ConfigError(fmt::format("precision calibration needs at least {} samples, got {}",
                                  kMinPrecisionSamples, samples));
  }
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (std::int64_t pair = 0; pair < samples; ++pair) {
    const std::int64_t first = clock.now_ns();
    const std::int64_t second = clock.now_ns();
    const std::int64_t delta = second - first;
    if (delta < 0) {
      throw CalibrationError(fmt::format(
          "clock is not monotonic: read pair {} went from {} ns to {} ns", pair, first, second));
    }
    if (delta > 0 && delta < best) best = delta;
  }
  if (best == std::numeric_limits<std::int64_t>::max()) {
    throw CalibrationError(fmt::format("clock did not advance over {} read pairs", samples));
  }
  return nanoseconds{best};
}

TimerSpec resolve_timer_spec(nanoseconds measured_prec, std::optional<nanoseconds> configured_acc,
                             std::int64_t j_max) {
  if (measured_prec.count() <= 0) {
    throw ConfigError(fmt::format("timer precision must be positive, got {} ns", measured_prec.count()));
  }
  if (j_max < 1) throw ConfigError(fmt::format("j_max must be at least 1, got {}", j_max));

  const nanoseconds acc = configured_acc.value_or(measured_prec * kDefaultAccuracyMultiple);
  if (acc < measured_prec) {
    throw ConfigError(fmt::format("timer accuracy {} ns is finer than measured precision {} ns",
                                  acc.count(), measured_prec.count()));
  }
  const std::int64_t ratio = acc.count() / measured_prec.count();
  return TimerSpec{.tau_acc = acc, .tau_prec = measured_prec, .j = std::min(ratio, j_max)};
}

}  // namespace rbench
