#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace rbench {

using std::chrono::nanoseconds;

inline constexpr std::int64_t kDefaultJMax = 10000;
inline constexpr std::int64_t kDefaultAccuracyMultiple = 1000;
inline constexpr std::int64_t kMinPrecisionSamples = 1000;

// Host timer characteristics. `j` bounds the useful number of executions per
// measurement: beyond it the per-execution timer error drops below precision.
struct TimerSpec {
  nanoseconds tau_acc{};
  nanoseconds tau_prec{};
  std::int64_t j = 1;

  friend bool operator==(const TimerSpec&, const TimerSpec&) = default;
};

enum class TimerSource { measured, configured };

std::string_view to_string(TimerSource source) noexcept;

class Clock {
public:
  virtual ~Clock() = default;
  virtual std::int64_t now_ns() = 0;
};

class SteadyClock final : public Clock {
public:
  std::int64_t now_ns() override;
};

// Deterministic clock: every read advances true time by `advance_per_read_ns` and
// reports it truncated to a multiple of `granularity_ns`.
class SimulatedClock final : public Clock {
public:
  SimulatedClock(std::int64_t granularity_ns, double advance_per_read_ns);
  std::int64_t now_ns() override;

private:
  std::int64_t granularity_ns_;
  double advance_per_read_ns_;
  double true_time_ns_ = 0.0;
};

// Replays a fixed sequence of readings, wrapping around at the end.
class ScriptedClock final : public Clock {
public:
  explicit ScriptedClock(std::vector<std::int64_t> readings);
  std::int64_t now_ns() override;

private:
  std::vector<std::int64_t> readings_;
  std::size_t next_ = 0;
};

// Smallest strictly positive difference between the two reads of each of
// `samples` back-to-back read pairs. Throws CalibrationError on a backwards step
// or when the clock never advances.
nanoseconds measure_precision(Clock& clock, std::int64_t samples = 10 * kMinPrecisionSamples);

// j = min(floor(acc / prec), j_max). Absent accuracy defaults to
// kDefaultAccuracyMultiple * prec.
TimerSpec resolve_timer_spec(nanoseconds measured_prec, std::optional<nanoseconds> configured_acc,
                             std::int64_t j_max = kDefaultJMax);

}  // namespace rbench
