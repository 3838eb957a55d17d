#pragma once

#include "rbench/delay_model.hpp"
#include "rbench/oracle.hpp"
#include "rbench/timer.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rbench {

// Performs `count` back-to-back executions of a benchmark and reports the
// elapsed time of the whole batch.
class Executor {
public:
  virtual ~Executor() = default;
  virtual nanoseconds run(std::int64_t count) = 0;
  // Digest of the values the benchmark produced, for executors that see them.
  virtual std::uint64_t checksum() const noexcept { return 0; }
};

// Executor backed by the delay-model simulator. Call c uses derive_seed(seed, c).
class SimulatedExecutor final : public Executor {
public:
  SimulatedExecutor(SyntheticProgram program, std::vector<DelayFactor> factors, TimerErrorModel error,
                    std::uint64_t seed);
  nanoseconds run(std::int64_t count) override;
  std::int64_t calls() const noexcept { return calls_; }

private:
  SyntheticProgram program_;
  std::vector<DelayFactor> factors_;
  TimerErrorModel error_;
  std::uint64_t seed_;
  std::int64_t calls_ = 0;
};

using Timestamp = std::chrono::sys_seconds;

std::string format_timestamp(Timestamp ts);
Timestamp parse_timestamp(const std::string& text);
Timestamp now_timestamp();

struct TuneResult {
  std::string benchmark_id;
  std::int64_t n = 1;
  double t_hat_ns = 0.0;
  TimerSpec timer;
  std::string oracle_kind;
  Timestamp tuned_at{};
  std::int64_t ramp_len = 0;

  friend bool operator==(const TuneResult&, const TuneResult&) = default;
};

inline constexpr nanoseconds kDefaultTuningBudget = std::chrono::seconds{5};

// Measures batches of i = 1, 2, ... executions, stopping after i = j or once the
// summed batch times reach `tuning_budget`. Batches that measured zero time are
// ignored; t_hat is the smallest remaining T_i / i and n = oracle(t_hat).
// Throws DegenerateBenchmarkError when every batch measured zero.
TuneResult tune(Executor& executor, const TimerSpec& timer, const OracleSpec& oracle,
                nanoseconds tuning_budget = kDefaultTuningBudget, std::string benchmark_id = {});

struct MachineIdentity {
  std::string hostname;
  std::string cpu_model;
};

MachineIdentity host_identity();

// Hex FNV-1a 64 digest of hostname, CPU model and timer constants.
std::string machine_fingerprint(const MachineIdentity& machine, const TimerSpec& timer);

inline constexpr int kCacheSchemaVersion = 1;

// Upserts `result` under (result.benchmark_id, fingerprint) and atomically
// replaces the cache file. Throws PersistenceError on IO failure.
void cache_store(const std::filesystem::path& cache_path, const TuneResult& result, const std::string& fingerprint);

// Absent file is a miss. Throws ParseError for an unreadable or corrupt file.
std::optional<TuneResult> cache_lookup(const std::filesystem::path& cache_path, const std::string& benchmark_id,
                                       const std::string& fingerprint);

}  // namespace rbench
