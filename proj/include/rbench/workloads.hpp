#pragma once

#include "rbench/rng.hpp"
#include "rbench/tuning.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rbench {

template <class T>
inline void do_not_optimize(const T& value) {
  asm volatile("" : : "r,m"(value) : "memory");
}

// Sum of a[i] for every i in inds.
double sumindex(std::span<const double> a, std::span<const std::size_t> inds);

// Appends b to a element by element, drawing one random number per element.
// The draws do not affect `a`.
void pushall(std::vector<double>& a, std::span<const double> b, Xoshiro256& rng);

// For i in 1..n: even i decrements the counter; odd i runs j in 1..n, where odd
// j increments and even j decrements.
std::int64_t branchsum(std::int64_t n);

inline constexpr std::uint64_t kManyallocsSeed = 1;

// n inner arrays whose lengths are drawn from 1..n by a generator reseeded
// before every draw, so the structure is the same on every call.
std::vector<std::vector<double>> manyallocs(std::int64_t n);

class Workload {
public:
  virtual ~Workload() = default;
  // Runs the benchmark body once and returns a value derived from its output.
  virtual std::uint64_t execute() = 0;
};

struct BuiltinInfo {
  std::string_view name;
  std::int64_t default_size;
  std::string_view description;
};

std::span<const BuiltinInfo> builtin_catalog() noexcept;

// Throws ConfigError for an unknown name or a size < 1.
std::unique_ptr<Workload> make_builtin_workload(std::string_view name, std::int64_t size);

// Times a workload with the steady clock; folds every return value into checksum().
class WorkloadExecutor final : public Executor {
public:
  explicit WorkloadExecutor(std::unique_ptr<Workload> workload);
  nanoseconds run(std::int64_t count) override;
  std::uint64_t checksum() const noexcept override { return checksum_; }

private:
  std::unique_ptr<Workload> workload_;
  std::uint64_t checksum_ = 0;
};

// Times `count` sequential spawn-and-wait cycles of a command. Output goes to
// /dev/null; a nonzero exit status throws ExecutorError.
class CommandExecutor final : public Executor {
public:
  CommandExecutor(std::vector<std::string> argv, std::filesystem::path workdir);
  nanoseconds run(std::int64_t count) override;

private:
  void spawn_and_wait();

  std::vector<std::string> argv_;
  std::filesystem::path workdir_;
};

// Minimum over `repeats` timed runs of /bin/true, the fixed cost bundled into
// every command measurement.
nanoseconds measure_spawn_overhead(int repeats = 20);

}  // namespace rbench
