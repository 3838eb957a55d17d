#include "rbench/workloads.hpp"

#include "rbench/error.hpp"

#include <fmt/format.h>

#include <fcntl.h>
#include <spawn.h>
#include <unistd.h>
#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <numeric>

extern char** environ;

namespace rbench {

namespace {

constexpr std::array<BuiltinInfo, 4> kCatalog{{
    {"sumindex", 128, "indexed summation over a shuffled index sequence"},
    {"pushall", 256, "append loop with a random draw per element"},
    {"branchsum", 200, "parity-branched nested loop counter"},
    {"manyallocs", 1000, "array of arrays with reseeded random inner lengths"},
}};

class SumindexWorkload final : public Workload {
public:
  explicit SumindexWorkload(std::int64_t size) : a_(static_cast<std::size_t>(size)), inds_(static_cast<std::size_t>(size)) {
    Xoshiro256 rng{static_cast<std::uint64_t>(size)};
    for (auto& x : a_) x = rng.uniform01();
    std::iota(inds_.begin(), inds_.end(), std::size_t{0});
    for (std::size_t i = inds_.size(); i > 1; --i) {
      std::swap(inds_[i - 1], inds_[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
    }
  }
  std::uint64_t execute() override { return std::bit_cast<std::uint64_t>(sumindex(a_, inds_)); }

private:
  std::vector<double> a_;
  std::vector<std::size_t> inds_;
};

class PushallWorkload final : public Workload {
public:
  explicit PushallWorkload(std::int64_t size) : b_(static_cast<std::size_t>(size)), rng_(7) {
    for (std::size_t i = 0; i < b_.size(); ++i) b_[i] = static_cast<double>(i);
  }
  std::uint64_t execute() override {
    std::vector<double> a;
    pushall(a, b_, rng_);
    return a.size() + std::bit_cast<std::uint64_t>(a.back());
  }

private:
  std::vector<double> b_;
  Xoshiro256 rng_;
};

class BranchsumWorkload final : public Workload {
public:
  explicit BranchsumWorkload(std::int64_t size) : n_(size) {}
  std::uint64_t execute() override {
    auto n = n_;
    do_not_optimize(n);
    return static_cast<std::uint64_t>(branchsum(n));
  }

private:
  std::int64_t n_;
};

class ManyallocsWorkload final : public Workload {
public:
  explicit ManyallocsWorkload(std::int64_t size) : n_(size) {}
  std::uint64_t execute() override {
    const auto arrays = manyallocs(n_);
    std::uint64_t total = 0;
    for (const auto& inner : arrays) total += inner.size();
    return total;
  }

private:
  std::int64_t n_;
};

}  // namespace

double sumindex(std::span<const double> a, std::span<const std::size_t> inds) {
  double sum = 0.0;
  for (std::size_t i : inds) sum += a[i];
  return sum;
}

void pushall(std::vector<double>& a, std::span<const double> b, Xoshiro256& rng) {
  for (double x : b) {
    auto draw = rng();
    do_not_optimize(draw);
    a.push_back(x);
  }
}

std::int64_t branchsum(std::int64_t n) {
  std::int64_t counter = 0;
  for (std::int64_t i = 1; i <= n; ++i) {
    if (i % 2 == 0) {
      --counter;
    } else {
      for (std::int64_t j = 1; j <= n; ++j) {
        if (j % 2 == 1) {
          ++counter;
        } else {
          --counter;
        }
        do_not_optimize(counter);
      }
    }
  }
  return counter;
}

std::vector<std::vector<double>> manyallocs(std::int64_t n) {
  std::vector<std::vector<double>> arrays;
  arrays.reserve(static_cast<std::size_t>(std::max<std::int64_t>(n, 0)));
  Xoshiro256 rng{kManyallocsSeed};
  for (std::int64_t i = 0; i < n; ++i) {
    rng.reseed(kManyallocsSeed);
    arrays.emplace_back(static_cast<std::size_t>(rng.uniform_int(1, n)));
  }
  return arrays;
}

std::span<const BuiltinInfo> builtin_catalog() noexcept { return kCatalog; }

std::unique_ptr<Workload> make_builtin_workload(std::string_view name, std::int64_t size) {
  if (size < 1) throw ConfigError(fmt::format("builtin {} needs size >= 1, got {}", name, size));
  if (name == "sumindex") return std::make_unique<SumindexWorkload>(size);
  if (name == "pushall") return std::make_unique<PushallWorkload>(size);
  if (name == "branchsum") return std::make_unique<BranchsumWorkload>(size);
  if (name == "manyallocs") return std::make_unique<ManyallocsWorkload>(size);
  throw ConfigError(fmt::format("unknown builtin workload \"{}\"", name));
}

WorkloadExecutor::WorkloadExecutor(std::unique_ptr<Workload> workload) : workload_(std::move(workload)) {
  if (!workload_) throw ConfigError("workload executor needs a workload");
}

nanoseconds WorkloadExecutor::run(std::int64_t count) {
  std::uint64_t sink = 0;
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < count; ++i) {
    sink += workload_->execute();
    do_not_optimize(sink);
  }
  const auto stop = std::chrono::steady_clock::now();
  checksum_ ^= sink + 0x9E3779B97F4A7C15ULL + (checksum_ << 6) + (checksum_ >> 2);
  return std::chrono::duration_cast<nanoseconds>(stop - start);
}

CommandExecutor::CommandExecutor(std::vector<std::string> argv, std::filesystem::path workdir)
    : argv_(std::move(argv)), workdir_(std::move(workdir)) {
  if (argv_.empty()) throw ConfigError("command benchmark needs a non-empty argv");
}

void CommandExecutor::spawn_and_wait() {
  std::vector<char*> args;
  args.reserve(argv_.size() + 1);
  for (auto& a : argv_) args.push_back(a.data());
  args.push_back(nullptr);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
  if (!workdir_.empty()) posix_spawn_file_actions_addchdir_np(&actions, workdir_.c_str());

  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw ExecutorError(fmt::format("cannot spawn {}: {}", argv_[0], std::strerror(rc)));

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) throw ExecutorError(fmt::format("waitpid failed for {}", argv_[0]));
  }
  if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
    throw ExecutorError(fmt::format("{} exited abnormally (status {})", argv_[0], status));
  }
}

nanoseconds CommandExecutor::run(std::int64_t count) {
  const auto start = std::chrono::steady_clock::now();
  for (std::int64_t i = 0; i < count; ++i) spawn_and_wait();
  return std::chrono::duration_cast<nanoseconds>(std::chrono::steady_clock::now() - start);
}

nanoseconds measure_spawn_overhead(int repeats) {
  CommandExecutor noop({"/bin/true"}, {});
  nanoseconds best = nanoseconds::max();
  for (int i = 0; i < repeats; ++i) best = std::min(best, noop.run(1));
  return best;
}

}  // namespace rbench
