#include "rbench/tuning.hpp"

#include "rbench/error.hpp"
#include "rbench/rng.hpp"

#include "json.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <unistd.h>

#include <algorithm>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rbench {

namespace {

using nlohmann::json;

json to_json(const TuneResult& result, const std::string& fingerprint) {
  return json{
      {"benchmark_id", result.benchmark_id},
      {"fingerprint", fingerprint},
      {"n", result.n},
      {"t_hat_ns", result.t_hat_ns},
      {"tau_acc_ns", result.timer.tau_acc.count()},
      {"tau_prec_ns", result.timer.tau_prec.count()},
      {"j", result.timer.j},
      {"oracle_kind", result.oracle_kind},
      {"tuned_at", format_timestamp(result.tuned_at)},
      {"ramp_len", result.ramp_len},
  };
}

TuneResult tune_result_from_json(const json& entry) {
  TuneResult result;
  result.benchmark_id = entry.at("benchmark_id").get<std::string>();
  result.n = entry.at("n").get<std::int64_t>();
  result.t_hat_ns = entry.at("t_hat_ns").get<double>();
  result.timer.tau_acc = nanoseconds{entry.at("tau_acc_ns").get<std::int64_t>()};
  result.timer.tau_prec = nanoseconds{entry.at("tau_prec_ns").get<std::int64_t>()};
  result.timer.j = entry.contains("j") ? entry.at("j").get<std::int64_t>()
                                       : resolve_timer_spec(result.timer.tau_prec, result.timer.tau_acc).j;
  result.oracle_kind = entry.at("oracle_kind").get<std::string>();
  result.tuned_at = parse_timestamp(entry.at("tuned_at").get<std::string>());
  result.ramp_len = entry.at("ramp_len").get<std::int64_t>();
  return result;
}

json read_cache(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot read tuning cache {}", path.string()));
  try {
    json doc = json::parse(in);
    if (!doc.is_object() || !doc.contains("entries") || !doc.at("entries").is_array()) {
      throw ParseError(fmt::format("tuning cache {} has no \"entries\" array", path.string()));
    }
    if (doc.value("schema_version", 0) != kCacheSchemaVersion) {
      throw ParseError(fmt::format("tuning cache {} has unsupported schema_version", path.string()));
    }
    return doc;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("corrupt tuning cache {}: {}", path.string(), e.what()));
  }
}

std::uint64_t fnv1a(std::string_view text, std::uint64_t hash = 0xcbf29ce484222325ULL) {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace

SimulatedExecutor::SimulatedExecutor(SyntheticProgram program, std::vector<DelayFactor> factors,
                                     TimerErrorModel error, std::uint64_t seed)
    : program_(std::move(program)), factors_(std::move(factors)), error_(error), seed_(seed) {
  validate(program_);
  for (const auto& f : factors_) validate(f, program_);
}

nanoseconds SimulatedExecutor::run(std::int64_t count) {
  const auto seed = derive_seed(seed_, static_cast<std::uint64_t>(calls_++));
  return simulate_measurement(program_, factors_, count, error_, seed).total_time;
}

std::string format_timestamp(Timestamp ts) { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(ts))); }

Timestamp parse_timestamp(const std::string& text) {
  std::tm tm{};
  std::istringstream in(text);
  in >> std::get_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  if (in.fail()) throw ParseError(fmt::format("bad timestamp \"{}\"", text));
  return Timestamp{std::chrono::seconds{timegm(&tm)}};
}

Timestamp now_timestamp() { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); }

TuneResult tune(Executor& executor, const TimerSpec& timer, const OracleSpec& oracle, nanoseconds tuning_budget,
                std::string benchmark_id) {
  if (tuning_budget.count() <= 0) throw ConfigError("tuning budget must be positive");
  if (timer.j < 1) throw ConfigError("timer spec has j < 1");

  double t_hat = std::numeric_limits<double>::infinity();
  nanoseconds spent{0};
  std::int64_t ramp_len = 0;
  for (std::int64_t i = 1; i <= timer.j; ++i) {
    nanoseconds elapsed;
    try {
      elapsed = executor.run(i);
    } catch (const ExecutorError&) {
      throw;
    } catch (const std::exception& e) {
      throw ExecutorError(fmt::format("tuning aborted at ramp point {}: {}", i, e.what()));
    }
    ++ramp_len;
    spent += elapsed;
    if (elapsed.count() > 0) t_hat = std::min(t_hat, static_cast<double>(elapsed.count()) / static_cast<double>(i));
    if (spent >= tuning_budget) break;
  }
  if (!std::isfinite(t_hat)) {
    throw DegenerateBenchmarkError(
        fmt::format("every one of {} ramp points measured 0 ns; the workload is below timer precision", ramp_len));
  }

  return TuneResult{
      .benchmark_id = std::move(benchmark_id),
      .n = std::clamp<std::int64_t>(evaluate_oracle(t_hat, oracle), 1, timer.j),
      .t_hat_ns = t_hat,
      .timer = timer,
      .oracle_kind = std::string(to_string(oracle.kind)),
      .tuned_at = now_timestamp(),
      .ramp_len = ramp_len,
  };
}

MachineIdentity host_identity() {
  MachineIdentity machine;
  char host[256] = {};
  if (::gethostname(host, sizeof host - 1) == 0) machine.hostname = host;
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      if (const auto colon = line.find(':'); colon != std::string::npos) {
        machine.cpu_model = line.substr(line.find_first_not_of(' ', colon + 1));
      }
      break;
    }
  }
  return machine;
}

std::string machine_fingerprint(const MachineIdentity& machine, const TimerSpec& timer) {
  std::uint64_t hash = fnv1a(machine.hostname);
  hash = fnv1a(std::string_view{"\x1f", 1}, hash);
  hash = fnv1a(machine.cpu_model, hash);
  hash = fnv1a(fmt::format("\x1f{}\x1f{}\x1f{}", timer.tau_acc.count(), timer.tau_prec.count(), timer.j), hash);
  return fmt::format("{:016x}", hash);
}

void cache_store(const std::filesystem::path& cache_path, const TuneResult& result, const std::string& fingerprint) {
  json doc = std::filesystem::exists(cache_path) ? read_cache(cache_path)
                                                 : json{{"schema_version", kCacheSchemaVersion}, {"entries", json::array()}};
  auto& entries = doc.at("entries");
  const auto existing = std::find_if(entries.begin(), entries.end(), [&](const json& e) {
    return e.value("benchmark_id", "") == result.benchmark_id && e.value("fingerprint", "") == fingerprint;
  });
  if (existing != entries.end()) {
    *existing = to_json(result, fingerprint);
  } else {
    entries.push_back(to_json(result, fingerprint));
  }

  auto tmp = cache_path;
  tmp += fmt::format(".tmp.{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw PersistenceError(fmt::format("cannot write tuning cache {}", cache_path.string()));
    out << doc.dump(2) << '\n';
    if (!out.flush()) throw PersistenceError(fmt::format("failed writing tuning cache {}", cache_path.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, cache_path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw PersistenceError(fmt::format("cannot replace tuning cache {}", cache_path.string()));
  }
}

std::optional<TuneResult> cache_lookup(const std::filesystem::path& cache_path, const std::string& benchmark_id,
                                       const std::string& fingerprint) {
  if (!std::filesystem::exists(cache_path)) return std::nullopt;
  const json doc = read_cache(cache_path);
  try {
    for (const auto& entry : doc.at("entries")) {
      if (entry.at("benchmark_id").get<std::string>() == benchmark_id &&
          entry.at("fingerprint").get<std::string>() == fingerprint) {
        return tune_result_from_json(entry);
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("corrupt tuning cache {}: {}", cache_path.string(), e.what()));
  }
  return std::nullopt;
}

}  // namespace rbench
