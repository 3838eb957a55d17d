#include "rbench/report.hpp"

#include "rbench/error.hpp"

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace rbench {

namespace {

using nlohmann::json;

template <class T, class F>
json optional_json(const std::optional<T>& value, F&& convert) {
  return value ? json(convert(*value)) : json(nullptr);
}

json tune_to_json(const TuneResult& tune) {
  return json{
      {"benchmark_id", tune.benchmark_id},
      {"n", tune.n},
      {"t_hat_ns", tune.t_hat_ns},
      {"tau_acc_ns", tune.timer.tau_acc.count()},
      {"tau_prec_ns", tune.timer.tau_prec.count()},
      {"j", tune.timer.j},
      {"oracle_kind", tune.oracle_kind},
      {"tuned_at", format_timestamp(tune.tuned_at)},
      {"ramp_len", tune.ramp_len},
  };
}

TuneResult tune_from_json(const json& node) {
  return TuneResult{
      .benchmark_id = node.at("benchmark_id").get<std::string>(),
      .n = node.at("n").get<std::int64_t>(),
      .t_hat_ns = node.at("t_hat_ns").get<double>(),
      .timer = TimerSpec{.tau_acc = nanoseconds{node.at("tau_acc_ns").get<std::int64_t>()},
                         .tau_prec = nanoseconds{node.at("tau_prec_ns").get<std::int64_t>()},
                         .j = node.at("j").get<std::int64_t>()},
      .oracle_kind = node.at("oracle_kind").get<std::string>(),
      .tuned_at = parse_timestamp(node.at("tuned_at").get<std::string>()),
      .ramp_len = node.at("ramp_len").get<std::int64_t>(),
  };
}

json trial_to_json(const Trial& trial, std::int64_t n_execs) {
  json times = json::array();
  std::vector<double> samples;
  samples.reserve(trial.measurements.size());
  for (const auto& m : trial.measurements) {
    times.push_back(m.total_time.count());
    samples.push_back(m.per_execution_ns());
  }
  return json{
      {"trial_index", trial.trial_index},
      {"n_execs", n_execs},
      {"total_times_ns", std::move(times)},
      {"estimates", estimates_to_json(location_estimates(samples, n_execs))},
  };
}

Trial trial_from_json(const json& node) {
  Trial trial;
  trial.trial_index = node.at("trial_index").get<std::int64_t>();
  const auto n = node.at("n_execs").get<std::int64_t>();
  for (const auto& t : node.at("total_times_ns")) {
    trial.measurements.push_back(Measurement{.total_time = nanoseconds{t.get<std::int64_t>()}, .n_execs = n});
  }
  return trial;
}

json record_to_json(const BenchmarkRecord& record) {
  json trials = json::array();
  for (const auto& trial : record.trials) trials.push_back(trial_to_json(trial, record.n_execs));
  json node{
      {"id", record.id},
      {"tune", optional_json(record.tune, tune_to_json)},
      {"n_execs", record.n_execs},
      {"checksum", fmt::format("{:016x}", record.checksum)},
      {"spawn_overhead_ns", optional_json(record.spawn_overhead, [](nanoseconds d) { return d.count(); })},
      {"trials", std::move(trials)},
      {"estimates", estimates_to_json(record.estimates)},
  };
  if (record.density) {
    json points = json::array();
    for (const auto& [x, y] : record.density->points) points.push_back({x, y});
    node["density"] = json{{"bandwidth_ns", record.density->bandwidth_ns}, {"points", std::move(points)}};
  }
  return node;
}

BenchmarkRecord record_from_json(const json& node) {
  BenchmarkRecord record;
  record.id = node.at("id").get<std::string>();
  if (!node.at("tune").is_null()) record.tune = tune_from_json(node.at("tune"));
  record.n_execs = node.at("n_execs").get<std::int64_t>();
  record.checksum = std::stoull(node.at("checksum").get<std::string>(), nullptr, 16);
  if (const auto& overhead = node.at("spawn_overhead_ns"); !overhead.is_null()) {
    record.spawn_overhead = nanoseconds{overhead.get<std::int64_t>()};
  }
  for (const auto& trial : node.at("trials")) record.trials.push_back(trial_from_json(trial));
  record.estimates = estimates_from_json(node.at("estimates"));
  if (node.contains("density")) {
    DensityCurve curve;
    curve.bandwidth_ns = node.at("density").at("bandwidth_ns").get<double>();
    for (const auto& p : node.at("density").at("points")) curve.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    record.density = std::move(curve);
  }
  return record;
}

}  // namespace

json timer_to_json(const TimerSpec& timer) {
  return json{{"tau_acc_ns", timer.tau_acc.count()}, {"tau_prec_ns", timer.tau_prec.count()}, {"j", timer.j}};
}

json estimates_to_json(const EstimateSet& e) {
  return json{
      {"min_ns", e.min_ns},       {"mean_ns", e.mean_ns},           {"median_ns", e.median_ns},
      {"trimmed_mean_ns", e.trimmed_mean_ns}, {"sample_count", e.sample_count}, {"n_execs", e.n_execs},
  };
}

EstimateSet estimates_from_json(const json& node) {
  return EstimateSet{
      .min_ns = node.at("min_ns").get<double>(),
      .mean_ns = node.at("mean_ns").get<double>(),
      .median_ns = node.at("median_ns").get<double>(),
      .trimmed_mean_ns = node.at("trimmed_mean_ns").get<double>(),
      .sample_count = node.at("sample_count").get<std::int64_t>(),
      .n_execs = node.at("n_execs").get<std::int64_t>(),
  };
}

json report_to_json(const BenchmarkReport& report) {
  json records = json::array();
  for (const auto& record : report.records) records.push_back(record_to_json(record));
  json environment = nullptr;
  if (report.machine) {
    environment = json{{"fingerprint", report.fingerprint},
                       {"hostname", report.machine->hostname},
                       {"cpu_model", report.machine->cpu_model}};
  }
  return json{
      {"schema_version", report.schema_version},
      {"kind", report.kind},
      {"timer", optional_json(report.timer, timer_to_json)},
      {"seed", optional_json(report.seed, [](std::uint64_t s) { return s; })},
      {"environment", std::move(environment)},
      {"started_at", optional_json(report.started_at, format_timestamp)},
      {"finished_at", optional_json(report.finished_at, format_timestamp)},
      {"records", std::move(records)},
  };
}

BenchmarkReport report_from_json(const json& doc) {
  try {
    BenchmarkReport report;
    report.schema_version = doc.at("schema_version").get<int>();
    if (report.schema_version != kReportSchemaVersion) {
      throw ParseError(fmt::format("unsupported report schema_version {}", report.schema_version));
    }
    report.kind = doc.at("kind").get<std::string>();
    if (const auto& timer = doc.at("timer"); !timer.is_null()) {
      report.timer = TimerSpec{.tau_acc = nanoseconds{timer.at("tau_acc_ns").get<std::int64_t>()},
                               .tau_prec = nanoseconds{timer.at("tau_prec_ns").get<std::int64_t>()},
                               .j = timer.at("j").get<std::int64_t>()};
    }
    if (const auto& seed = doc.at("seed"); !seed.is_null()) report.seed = seed.get<std::uint64_t>();
    if (const auto& env = doc.at("environment"); !env.is_null()) {
      report.machine = MachineIdentity{env.at("hostname").get<std::string>(), env.at("cpu_model").get<std::string>()};
      report.fingerprint = env.at("fingerprint").get<std::string>();
    }
    if (const auto& s = doc.at("started_at"); !s.is_null()) report.started_at = parse_timestamp(s.get<std::string>());
    if (const auto& f = doc.at("finished_at"); !f.is_null()) report.finished_at = parse_timestamp(f.get<std::string>());
    for (const auto& record : doc.at("records")) report.records.push_back(record_from_json(record));
    return report;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("malformed report: {}", e.what()));
  }
}

std::string serialize_report(const BenchmarkReport& report) { return report_to_json(report).dump(1) + "\n"; }

void write_report(const std::filesystem::path& path, const BenchmarkReport& report) {
  const auto text = serialize_report(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PersistenceError(fmt::format("cannot write report {}", path.string()));
  out << text;
  if (!out.flush()) throw PersistenceError(fmt::format("failed writing report {}", path.string()));
}

BenchmarkReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError(fmt::format("cannot open report {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  try {
    return report_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

EstimateSet recompute_estimates(const BenchmarkRecord& record) { return pooled_estimates(record.trials, record.n_execs); }

}  // namespace rbench
