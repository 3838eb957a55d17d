#pragma once

#include "rbench/experiment.hpp"
#include "rbench/tuning.hpp"

#include "json.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace rbench {

inline constexpr int kReportSchemaVersion = 1;

struct BenchmarkReport {
  int schema_version = kReportSchemaVersion;
  std::string kind = "run";  // "run" or "simulate"
  std::optional<TimerSpec> timer;
  std::optional<std::uint64_t> seed;
  std::optional<MachineIdentity> machine;
  std::string fingerprint;
  std::optional<Timestamp> started_at;
  std::optional<Timestamp> finished_at;
  std::vector<BenchmarkRecord> records;
};

nlohmann::json timer_to_json(const TimerSpec& timer);
nlohmann::json estimates_to_json(const EstimateSet& estimates);
EstimateSet estimates_from_json(const nlohmann::json& node);

nlohmann::json report_to_json(const BenchmarkReport& report);
BenchmarkReport report_from_json(const nlohmann::json& doc);

// Serialized form is deterministic: the same report always produces the same bytes.
std::string serialize_report(const BenchmarkReport& report);
void write_report(const std::filesystem::path& path, const BenchmarkReport& report);
BenchmarkReport read_report(const std::filesystem::path& path);

// Estimates recomputed from the record's raw measurements.
EstimateSet recompute_estimates(const BenchmarkRecord& record);

}  // namespace rbench
