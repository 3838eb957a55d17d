#pragma once

#include "rbench/timer.hpp"

#include "json.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rbench {

// Maps an estimated per-execution time to the number of executions to fold
// into a single timing measurement.

enum class OracleKind { logistic, lookup };

std::string_view to_string(OracleKind kind) noexcept;

struct LookupEntry {
  double threshold_ns = 0.0;
  std::int64_t n = 1;

  friend bool operator==(const LookupEntry&, const LookupEntry&) = default;
};

struct OracleSpec {
  OracleKind kind = OracleKind::logistic;
  double a_per_ns = 0.0;  // logistic steepness
  double b = 0.0;         // logistic midpoint, as a fraction of tau_acc
  std::vector<LookupEntry> table;
  TimerSpec timer;
};

enum class RangeCheck { enforce, skip };

inline constexpr double kFigureSteepness = 0.009;  // a * tau_prec
inline constexpr double kFigureMidpoint = 0.5;

// Generalized logistic oracle. With RangeCheck::enforce the parameters must
// satisfy 0.005 < a*tau_prec < 0.02 and 0.4 < b < 0.6.
OracleSpec make_logistic_oracle(const TimerSpec& timer, double a_per_ns, double b,
                                RangeCheck check = RangeCheck::enforce);

// Logistic oracle with a = 0.009 / tau_prec and b = 0.5.
OracleSpec make_default_logistic_oracle(const TimerSpec& timer);

// Lookup oracle. With RangeCheck::enforce thresholds must be strictly
// increasing, n non-increasing and every n in [1, j]. An empty table is always
// rejected.
OracleSpec make_lookup_oracle(const TimerSpec& timer, std::vector<LookupEntry> table,
                              RangeCheck check = RangeCheck::enforce);

// Step table sampling the default logistic curve at 1-2-5 decade knots from
// tau_prec up to tau_acc; each bucket (previous knot, knot] takes the logistic
// value at its right knot.
std::vector<LookupEntry> default_lookup_table(const TimerSpec& timer);

// Tables serialize as a JSON array of [threshold_ns, n] pairs.
nlohmann::json lookup_table_to_json(const std::vector<LookupEntry>& table);
std::vector<LookupEntry> lookup_table_from_json(const nlohmann::json& doc);

std::int64_t logistic_oracle(double t_ns, const OracleSpec& spec);
std::int64_t lookup_oracle(double t_ns, const OracleSpec& spec);

// Dispatches on spec.kind.
std::int64_t evaluate_oracle(double t_ns, const OracleSpec& spec);

struct PropertyFailure {
  int property = 0;  // 1..5
  std::string name;
  double witness_ns = 0.0;
  std::string detail;
};

struct OracleValidationReport {
  std::vector<PropertyFailure> failures;
  std::size_t grid_points = 0;

  bool passed() const noexcept { return failures.empty(); }
  bool property_passed(int property) const noexcept;
};

// Log-spaced grid over [tau_prec/10, 10*tau_acc] that contains tau_prec and
// tau_acc exactly.
std::vector<double> make_validation_grid(const TimerSpec& timer, std::size_t points = 200);

// Checks, over `grid`:
//   1. every value lies in {1, ..., j}
//   2. values are non-increasing in t
//   3. nu(tau_prec) >= 0.9 j
//   4. nu(t) == 1 for every t >= 2 tau_acc
//   5. |nu(t (1 +- 0.1)) - nu(t)| <= 0.05 j at t in {tau_prec, tau_acc}
// Throws ConfigError when the grid does not cover [tau_prec/10, 10 tau_acc]
// with at least 100 points including both timer constants.
OracleValidationReport validate_oracle(const OracleSpec& spec, std::span<const double> grid);

}  // namespace rbench
