#include "rbench/oracle.hpp"

#include "rbench/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace rbench {

namespace {

constexpr double kExponentClamp = 700.0;

std::int64_t clamp_to_range(double value, std::int64_t j) {
  if (!(value >= 1.0)) return 1;
  if (value >= static_cast<double>(j)) return j;
  return static_cast<std::int64_t>(value);
}

}  // namespace

std::string_view to_string(OracleKind kind) noexcept {
  return kind == OracleKind::logistic ? "logistic" : "lookup";
}

OracleSpec make_logistic_oracle(const TimerSpec& timer, double a_per_ns, double b, RangeCheck check) {
  if (!std::isfinite(a_per_ns) || !std::isfinite(b)) {
    throw ConfigError("logistic oracle parameters must be finite");
  }
  if (check == RangeCheck::enforce) {
    const double scaled = a_per_ns * static_cast<double>(timer.tau_prec.count());
    if (!(scaled > 0.005 && scaled < 0.02)) {
      throw ConfigError(fmt::format("logistic steepness a*tau_prec = {} outside (0.005, 0.02)", scaled));
    }
    if (!(b > 0.4 && b < 0.6)) {
      throw ConfigError(fmt::format("logistic midpoint b = {} outside (0.4, 0.6)", b));
    }
  }
  return OracleSpec{.kind = OracleKind::logistic, .a_per_ns = a_per_ns, .b = b, .table = {}, .timer = timer};
}

OracleSpec make_default_logistic_oracle(const TimerSpec& timer) {
  return make_logistic_oracle(timer, kFigureSteepness / static_cast<double>(timer.tau_prec.count()),
                              kFigureMidpoint);
}

OracleSpec make_lookup_oracle(const TimerSpec& timer, std::vector<LookupEntry> table, RangeCheck check) {
  if (table.empty()) throw ConfigError("lookup oracle table is empty");
  if (check == RangeCheck::enforce) {
    for (std::size_t i = 0; i < table.size(); ++i) {
      const auto& entry = table[i];
      if (entry.n < 1 || entry.n > timer.j) {
        throw ConfigError(fmt::format("lookup entry {} has n = {} outside [1, {}]", i, entry.n, timer.j));
      }
      if (i > 0 && !(entry.threshold_ns > table[i - 1].threshold_ns)) {
        throw ConfigError(fmt::format("lookup thresholds must strictly increase (entry {})", i));
      }
      if (i > 0 && entry.n > table[i - 1].n) {
        throw ConfigError(fmt::format("lookup n values must not increase (entry {})", i));
      }
    }
  }
  return OracleSpec{.kind = OracleKind::lookup, .a_per_ns = 0.0, .b = 0.0, .table = std::move(table), .timer = timer};
}

std::vector<LookupEntry> default_lookup_table(const TimerSpec& timer) {
  const auto logistic = make_default_logistic_oracle(timer);
  const double prec = static_cast<double>(timer.tau_prec.count());
  const double acc = static_cast<double>(timer.tau_acc.count());

  std::vector<LookupEntry> table;
  for (double decade = prec; decade <= acc; decade *= 10.0) {
    for (double step : {1.0, 2.0, 5.0}) {
      const double knot = decade * step;
      if (knot >= acc) break;
      table.push_back({knot, logistic_oracle(knot, logistic)});
    }
  }
  table.push_back({acc, logistic_oracle(acc, logistic)});
  return table;
}

nlohmann::json lookup_table_to_json(const std::vector<LookupEntry>& table) {
  auto doc = nlohmann::json::array();
  for (const auto& entry : table) doc.push_back({entry.threshold_ns, entry.n});
  return doc;
}

std::vector<LookupEntry> lookup_table_from_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw ParseError("lookup table must be a JSON array of [threshold_ns, n] pairs");
  std::vector<LookupEntry> table;
  for (const auto& pair : doc) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number_integer()) {
      throw ParseError("lookup table entries must be [threshold_ns, n] pairs");
    }
    table.push_back({pair[0].get<double>(), pair[1].get<std::int64_t>()});
  }
  return table;
}

std::int64_t logistic_oracle(double t_ns, const OracleSpec& spec) {
  if (spec.kind != OracleKind::logistic) throw ConfigError("logistic_oracle called with a lookup spec");
  if (!(t_ns >= 0.0)) throw DomainError(fmt::format("oracle time must be non-negative, got {}", t_ns));
  const double midpoint = spec.b * static_cast<double>(spec.timer.tau_acc.count());
  const double exponent = std::clamp(spec.a_per_ns * (t_ns - midpoint), -kExponentClamp, kExponentClamp);
  const double j = static_cast<double>(spec.timer.j);
  const double y = std::floor(1.0 + (j - 1.0) / (1.0 + std::exp(exponent)));
  return clamp_to_range(y, spec.timer.j);
}

std::int64_t lookup_oracle(double t_ns, const OracleSpec& spec) {
  if (spec.kind != OracleKind::lookup) throw ConfigError("lookup_oracle called with a logistic spec");
  if (spec.table.empty()) throw ConfigError("lookup oracle table is empty");
  if (!(t_ns >= 0.0)) throw DomainError(fmt::format("oracle time must be non-negative, got {}", t_ns));
  const auto it = std::lower_bound(spec.table.begin(), spec.table.end(), t_ns,
                                   [](const LookupEntry& e, double t) { return e.threshold_ns < t; });
  return it == spec.table.end() ? 1 : it->n;
}

std::int64_t evaluate_oracle(double t_ns, const OracleSpec& spec) {
  return spec.kind == OracleKind::logistic ? logistic_oracle(t_ns, spec) : lookup_oracle(t_ns, spec);
}

bool OracleValidationReport::property_passed(int property) const noexcept {
  return std::none_of(failures.begin(), failures.end(),
                      [property](const PropertyFailure& f) { return f.property == property; });
}

std::vector<double> make_validation_grid(const TimerSpec& timer, std::size_t points) {
  if (points < 100) throw ConfigError("validation grid needs at least 100 points");
  const double lo = static_cast<double>(timer.tau_prec.count()) / 10.0;
  const double hi = static_cast<double>(timer.tau_acc.count()) * 10.0;
  std::vector<double> grid;
  grid.reserve(points);
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(points - 3);
  for (std::size_t i = 0; i + 2 < points; ++i) grid.push_back(std::exp(log_lo + step * static_cast<double>(i)));
  grid.front() = lo;
  grid.back() = hi;
  grid.push_back(static_cast<double>(timer.tau_prec.count()));
  grid.push_back(static_cast<double>(timer.tau_acc.count()));
  std::sort(grid.begin(), grid.end());
  return grid;
}

OracleValidationReport validate_oracle(const OracleSpec& spec, std::span<const double> grid) {
  const double prec = static_cast<double>(spec.timer.tau_prec.count());
  const double acc = static_cast<double>(spec.timer.tau_acc.count());
  const std::int64_t j = spec.timer.j;

  if (grid.size() < 100) throw ConfigError(fmt::format("validation grid has {} points, need >= 100", grid.size()));
  const auto [lo, hi] = std::minmax_element(grid.begin(), grid.end());
  if (*lo > prec / 10.0 || *hi < acc * 10.0) {
    throw ConfigError(fmt::format("validation grid [{}, {}] does not cover [{}, {}]", *lo, *hi, prec / 10.0, acc * 10.0));
  }
  if (std::find(grid.begin(), grid.end(), prec) == grid.end() ||
      std::find(grid.begin(), grid.end(), acc) == grid.end()) {
    throw ConfigError("validation grid must contain tau_prec and tau_acc");
  }

  std::vector<double> sorted(grid.begin(), grid.end());
  std::sort(sorted.begin(), sorted.end());

  OracleValidationReport report;
  report.grid_points = sorted.size();
  auto fail = [&](int property, std::string name, double t, std::string detail) {
    report.failures.push_back({property, std::move(name), t, std::move(detail)});
  };

  std::vector<std::int64_t> values;
  values.reserve(sorted.size());
  for (double t : sorted) values.push_back(evaluate_oracle(t, spec));

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (values[i] < 1 || values[i] > j) {
      fail(1, "range", sorted[i], fmt::format("nu = {} outside [1, {}]", values[i], j));
      break;
    }
  }
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (values[i] > values[i - 1]) {
      fail(2, "non-increasing", sorted[i],
           fmt::format("nu({}) = {} > nu({}) = {}", sorted[i], values[i], sorted[i - 1], values[i - 1]));
      break;
    }
  }
  if (const auto at_prec = evaluate_oracle(prec, spec); static_cast<double>(at_prec) < 0.9 * static_cast<double>(j)) {
    fail(3, "saturates at precision", prec, fmt::format("nu(tau_prec) = {} < 0.9 j = {}", at_prec, 0.9 * static_cast<double>(j)));
  }
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] >= 2.0 * acc && values[i] != 1) {
      fail(4, "single execution beyond accuracy", sorted[i], fmt::format("nu = {} != 1", values[i]));
      break;
    }
  }
  for (double t : {prec, acc}) {
    const auto centre = evaluate_oracle(t, spec);
    for (double factor : {0.9, 1.1}) {
      const auto shifted = evaluate_oracle(t * factor, spec);
      const double change = std::abs(static_cast<double>(shifted - centre)) / static_cast<double>(j);
      if (change > 0.05) {
        fail(5, "weak dependence near timer constants", t,
             fmt::format("nu({}) = {} vs nu({}) = {}: relative change {:.4f} > 0.05", t * factor, shifted, t, centre, change));
      }
    }
  }
  return report;
}

}  // namespace rbench
