#include "rbench/scenario.hpp"

#include "rbench/error.hpp"
#include "rbench/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <type_traits>
#include <variant>

namespace rbench {

namespace {

using nlohmann::json;

constexpr std::uint64_t kRegimeSalt = 0x5EED0F7E61A1E5ULL;

std::variant<double, std::vector<double>> parse_probs(const json& node) {
  if (node.is_number()) return node.get<double>();
  if (node.is_array()) return node.get<std::vector<double>>();
  throw ParseError("\"probs\" must be a number or an array of numbers");
}

std::int64_t positive(const json& doc, const char* key) {
  const auto value = doc.at(key).get<std::int64_t>();
  if (value < 1) throw ConfigError(fmt::format("scenario \"{}\" must be >= 1, got {}", key, value));
  return value;
}

}  // namespace

Scenario parse_scenario(const json& doc) {
  try {
    Scenario scenario;
    const auto& program = doc.at("program");
    scenario.program.k = program.at("k").get<std::int64_t>();
    scenario.program.t_p0 = nanoseconds{program.at("t_p0_ns").get<std::int64_t>()};
    validate(scenario.program);

    for (const auto& node : doc.value("factors", json::array())) {
      ScenarioFactor factor;
      factor.base.tau = nanoseconds{node.at("tau_ns").get<std::int64_t>()};
      factor.base.trigger_probs = parse_probs(node.at("probs"));
      validate(factor.base, scenario.program);
      if (node.contains("regimes")) {
        for (const auto& regime : node.at("regimes")) {
          DelayFactor probe{factor.base.tau, parse_probs(regime)};
          validate(probe, scenario.program);
          factor.regimes.push_back(probe.trigger_probs);
        }
        if (factor.regimes.empty()) throw ConfigError("\"regimes\" must not be empty");
      }
      factor.drift = node.value("drift", 0.0);
      scenario.factors.push_back(std::move(factor));
    }

    if (doc.contains("error")) {
      const auto& error = doc.at("error");
      const auto kind = error.at("kind").get<std::string>();
      if (kind == "none") {
        scenario.error.kind = TimerErrorKind::none;
      } else if (kind == "uniform") {
        scenario.error.kind = TimerErrorKind::uniform;
      } else {
        throw ConfigError(fmt::format("unknown timer error kind \"{}\"", kind));
      }
      scenario.error.bound = nanoseconds{error.value("bound_ns", std::int64_t{0})};
      if (scenario.error.bound.count() < 0) throw ConfigError("timer error bound is negative");
    }
    if (doc.contains("timer")) {
      const auto& timer = doc.at("timer");
      scenario.timer = resolve_timer_spec(nanoseconds{timer.at("tau_prec_ns").get<std::int64_t>()},
                                          nanoseconds{timer.at("tau_acc_ns").get<std::int64_t>()});
      validate(scenario.error, *scenario.timer);
    }

    scenario.trials = positive(doc, "trials");
    scenario.measurements_per_trial = positive(doc, "measurements_per_trial");
    scenario.n = positive(doc, "n");
    scenario.seed = doc.value("seed", std::uint64_t{0});
    return scenario;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("malformed scenario: {}", e.what()));
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistenceError(fmt::format("cannot open scenario file {}", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("{}: {}", path.string(), e.what()));
  }
  return parse_scenario(doc);
}

std::vector<DelayFactor> factors_for_trial(const Scenario& scenario, std::int64_t trial_index, std::uint64_t seed) {
  Xoshiro256 regime_rng{derive_seed(seed ^ kRegimeSalt, static_cast<std::uint64_t>(trial_index))};
  const double selector = regime_rng.uniform01();

  std::vector<DelayFactor> factors;
  factors.reserve(scenario.factors.size());
  for (const auto& source : scenario.factors) {
    DelayFactor factor = source.base;
    if (!source.regimes.empty()) {
      const auto pick = static_cast<std::size_t>(selector * static_cast<double>(source.regimes.size()));
      factor.trigger_probs = source.regimes[std::min(pick, source.regimes.size() - 1)];
    }
    if (source.drift != 0.0) {
      const double shift = source.drift * static_cast<double>(trial_index);
      std::visit(
          [shift](auto& probs) {
            if constexpr (std::is_same_v<std::decay_t<decltype(probs)>, double>) {
              probs = std::clamp(probs + shift, 0.0, 1.0);
            } else {
              for (auto& p : probs) p = std::clamp(p + shift, 0.0, 1.0);
            }
          },
          factor.trigger_probs);
    }
    factors.push_back(std::move(factor));
  }
  return factors;
}

std::vector<Trial> run_scenario(const Scenario& scenario, std::uint64_t seed) {
  std::vector<Trial> trials;
  trials.reserve(static_cast<std::size_t>(scenario.trials));
  for (std::int64_t t = 0; t < scenario.trials; ++t) {
    const auto factors = factors_for_trial(scenario, t, seed);
    trials.push_back(simulate_trial(scenario.program, factors, scenario.n, scenario.error,
                                    scenario.measurements_per_trial, derive_seed(seed, static_cast<std::uint64_t>(t)), t));
  }
  return trials;
}

}  // namespace rbench
