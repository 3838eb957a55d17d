#pragma once

#include "rbench/delay_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace rbench {

struct EstimateSet {
  double min_ns = 0.0;
  double mean_ns = 0.0;
  double median_ns = 0.0;
  double trimmed_mean_ns = 0.0;
  std::int64_t sample_count = 0;
  std::int64_t n_execs = 1;

  friend bool operator==(const EstimateSet&, const EstimateSet&) = default;
};

// Fraction cut from each tail before averaging the trimmed mean.
inline constexpr double kTrimFraction = 0.05;

// Location estimates of per-execution samples. The trimmed mean drops
// floor(0.05 * N) order statistics from each end. Even-length medians average
// the two central order statistics.
EstimateSet location_estimates(std::span<const double> samples, std::int64_t n_execs);

// min over T_i / n_i.
double minimum_estimate(std::span<const Measurement> measurements);

enum class Verdict { regression, improvement, unchanged };

std::string_view to_string(Verdict verdict) noexcept;

inline constexpr double kDefaultRegressionThreshold = 0.30;

struct ComparisonResult {
  double baseline_min_ns = 0.0;
  double candidate_min_ns = 0.0;
  double ratio = 1.0;
  double threshold = kDefaultRegressionThreshold;
  Verdict verdict = Verdict::unchanged;
};

// Ratio of minima. Both boundaries are inclusive: ratio >= 1 + threshold is a
// regression, ratio <= 1 - threshold an improvement. Boundary tests allow a
// relative slack of 1e-12 so that a common rescaling of both runs never flips
// a verdict through rounding.
ComparisonResult compare_runs(const EstimateSet& baseline, const EstimateSet& candidate,
                              double threshold = kDefaultRegressionThreshold);

struct DensityCurve {
  std::vector<std::pair<double, double>> points;  // (time ns, density)
  double bandwidth_ns = 0.0;
};

// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * N^(-1/5). Falls back
// to the sample standard deviation when the IQR is zero; returns 0 for a
// constant sample.
double silverman_bandwidth(std::span<const double> samples);

// Gaussian KDE on `grid_size` uniform points over [min - 5h, max + 5h]. With no
// bandwidth given, uses silverman_bandwidth, or `fallback_bandwidth_ns` (the
// timer precision) when every sample is identical.
DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth_ns, std::size_t grid_size = 512,
                 double fallback_bandwidth_ns = 1.0);

double trapezoid_integral(const DensityCurve& curve);

void write_density_csv(std::ostream& out, const DensityCurve& curve);

}  // namespace rbench
