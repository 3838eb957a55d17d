#include "rbench/analysis.hpp"

#include "rbench/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

namespace rbench {

namespace {

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of_sorted(std::span<const double> sorted) {
  const std::size_t n = sorted.size();
  if (n % 2 == 1) return sorted[n / 2];
  return (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0;
}

// Linear-interpolated quantile of sorted data (type 7).
double quantile_of_sorted(std::span<const double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lower = static_cast<std::size_t>(std::floor(pos));
  const auto upper = std::min(lower + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lower);
  return sorted[lower] + frac * (sorted[upper] - sorted[lower]);
}

}  // namespace

EstimateSet location_estimates(std::span<const double> samples, std::int64_t n_execs) {
  if (samples.empty()) throw DomainError("location estimates need at least one sample");
  if (n_execs < 1) throw DomainError(fmt::format("n_execs must be >= 1, got {}", n_execs));
  for (double s : samples) {
    if (!std::isfinite(s) || s < 0.0) throw DomainError(fmt::format("sample {} is not a finite non-negative time", s));
  }

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  const auto cut = static_cast<std::size_t>(std::floor(kTrimFraction * static_cast<double>(sorted.size())));
  const std::span<const double> kept{sorted.data() + cut, sorted.size() - 2 * cut};

  return EstimateSet{
      .min_ns = sorted.front(),
      .mean_ns = mean_of(samples),
      .median_ns = median_of_sorted(sorted),
      .trimmed_mean_ns = mean_of(kept),
      .sample_count = static_cast<std::int64_t>(samples.size()),
      .n_execs = n_execs,
  };
}

double minimum_estimate(std::span<const Measurement> measurements) {
  if (measurements.empty()) throw DomainError("minimum estimate needs at least one measurement");
  double best = measurements.front().per_execution_ns();
  for (const auto& m : measurements) {
    if (m.n_execs < 1) throw DomainError(fmt::format("measurement with n_execs = {}", m.n_execs));
    best = std::min(best, m.per_execution_ns());
  }
  return best;
}

std::string_view to_string(Verdict verdict) noexcept {
  switch (verdict) {
    case Verdict::regression: return "regression";
    case Verdict::improvement: return "improvement";
    case Verdict::unchanged: return "unchanged";
  }
  return "unchanged";
}

ComparisonResult compare_runs(const EstimateSet& baseline, const EstimateSet& candidate, double threshold) {
  if (!(threshold > 0.0)) throw DomainError(fmt::format("threshold must be positive, got {}", threshold));
  if (!(baseline.min_ns > 0.0)) throw DomainError(fmt::format("baseline minimum {} ns is not positive", baseline.min_ns));
  if (!(candidate.min_ns > 0.0)) throw DomainError(fmt::format("candidate minimum {} ns is not positive", candidate.min_ns));

  constexpr double kSlack = 1e-12;
  ComparisonResult result{
      .baseline_min_ns = baseline.min_ns,
      .candidate_min_ns = candidate.min_ns,
      .ratio = candidate.min_ns / baseline.min_ns,
      .threshold = threshold,
      .verdict = Verdict::unchanged,
  };
  if (result.ratio >= (1.0 + threshold) * (1.0 - kSlack)) {
    result.verdict = Verdict::regression;
  } else if (result.ratio <= (1.0 - threshold) * (1.0 + kSlack)) {
    result.verdict = Verdict::improvement;
  }
  return result;
}

double silverman_bandwidth(std::span<const double> samples) {
  if (samples.size() < 2) throw DomainError("bandwidth selection needs at least two samples");
  const double mean = mean_of(samples);
  double ss = 0.0;
  for (double s : samples) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_of_sorted(sorted, 0.75) - quantile_of_sorted(sorted, 0.25);

  double spread = sd;
  if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(samples.size()), -0.2);
}

DensityCurve kde(std::span<const double> samples, std::optional<double> bandwidth_ns, std::size_t grid_size,
                 double fallback_bandwidth_ns) {
  if (samples.size() < 2) throw DomainError("kde needs at least two samples");
  if (grid_size < 2) throw DomainError("kde grid needs at least two points");
  if (bandwidth_ns && !(*bandwidth_ns > 0.0)) throw DomainError(fmt::format("bandwidth {} is not positive", *bandwidth_ns));

  double h = bandwidth_ns ? *bandwidth_ns : silverman_bandwidth(samples);
  if (!(h > 0.0)) h = fallback_bandwidth_ns;
  if (!(h > 0.0)) throw DomainError("kde fallback bandwidth is not positive");

  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it - 5.0 * h;
  const double hi = *hi_it + 5.0 * h;
  const double step = (hi - lo) / static_cast<double>(grid_size - 1);
  const double norm = 1.0 / (static_cast<double>(samples.size()) * h * std::sqrt(2.0 * std::numbers::pi));

  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());

  DensityCurve curve;
  curve.bandwidth_ns = h;
  curve.points.reserve(grid_size);
  // Kernels beyond 10 bandwidths contribute below 2e-22 of their peak.
  const double reach = 10.0 * h;
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double x = lo + step * static_cast<double>(i);
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), x - reach);
    const auto last = std::upper_bound(first, sorted.end(), x + reach);
    double density = 0.0;
    for (auto it = first; it != last; ++it) {
      const double z = (x - *it) / h;
      density += std::exp(-0.5 * z * z);
    }
    curve.points.emplace_back(x, density * norm);
  }
  return curve;
}

double trapezoid_integral(const DensityCurve& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const auto& [x0, y0] = curve.points[i - 1];
    const auto& [x1, y1] = curve.points[i];
    area += 0.5 * (y0 + y1) * (x1 - x0);
  }
  return area;
}

void write_density_csv(std::ostream& out, const DensityCurve& curve) {
  out << "time_ns,density\n";
  for (const auto& [x, y] : curve.points) out << fmt::format("{},{}\n", x, y);
}

}  // namespace rbench
