#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "lamplighter/error.hpp"

namespace lamplighter::stats {

struct PowerFit {
  double slope;
  double slope_stderr;
  double intercept;  // in log space
};

/// Least-squares line through (log x, log y).
inline PowerFit fit_power_exponent(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw DomainError("power fit needs at least 3 points");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].first > 0.0)) throw DomainError("power fit needs positive x");
    if (!(points[i].second > 0.0)) throw DomainError("power fit needs positive y");
    if (i > 0 && !(points[i].first > points[i - 1].first))
      throw DomainError("power fit needs strictly increasing x");
  }
  const auto n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (intercept + slope * std::log(x));
    sse += r * r;
  }
  return {slope, std::sqrt(sse / (n - 2.0) / sxx), intercept};
}

/// Kolmogorov-Smirnov distance between the empirical CDF of real samples and
/// a continuous reference CDF.
inline double empirical_cdf_distance(std::vector<double> samples,
                                     const std::function<double(double)>& cdf) {
  if (samples.empty()) throw DomainError("KS distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

/// Kolmogorov-Smirnov distance for integer-valued samples. Both CDFs are
/// constant on [x, x+1), so the supremum is attained at integers.
inline double empirical_cdf_distance_discrete(std::vector<std::int64_t> samples,
                                              const std::function<double(std::int64_t)>& cdf) {
  if (samples.empty()) throw DomainError("KS distance needs at least one sample");
  std::sort(samples.begin(), samples.end());
  const auto n = static_cast<double>(samples.size());
  double d = std::abs(cdf(samples.front() - 1));
  std::size_t i = 0;
  for (std::int64_t x = samples.front(); x <= samples.back(); ++x) {
    while (i < samples.size() && samples[i] <= x) ++i;
    d = std::max(d, std::abs(static_cast<double>(i) / n - cdf(x)));
  }
  return d;
}

/// Asymptotic KS critical value for a 0.1% significance level.
inline double ks_critical_value_001(std::size_t n) {
  return 1.9495 / std::sqrt(static_cast<double>(n));
}

struct ChiSquareResult {
  double statistic;
  std::size_t degrees_of_freedom;
  double p_value;
};

/// Pearson chi-square goodness of fit. `expected` holds the reference
/// probability of each bin of `observed`; the caller supplies a tail bin so
/// that they sum to 1. Bins are merged from the right until every expected
/// count is at least `min_expected`.
inline ChiSquareResult chi_square_test(std::span<const std::uint64_t> observed,
                                       std::span<const double> expected, double min_expected = 5.0) {
  if (observed.size() != expected.size() || observed.empty())
    throw DomainError("chi-square needs matching non-empty bins");
  double total = 0.0;
  for (auto o : observed) total += static_cast<double>(o);
  std::vector<std::pair<double, double>> bins;  // (observed, expected count)
  for (std::size_t i = 0; i < observed.size(); ++i)
    bins.emplace_back(static_cast<double>(observed[i]), expected[i] * total);
  while (bins.size() > 1 && bins.back().second < min_expected) {
    const auto last = bins.back();
    bins.pop_back();
    bins.back().first += last.first;
    bins.back().second += last.second;
  }
  if (bins.size() < 2) throw DomainError("chi-square needs at least two bins");
  double stat = 0.0;
  for (const auto& [o, e] : bins) stat += (o - e) * (o - e) / e;
  const std::size_t dof = bins.size() - 1;
  boost::math::chi_squared dist(static_cast<double>(dof));
  return {stat, dof, boost::math::cdf(boost::math::complement(dist, stat))};
}

}  // namespace lamplighter::stats
