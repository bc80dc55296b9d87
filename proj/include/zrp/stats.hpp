#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "zrp/common.hpp"

namespace zrp {

struct Interval {
  double lo, hi;
};

/// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.96) {
  if (trials <= 0) return {0.0, 1.0};
  const double p = static_cast<double>(successes) / trials;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / trials;
  const double center = (p + z2 / (2.0 * trials)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

struct KsResult {
  double statistic;
  double p_value;
};

/// One-sample Kolmogorov-Smirnov test against Exp(rate), asymptotic p-value
/// with the Stephens small-sample correction.
inline KsResult ks_exponential(std::vector<double> samples, double rate) {
  const auto n = samples.size();
  if (n == 0) return {0.0, 1.0};
  std::sort(samples.begin(), samples.end());
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double cdf = 1.0 - std::exp(-rate * samples[i]);
    d = std::max(d, std::abs(cdf - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - cdf));
  }
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k)
    p += 2.0 * (k % 2 == 1 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
  return {d, std::clamp(p, 0.0, 1.0)};
}

/// Fit v = limit + coeff * N^(-beta) to the tail of a convergent series.
/// beta comes from regressing log successive differences on log N, then
/// (limit, coeff) by least squares given beta. A fit that explains the data
/// poorly, or a nonpositive beta, is marked inconclusive rather than trusted.
struct ConvergenceFit {
  double limit = 0.0;
  double coeff = 0.0;
  double beta = 0.0;
  double rel_residual = 0.0;
  bool conclusive = false;
};

inline ConvergenceFit fit_convergence(const std::vector<double>& Ns,
                                      const std::vector<double>& values, int max_points = 6) {
  ConvergenceFit fit;
  const int m = static_cast<int>(values.size());
  if (m < 3 || Ns.size() != values.size()) {
    fit.limit = m > 0 ? values.back() : 0.0;
    return fit;
  }
  const int first = std::max(0, m - max_points);
  std::vector<double> n(Ns.begin() + first, Ns.end());
  std::vector<double> v(values.begin() + first, values.end());
  const int k = static_cast<int>(v.size());

  // successive differences must not change sign
  int sign = 0;
  for (int i = 0; i + 1 < k; ++i) {
    const double d = v[i + 1] - v[i];
    if (d == 0.0) continue;
    const int s = d > 0.0 ? 1 : -1;
    if (sign == 0) sign = s;
    if (s != sign) {
      fit.limit = v.back();
      return fit;
    }
  }
  if (sign == 0) {  // already flat
    fit.limit = v.back();
    fit.conclusive = true;
    return fit;
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i + 1 < k; ++i) {
    const double x = std::log(n[i]);
    const double y = std::log(std::abs(v[i + 1] - v[i]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const int pairs = k - 1;
  const double slope = (pairs * sxy - sx * sy) / (pairs * sxx - sx * sx);
  fit.beta = -slope;
  if (!(fit.beta > 0.02) || !(fit.beta < 20.0)) {
    fit.limit = v.back();
    return fit;
  }

  // normal equations for (limit, coeff) with basis (1, N^-beta)
  double s1 = k, sb = 0.0, sbb = 0.0, sv = 0.0, sbv = 0.0;
  for (int i = 0; i < k; ++i) {
    const double b = std::pow(n[i], -fit.beta);
    sb += b;
    sbb += b * b;
    sv += v[i];
    sbv += b * v[i];
  }
  const double det = s1 * sbb - sb * sb;
  fit.limit = (sbb * sv - sb * sbv) / det;
  fit.coeff = (s1 * sbv - sb * sv) / det;

  double rss = 0.0;
  for (int i = 0; i < k; ++i) {
    const double r = v[i] - (fit.limit + fit.coeff * std::pow(n[i], -fit.beta));
    rss += r * r;
  }
  fit.rel_residual = std::sqrt(rss / k) / std::max(1e-300, std::abs(fit.limit));
  fit.conclusive = fit.rel_residual <= 0.10;
  return fit;
}

}  // namespace zrp
