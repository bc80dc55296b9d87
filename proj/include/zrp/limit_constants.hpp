#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "zrp/common.hpp"
#include "zrp/model.hpp"

namespace zrp {

/// Single-site partition function: sum_{j>=0} fugacity^j / a(j).
/// At fugacity 1 the series is 1 + zeta(alpha); the slowly decaying tail is
/// summed with an Euler-Maclaurin closure whose remainder is bounded by the
/// first omitted term (f completely monotone), kept below 1e-13.
inline double site_partition_function(double fugacity, double alpha) {
  if (!(alpha > 1.0)) throw Error("alpha must exceed 1");
  if (!(fugacity > 0.0) || fugacity > 1.0) throw Error("fugacity must lie in (0,1]");

  if (fugacity == 1.0) {
    const int cutoff = 20000;
    KahanSum s;
    s.add(1.0);  // j = 0 term, a(0) = 1
    for (int j = 1; j <= cutoff; ++j) s.add(std::pow(static_cast<double>(j), -alpha));
    const double a = cutoff + 1;
    double tail = std::pow(a, 1.0 - alpha) / (alpha - 1.0) + 0.5 * std::pow(a, -alpha) +
                  alpha * std::pow(a, -alpha - 1.0) / 12.0 -
                  alpha * (alpha + 1.0) * (alpha + 2.0) * std::pow(a, -alpha - 3.0) / 720.0;
    double remainder = 2.0 * alpha * (alpha + 1.0) * (alpha + 2.0) * (alpha + 3.0) *
                       (alpha + 4.0) * std::pow(a, -alpha - 5.0) / 30240.0;
    if (remainder > 1e-13) throw Error("series tail bound not met");
    return s.value() + tail;
  }

  KahanSum s;
  s.add(1.0);
  double power = 1.0;
  for (long j = 1; j < 200'000'000L; ++j) {
    power *= fugacity;
    double term = power * std::pow(static_cast<double>(j), -alpha);
    s.add(term);
    // geometric tail bound: sum_{i>j} fug^i i^-alpha <= fug^{j+1} (j+1)^-alpha / (1-fug)
    double bound = power * fugacity * std::pow(static_cast<double>(j + 1), -alpha) /
                   (1.0 - fugacity);
    if (bound < 1e-14) return s.value();
  }
  throw Error("site partition series did not converge; fugacity too close to 1");
}

namespace detail {

// Gauss-Kronrod 7-15 nodes on [-1,1] (positive half; symmetric).
struct GK15 {
  static constexpr double xk[8] = {0.0,
                                   0.2077849550078985,
                                   0.4058451513773972,
                                   0.5860872354676911,
                                   0.7415311855993945,
                                   0.8648644233597691,
                                   0.9491079123427585,
                                   0.9914553711208126};
  static constexpr double wk[8] = {0.2094821410847278, 0.2044329400752989,
                                   0.1903505780647854, 0.1690047266392679,
                                   0.1406532597155259, 0.1047900103222502,
                                   0.0630920926299786, 0.0229353220105292};
  static constexpr double wg[4] = {0.4179591836734694, 0.3818300505051189,
                                   0.2797053914892767, 0.1294849661688697};
};

template <typename F>
void gk15(const F& f, double a, double b, double& kronrod, double& err) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fk[15];
  fk[7] = f(c);
  for (int i = 1; i < 8; ++i) {
    fk[7 - i] = f(c - h * GK15::xk[i]);
    fk[7 + i] = f(c + h * GK15::xk[i]);
  }
  double resk = GK15::wk[0] * fk[7];
  for (int i = 1; i < 8; ++i) resk += GK15::wk[i] * (fk[7 - i] + fk[7 + i]);
  double resg = GK15::wg[0] * fk[7];
  for (int i = 1; i < 4; ++i) resg += GK15::wg[i] * (fk[7 - 2 * i] + fk[7 + 2 * i]);
  kronrod = resk * h;
  err = std::abs((resk - resg) * h);
}

template <typename F>
double adaptive_quadrature(const F& f, double a, double b, double abs_tol, int depth = 0) {
  double val, err;
  gk15(f, a, b, val, err);
  if (err <= abs_tol || depth >= 48) return val;
  double m = 0.5 * (a + b);
  return adaptive_quadrature(f, a, m, 0.5 * abs_tol, depth + 1) +
         adaptive_quadrature(f, m, b, 0.5 * abs_tol, depth + 1);
}

}  // namespace detail

/// int_0^1 u^alpha (1-u)^alpha du by adaptive quadrature (absolute 1e-13).
inline double profile_integral(double alpha) {
  auto f = [alpha](double u) { return std::pow(u, alpha) * std::pow(1.0 - u, alpha); };
  return detail::adaptive_quadrature(f, 0.0, 1.0, 1e-13);
}

/// Same integral through the Beta function, as an independent route.
inline double profile_integral_closed_form(double alpha) {
  return std::exp(2.0 * std::lgamma(alpha + 1.0) - std::lgamma(2.0 * alpha + 2.0));
}

struct LimitConstants {
  Eigen::VectorXd site_pf;    // Gamma_z per site
  double pf_at_max;           // value shared by all maximal sites
  double profile;             // I_alpha
  double z_limit;             // limit of the finite-N normalizers
};

inline LimitConstants limit_constants(const ZrpModel& model) {
  const int n = model.num_sites();
  LimitConstants lc;
  lc.site_pf.resize(n);
  for (int x = 0; x < n; ++x)
    lc.site_pf[x] = site_partition_function(model.star.relative_measure[x], model.alpha);
  lc.pf_at_max = site_partition_function(1.0, model.alpha);
  lc.profile = profile_integral(model.alpha);

  double prod_rest = 1.0;
  for (int x = 0; x < n; ++x)
    if (!model.star.is_max_site(x)) prod_rest *= lc.site_pf[x];
  const double kstar = model.star.num_max_sites();
  lc.z_limit = kstar * std::pow(lc.pf_at_max, kstar - 1.0) * prod_rest;
  return lc;
}

/// Limiting rescaled capacity between well unions labelled by S1 inside the
/// maximal sites, against the remaining maximal sites.
inline double capacity_scaling_limit(const ZrpModel& model, const LimitConstants& lc,
                                     const std::vector<int>& s1_star) {
  std::vector<char> in(model.num_sites(), 0);
  for (int x : s1_star) in[x] = 1;
  double cap_sum = 0.0;
  for (int x : s1_star)
    for (int y : model.star.max_sites)
      if (!in[y]) cap_sum += capacity_between(model.graph, x, y);
  const double kstar = model.star.num_max_sites();
  return cap_sum / (model.star.max_measure * kstar * lc.pf_at_max * lc.profile);
}

/// Limiting jump rate of the condensate from x to y on the rescaled clock.
inline double tunneling_rate_limit(const ZrpModel& model, const LimitConstants& lc, int x,
                                   int y) {
  return capacity_between(model.graph, x, y) /
         (model.star.max_measure * lc.pf_at_max * lc.profile);
}

}  // namespace zrp
