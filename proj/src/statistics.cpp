#include "sqphase/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sqphase/fisher.hpp"
#include "sqphase/measurements.hpp"

namespace sqphase {

namespace {

double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 100000; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) {
      return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
  }
  throw NumericalError("incomplete gamma series did not converge");
}

double gamma_q_contfrac(double a, double x) {
  const double fpmin = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / fpmin;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 100000; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < fpmin) d = fpmin;
    c = b + an / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) <= 1e-16) {
      return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    }
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

// asymptotic CDF of the Anderson-Darling statistic (case 0) and its
// finite-sample correction, after Marsaglia & Marsaglia (2004)
double ad_inf(double z) {
  if (z <= 0.0) return 0.0;
  if (z < 2.0) {
    return std::exp(-1.2337141 / z) / std::sqrt(z) *
           (2.00012 +
            (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z);
  }
  return std::exp(
      -std::exp(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z));
}

double ad_errfix(double n, double x) {
  if (x > 0.8) {
    return (-130.2137 + (745.2337 - (1705.091 - (1950.646 - (1116.360 - 255.7844 * x) * x) * x) * x) * x) /
           n;
  }
  const double c = 0.01265 + 0.1757 / n;
  if (x < c) {
    double t = x / c;
    t = std::sqrt(t) * (1.0 - t) * (49.0 * t - 102.0);
    return t * (0.0037 / (n * n) + 0.00078 / n + 0.00006) / n;
  }
  double t = (x - c) / (0.8 - c);
  t = -0.00022633 + (6.54034 - (14.6538 - (14.458 - (8.259 - 1.91864 * t) * t) * t) * t) * t;
  return t * (0.04213 + 0.01365 / n) / n;
}

}  // namespace

double gamma_p(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_p requires a > 0");
  if (x < 0.0) throw std::invalid_argument("gamma_p requires x >= 0");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return gamma_p_series(a, x);
  return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("gamma_q requires a > 0");
  if (x < 0.0) throw std::invalid_argument("gamma_q requires x >= 0");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_contfrac(a, x);
}

double chi2_cdf(double x, double dof) {
  if (!(dof >= 1.0)) throw std::invalid_argument("chi2_cdf requires dof >= 1");
  if (x < 0.0) throw std::invalid_argument("chi2_cdf requires x >= 0");
  return gamma_p(dof / 2.0, x / 2.0);
}

double chi2_sf(double x, double dof) {
  if (!(dof >= 1.0)) throw std::invalid_argument("chi2_sf requires dof >= 1");
  if (x < 0.0) throw std::invalid_argument("chi2_sf requires x >= 0");
  return gamma_q(dof / 2.0, x / 2.0);
}

double holevo_variance(std::span<const double> estimates, double theta_true, double period) {
  if (estimates.empty()) throw std::invalid_argument("empty estimate batch");
  const double w = 2.0 * kPi / period;
  double acc = 0.0;
  for (const double est : estimates) acc += std::cos(w * (est - theta_true));
  const double mean_cos = acc / static_cast<double>(estimates.size());
  if (mean_cos <= 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 / (mean_cos * mean_cos) - 1.0) / (w * w);
}

double holevo_variance(const EstimateBatch& batch) {
  return holevo_variance(batch.estimates, batch.theta_true, period_value(batch.period));
}

double stationary_point_prob(double theta, double r, std::size_t nu) {
  if (nu == 0) throw std::invalid_argument("nu must be >= 1");
  const double v = quadrature_variance(r, theta);
  const double dof = static_cast<double>(nu);
  return chi2_cdf(std::exp(2.0 * r) * dof / v, dof);
}

double averaged_nonstationary_prob(double r, std::size_t nu) {
  if (nu == 0) throw std::invalid_argument("nu must be >= 1");
  auto f = [r, nu](double u) { return 1.0 - stationary_point_prob(u, r, nu); };
  auto simpson = [&f](std::size_t nodes) {
    // nodes odd, panels = nodes - 1
    const double h = kHalfPi / static_cast<double>(nodes - 1);
    double acc = f(0.0) + f(kHalfPi);
    for (std::size_t i = 1; i + 1 < nodes; ++i) {
      acc += f(static_cast<double>(i) * h) * ((i % 2 == 1) ? 4.0 : 2.0);
    }
    return acc * h / 3.0;
  };
  double coarse = simpson(2001);
  for (std::size_t nodes = 4001; nodes <= 64001; nodes = 2 * nodes - 1) {
    const double fine = simpson(nodes);
    if (std::abs(fine - coarse) <= 1e-8 * std::max(std::abs(fine), 1e-30)) {
      return fine * 2.0 / kPi;
    }
    coarse = fine;
  }
  throw NumericalError("averaged non-stationary probability quadrature did not converge");
}

double bhattacharyya_homodyne(double theta, double theta0, double povm_setting, double r,
                              std::size_t nu) {
  if (nu == 0) throw std::invalid_argument("nu must be >= 1");
  const double s2 = quadrature_variance(r, effective_argument(theta, povm_setting, r).value);
  const double s02 = quadrature_variance(r, effective_argument(theta0, povm_setting, r).value);
  const double ratio = 2.0 * std::sqrt(s2) * std::sqrt(s02) / (s2 + s02);
  return std::pow(ratio, static_cast<double>(nu) / 2.0);
}

double bhattacharyya_heterodyne(double theta, double theta0, double r, std::size_t nu) {
  if (nu == 0) throw std::invalid_argument("nu must be >= 1");
  if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  const double cd = std::cos(theta - theta0);
  const double th = std::tanh(r);
  const double factor = std::cosh(r) * std::sqrt(1.0 - cd * cd * th * th);
  return std::pow(factor, -static_cast<double>(nu));
}

MomentReport moment_report(const EstimateBatch& batch) {
  const std::size_t n = batch.estimates.size();
  if (n < 4) throw std::invalid_argument("moment_report requires at least 4 estimates");
  const double p = period_value(batch.period);
  const double w = 2.0 * kPi / p;

  std::vector<double> err(n);
  double sum_sin = 0.0, sum_cos = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double e = wrap_phase_value(batch.estimates[i] - batch.theta_true, p);
    if (e > p / 2.0) e -= p;
    err[i] = e;
    sum_sin += std::sin(w * e);
    sum_cos += std::cos(w * e);
  }
  MomentReport rep;
  rep.bias = std::atan2(sum_sin, sum_cos) / w;
  rep.holevo_variance = holevo_variance(batch);

  double mean = 0.0;
  for (const double e : err) mean += e;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (const double e : err) {
    const double d = e - mean;
    const double d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m3 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  if (m2 <= 0.0) throw std::invalid_argument("degenerate estimate batch");
  rep.skewness = m3 / std::pow(m2, 1.5);
  rep.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  return rep;
}

AndersonDarlingResult anderson_darling_normal(std::span<const double> samples, double mu,
                                              double sigma2) {
  const std::size_t n = samples.size();
  if (n < 8) throw std::invalid_argument("anderson_darling_normal requires >= 8 samples");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("degenerate null variance");
  const double sigma = std::sqrt(sigma2);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = (samples[i] - mu) / sigma;
    u[i] = 0.5 * std::erfc(-z / std::numbers::sqrt2);
  }
  std::sort(u.begin(), u.end());
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ui = std::clamp(u[i], 1e-300, 1.0 - 1e-16);
    const double uj = std::clamp(u[n - 1 - i], 1e-300, 1.0 - 1e-16);
    acc += (2.0 * static_cast<double>(i) + 1.0) * (std::log(ui) + std::log1p(-uj));
  }
  AndersonDarlingResult res;
  res.a2 = -static_cast<double>(n) - acc / static_cast<double>(n);
  const double cdf_inf = ad_inf(res.a2);
  const double cdf = std::clamp(cdf_inf + ad_errfix(static_cast<double>(n), cdf_inf), 0.0, 1.0);
  res.p_value = 1.0 - cdf;
  return res;
}

double fisher_combine(std::span<const double> p_values) {
  if (p_values.empty()) throw std::invalid_argument("fisher_combine requires at least one p-value");
  double x = 0.0;
  for (const double p : p_values) {
    if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("p-values must lie in (0, 1]");
    x += std::log(p);
  }
  return chi2_sf(-2.0 * x, 2.0 * static_cast<double>(p_values.size()));
}

}  // namespace sqphase
