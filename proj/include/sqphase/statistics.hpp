#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sqphase/gaussian.hpp"

// Post-processing statistics: periodicity-aware variance and moments,
// chi-squared machinery for the stationary-point probabilities, the
// Bhattacharyya overlap closed forms, and the normality-test protocol
// (Anderson-Darling + Fisher combination).

namespace sqphase {

struct EstimateBatch {
  double theta_true = 0.0;
  Period period = Period::half_pi;
  std::vector<double> estimates;
  std::string fingerprint;  // config provenance
};

// ([E cos((2pi/P)(est - theta))]^-2 - 1) / (2pi/P)^2; +inf when the mean
// cosine is <= 0 (estimates scattered over the whole period)
double holevo_variance(const EstimateBatch& batch);
double holevo_variance(std::span<const double> estimates, double theta_true, double period);

// regularized lower incomplete gamma P(a, x) and its complement
double gamma_p(double a, double x);
double gamma_q(double a, double x);
double chi2_cdf(double x, double dof);
double chi2_sf(double x, double dof);

// P_SP(theta) = chi2_cdf(e^{2r} nu / sigma^2(theta), nu)
double stationary_point_prob(double theta, double r, std::size_t nu);

// (2/pi) * integral over [0, pi/2) of 1 - P_SP, composite Simpson with
// node doubling (>= 2001 nodes, relative tolerance 1e-8)
double averaged_nonstationary_prob(double r, std::size_t nu);

// [2 s s0 / (s^2 + s0^2)]^{nu/2} with s = sigma(phi), phi the effective args
double bhattacharyya_homodyne(double theta, double theta0, double povm_setting, double r,
                              std::size_t nu);

// [cosh r sqrt(1 - cos^2(theta-theta0) tanh^2 r)]^{-nu}
double bhattacharyya_heterodyne(double theta, double theta0, double r, std::size_t nu);

struct MomentReport {
  double bias = 0.0;             // circular-mean error
  double holevo_variance = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};
MomentReport moment_report(const EstimateBatch& batch);

struct AndersonDarlingResult {
  double a2 = 0.0;
  double p_value = 0.0;
};
// fully-specified normal null (case 0); p-value from the standard asymptotic
// approximation with the finite-n correction
AndersonDarlingResult anderson_darling_normal(std::span<const double> samples, double mu,
                                              double sigma2);

// Fisher's method: compare -2 sum log p against chi2 with 2k dof
double fisher_combine(std::span<const double> p_values);

}  // namespace sqphase
