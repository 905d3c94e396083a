#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sqphase/gaussian.hpp"

// Exact samplers for homodyne and heterodyne outcomes. Outcome sequences are
// pure functions of (stream key, arguments); streams derived with distinct
// salts are statistically independent.

namespace sqphase {

struct RngStream {
  std::uint64_t key = 0;

  static RngStream root(std::uint64_t seed);
  RngStream child(std::uint64_t salt) const;
  double uniform01(std::uint64_t counter) const;  // [0, 1)
  // i.i.d. standard normals at stream positions counter0, counter0+1, ...
  void normals(std::uint64_t counter0, std::span<double> out) const;
};

struct HomodyneBatch {
  std::vector<double> outcomes;
  Phase povm_setting;   // nominal setting the estimator is told about
  Phase effective_arg;  // actual generating argument; test oracles only
  double sum_squares() const;
};

struct HeterodyneBatch {
  std::vector<double> re;
  std::vector<double> im;
  std::size_t size() const { return re.size(); }
};

// wrap(theta + theta_opt(r) - povm_setting, pi/2)
Phase effective_argument(double theta_true, double povm_setting, double r);

// Outcomes ~ Normal(0, V), V = T sigma^2_{r_j}(phi) + (1-T) with the nominal
// effective argument phi (the apparatus shift uses the nominal r even when
// sigma_r > 0 draws a fresh r_j per copy); sigma_lo > 0 adds one per-batch
// Normal(0, sigma_lo^2) jitter to the setting before phi is formed.
// Substreams: child(0) outcomes, child(1) per-copy squeezing draws,
// child(2) LO jitter.
HomodyneBatch sample_homodyne(const SqueezedProbe& probe, double theta_true,
                              double povm_setting, std::size_t n, const RngStream& stream);

// Bivariate Gaussian with principal axes rotated by theta and variances
// (T e^{-+2r} + (2-T))/4; reduces to the ideal heterodyne distribution at
// T = 1 and to isotropic vacuum (variance 1/2) at T = 0.
// Substreams: child(0) outcome pairs, child(1) per-copy squeezing draws.
HeterodyneBatch sample_heterodyne(const SqueezedProbe& probe, double theta_true,
                                  std::size_t n, const RngStream& stream);

// principal-axis variances of the heterodyne outcome distribution
void heterodyne_axis_variances(double r, double transmission, double& v_minus,
                               double& v_plus);

}  // namespace sqphase
