#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "sqphase/gaussian.hpp"
#include "sqphase/kernels.hpp"
#include "sqphase/measurements.hpp"

// Likelihoods and maximum-likelihood estimators. The closed forms follow the
// single-batch homodyne solution and its truncated variant; multi-batch
// (adaptive) estimation maximizes the accumulated log-likelihood numerically.
// All likelihoods take the channel transmission so the same code serves the
// lossy model; transmission = 1 is the ideal case.

namespace sqphase {

struct FlatLikelihoodError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class BoundarySide { none, lower, upper };

struct EstimateResult {
  Phase estimate;
  bool stationary = false;     // global max attained at an interior stationary point
  std::size_t discarded = 0;   // outcomes removed by truncation
  double loglik_at_estimate = 0.0;
  BoundarySide boundary = BoundarySide::none;
};

// sum_i [ -log(2 pi V)/2 - x_i^2/(2V) ], V = T sigma^2(wrap(theta + theta_opt
// - povm_setting, pi/2)) + (1-T); pi/2-periodic in theta
double loglik_homodyne(const HomodyneBatch& sample, double r, double povm_setting,
                       double theta, double transmission = 1.0);
double loglik_homodyne_stats(double count, double sum_sq, double r, double povm_setting,
                             double theta, double transmission = 1.0);

EstimateResult mle_homodyne_closed_form(const HomodyneBatch& sample, double r,
                                        double transmission = 1.0);
// stats-level closed form (povm_setting passed explicitly)
EstimateResult mle_homodyne_closed_form_stats(double count, double sum_sq, double r,
                                              double povm_setting, double transmission = 1.0);

// removes largest-magnitude outcomes until the closed form is real-valued
EstimateResult mle_homodyne_truncated(const HomodyneBatch& sample, double r,
                                      double transmission = 1.0);

// -n log(pi cosh r) - sum |a|^2 - tanh r * Re[e^{2 i theta} sum a^2] at T = 1;
// under loss the axis variances and coefficients generalize accordingly.
// pi-periodic in theta.
double loglik_heterodyne(const HeterodyneBatch& sample, double r, double theta,
                         double transmission = 1.0);

// wrap((pi - arg(sum a^2))/2, pi); throws FlatLikelihoodError when sum a^2 = 0
EstimateResult mle_heterodyne_closed_form(const HeterodyneBatch& sample, double r,
                                          double transmission = 1.0);

struct GridSearchPolicy {
  std::size_t grid_points = 720;
  double refine_width = 1e-10;
};

// coarse grid over [lo, hi) then golden-section refinement; the returned
// log-likelihood is the best value seen. loglik must be evaluable on
// [lo - h, hi + h], h the grid spacing (periodic likelihoods always are).
EstimateResult mle_numeric(const std::function<double(double)>& loglik, double lo, double hi,
                           Period period, const GridSearchPolicy& policy = {});

// Accumulated (joint) log-likelihood of heterodyne + homodyne batches as a
// function of theta, with a kernel-backed grid sweep for the hot path.
class AccumulatedLikelihood {
 public:
  AccumulatedLikelihood(double r, double transmission);

  void add_homodyne(double count, double sum_sq, double povm_setting);
  void set_heterodyne(double count, const kernels::ComplexSums& sums);
  bool has_heterodyne() const { return has_het_; }
  std::size_t homodyne_batches() const { return batches_.size(); }

  double eval(double theta) const;
  // acc[g] += loglik(theta0 + g*dtheta) for g = 0..n-1
  void accumulate_grid(double theta0, double dtheta, double* acc, std::size_t n) const;
  // incremental variants for the adaptive loop, which keeps one grid buffer
  // alive and adds each term exactly once
  void accumulate_batch_grid(std::size_t batch_index, double theta0, double dtheta,
                             double* acc, std::size_t n) const;
  void accumulate_heterodyne_grid(double theta0, double dtheta, double* acc,
                                  std::size_t n) const;

 private:
  struct Batch {
    double count;
    double sum_sq;
    double delta;  // theta_opt - povm_setting
  };
  double r_;
  double transmission_;
  double theta_opt_;
  double a_coef_;
  double b_coef_;
  std::vector<Batch> batches_;
  bool has_het_ = false;
  double het_const_ = 0.0;
  double het_amp_ = 0.0;
  double het_psi_ = 0.0;
};

// grid + golden-section maximization of an accumulated likelihood over one
// period; scratch is reused between calls to avoid per-call allocation
EstimateResult maximize_accumulated(const AccumulatedLikelihood& lik, Period period,
                                    const GridSearchPolicy& policy,
                                    std::vector<double>& scratch);

// same search, but over a caller-maintained grid of already-accumulated
// log-likelihood values on theta_g = g * period/grid.size()
EstimateResult maximize_from_grid(const AccumulatedLikelihood& lik, Period period,
                                  const std::vector<double>& grid,
                                  const GridSearchPolicy& policy);

}  // namespace sqphase
