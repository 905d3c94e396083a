#include "sqphase/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "sqphase/fisher.hpp"
#include "sqphase/vmath.hpp"

namespace sqphase {

namespace {

constexpr double kGoldenRatio = 0.6180339887498949;  // (sqrt 5 - 1)/2

double require_finite_ll(double v) {
  if (!std::isfinite(v)) throw NumericalError("non-finite log-likelihood");
  return v;
}

// shared grid + golden-section search core; returns (argmax, max)
template <typename Eval>
std::pair<double, double> search_max(const Eval& eval, double lo, double hi,
                                     const std::vector<double>& grid_vals, double grid_step,
                                     double refine_width) {
  std::size_t best_g = 0;
  for (std::size_t g = 1; g < grid_vals.size(); ++g) {
    if (grid_vals[g] > grid_vals[best_g]) best_g = g;
  }
  double best_x = lo + static_cast<double>(best_g) * grid_step;
  double best_f = grid_vals[best_g];

  double a = best_x - grid_step;
  double b = best_x + grid_step;
  double c = b - kGoldenRatio * (b - a);
  double d = a + kGoldenRatio * (b - a);
  double fc = require_finite_ll(eval(c));
  double fd = require_finite_ll(eval(d));
  while (b - a > refine_width) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGoldenRatio * (b - a);
      fc = require_finite_ll(eval(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGoldenRatio * (b - a);
      fd = require_finite_ll(eval(d));
    }
    if (fc > best_f) {
      best_f = fc;
      best_x = c;
    }
    if (fd > best_f) {
      best_f = fd;
      best_x = d;
    }
  }
  (void)hi;
  return {best_x, best_f};
}

struct ClosedFormInputs {
  double mean_eff;  // loss-corrected mean of squares
  double count;
  double sum_sq;
};

EstimateResult closed_form_core(const ClosedFormInputs& in, double r, double povm_setting,
                                double transmission) {
  const double e2r = std::exp(2.0 * r);
  const double em2r = std::exp(-2.0 * r);
  const double topt = optimal_phase_value(r);
  EstimateResult res;
  double theta_star = 0.0;
  if (in.mean_eff > e2r) {
    theta_star = kHalfPi;
    res.stationary = false;
    res.boundary = BoundarySide::upper;
  } else if (in.mean_eff < em2r) {
    theta_star = 0.0;
    res.stationary = false;
    res.boundary = BoundarySide::lower;
  } else {
    const double arg = std::exp(r) * std::sqrt(e2r - in.mean_eff) / std::sqrt(e2r * e2r - 1.0);
    theta_star = std::acos(std::clamp(arg, 0.0, 1.0));
    res.stationary = true;
    res.boundary = BoundarySide::none;
  }
  res.estimate = wrap_phase(theta_star - topt + povm_setting, Period::half_pi);
  res.loglik_at_estimate = loglik_homodyne_stats(in.count, in.sum_sq, r, povm_setting,
                                                 res.estimate.value, transmission);
  return res;
}

}  // namespace

double loglik_homodyne_stats(double count, double sum_sq, double r, double povm_setting,
                             double theta, double transmission) {
  const double phi = effective_argument(theta, povm_setting, r).value;
  const double v = lossy_quadrature_variance(r, phi, transmission);
  return -0.5 * (count * std::log(2.0 * kPi * v) + sum_sq / v);
}

double loglik_homodyne(const HomodyneBatch& sample, double r, double povm_setting,
                       double theta, double transmission) {
  if (sample.outcomes.empty()) throw std::invalid_argument("empty homodyne sample");
  return loglik_homodyne_stats(static_cast<double>(sample.outcomes.size()),
                               sample.sum_squares(), r, povm_setting, theta, transmission);
}

EstimateResult mle_homodyne_closed_form_stats(double count, double sum_sq, double r,
                                              double povm_setting, double transmission) {
  if (!(r > 0.0)) throw std::invalid_argument("closed-form MLE requires r > 0");
  if (!(count >= 1.0)) throw std::invalid_argument("empty homodyne sample");
  const double mean = sum_sq / count;
  const double mean_eff = (mean - (1.0 - transmission)) / transmission;
  return closed_form_core({mean_eff, count, sum_sq}, r, povm_setting, transmission);
}

EstimateResult mle_homodyne_closed_form(const HomodyneBatch& sample, double r,
                                        double transmission) {
  return mle_homodyne_closed_form_stats(static_cast<double>(sample.outcomes.size()),
                                        sample.sum_squares(), r, sample.povm_setting.value,
                                        transmission);
}

EstimateResult mle_homodyne_truncated(const HomodyneBatch& sample, double r,
                                      double transmission) {
  if (!(r > 0.0)) throw std::invalid_argument("truncated MLE requires r > 0");
  const std::size_t n = sample.outcomes.size();
  if (n == 0) throw std::invalid_argument("empty homodyne sample");
  const double full_sum = sample.sum_squares();
  const double thresh = transmission * std::exp(2.0 * r) + (1.0 - transmission);
  if (full_sum <= thresh * static_cast<double>(n)) {
    return mle_homodyne_closed_form(sample, r, transmission);
  }

  // keep the s smallest squares for the largest s whose mean stays below the
  // threshold; equivalent to removing the highest values in descending order
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = sample.outcomes[i] * sample.outcomes[i];
  std::sort(sq.begin(), sq.end());
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + sq[i];
  std::size_t keep = 0;
  for (std::size_t s = n; s >= 1; --s) {
    if (prefix[s] <= thresh * static_cast<double>(s)) {
      keep = s;
      break;
    }
  }
  if (keep == 0) {
    // every single outcome exceeds the threshold on its own
    EstimateResult res;
    const double topt = optimal_phase_value(r);
    res.estimate = wrap_phase(kHalfPi - topt + sample.povm_setting.value, Period::half_pi);
    res.stationary = false;
    res.boundary = BoundarySide::upper;
    res.discarded = n;
    res.loglik_at_estimate = loglik_homodyne_stats(
        static_cast<double>(n), full_sum, r, sample.povm_setting.value, res.estimate.value,
        transmission);
    return res;
  }
  EstimateResult res = mle_homodyne_closed_form_stats(
      static_cast<double>(keep), prefix[keep], r, sample.povm_setting.value, transmission);
  res.discarded = n - keep;
  return res;
}

double loglik_heterodyne(const HeterodyneBatch& sample, double r, double theta,
                         double transmission) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("empty heterodyne sample");
  const kernels::ComplexSums sums =
      kernels::active().complex_sums(sample.re.data(), sample.im.data(), n);
  double vmn = 0.0, vpl = 0.0;
  heterodyne_axis_variances(r, transmission, vmn, vpl);
  const double coef_abs = 0.25 / vmn + 0.25 / vpl;
  const double coef_re = 0.25 / vmn - 0.25 / vpl;
  const double norm = -static_cast<double>(n) * std::log(2.0 * kPi * std::sqrt(vmn * vpl));
  const double re_rot = sums.re2 * std::cos(2.0 * theta) - sums.im2 * std::sin(2.0 * theta);
  return norm - coef_abs * sums.abs2 - coef_re * re_rot;
}

EstimateResult mle_heterodyne_closed_form(const HeterodyneBatch& sample, double r,
                                          double transmission) {
  const std::size_t n = sample.size();
  if (n == 0) throw std::invalid_argument("empty heterodyne sample");
  const kernels::ComplexSums sums =
      kernels::active().complex_sums(sample.re.data(), sample.im.data(), n);
  if (sums.re2 == 0.0 && sums.im2 == 0.0) {
    throw FlatLikelihoodError("sum of squared heterodyne outcomes is zero");
  }
  const double arg = std::atan2(sums.im2, sums.re2);
  EstimateResult res;
  res.estimate = wrap_phase((kPi - arg) / 2.0, Period::pi);
  res.stationary = true;
  res.boundary = BoundarySide::none;
  res.loglik_at_estimate = loglik_heterodyne(sample, r, res.estimate.value, transmission);
  return res;
}

EstimateResult mle_numeric(const std::function<double(double)>& loglik, double lo, double hi,
                           Period period, const GridSearchPolicy& policy) {
  if (!(hi > lo)) throw std::invalid_argument("mle_numeric requires hi > lo");
  if (policy.grid_points < 4) throw std::invalid_argument("grid too coarse");
  const double h = (hi - lo) / static_cast<double>(policy.grid_points);
  std::vector<double> vals(policy.grid_points);
  for (std::size_t g = 0; g < policy.grid_points; ++g) {
    vals[g] = require_finite_ll(loglik(lo + static_cast<double>(g) * h));
  }
  auto [x, f] = search_max(loglik, lo, hi, vals, h, policy.refine_width);
  EstimateResult res;
  res.estimate = Phase{wrap_phase_value(x - lo, hi - lo) + lo, period};
  res.stationary = true;
  res.loglik_at_estimate = f;
  return res;
}

AccumulatedLikelihood::AccumulatedLikelihood(double r, double transmission)
    : r_(r), transmission_(transmission) {
  if (!(r > 0.0)) throw std::invalid_argument("accumulated likelihood requires r > 0");
  theta_opt_ = optimal_phase_value(r);
  a_coef_ = transmission * std::sinh(2.0 * r);
  b_coef_ = transmission * std::cosh(2.0 * r) + (1.0 - transmission);
}

void AccumulatedLikelihood::add_homodyne(double count, double sum_sq, double povm_setting) {
  batches_.push_back(Batch{count, sum_sq, theta_opt_ - povm_setting});
}

void AccumulatedLikelihood::set_heterodyne(double count, const kernels::ComplexSums& sums) {
  double vmn = 0.0, vpl = 0.0;
  heterodyne_axis_variances(r_, transmission_, vmn, vpl);
  const double coef_abs = 0.25 / vmn + 0.25 / vpl;
  const double coef_re = 0.25 / vmn - 0.25 / vpl;
  const double mag = std::hypot(sums.re2, sums.im2);
  het_psi_ = (mag > 0.0) ? std::atan2(sums.im2, sums.re2) : 0.0;
  het_amp_ = -coef_re * mag;
  het_const_ = -count * std::log(2.0 * kPi * std::sqrt(vmn * vpl)) - coef_abs * sums.abs2;
  has_het_ = true;
}

double AccumulatedLikelihood::eval(double theta) const {
  double acc = 0.0;
  for (const Batch& b : batches_) {
    const double raw = 2.0 * (theta + b.delta);
    acc = std::fma(-0.5, vm::homodyne_grid_term(raw, a_coef_, b_coef_, b.count, b.sum_sq), acc);
  }
  if (has_het_) {
    double s = 0.0, c = 0.0;
    vm::sincos(std::fma(2.0, theta, het_psi_), s, c);
    acc += std::fma(het_amp_, c, het_const_);
  }
  return acc;
}

void AccumulatedLikelihood::accumulate_batch_grid(std::size_t batch_index, double theta0,
                                                  double dtheta, double* acc,
                                                  std::size_t n) const {
  const Batch& b = batches_.at(batch_index);
  kernels::HomodyneGridArgs args;
  args.base = 2.0 * (theta0 + b.delta);
  args.step = 2.0 * dtheta;
  args.a_coef = a_coef_;
  args.b_coef = b_coef_;
  args.count = b.count;
  args.sum_sq = b.sum_sq;
  kernels::active().homodyne_grid(args, acc, n);
}

void AccumulatedLikelihood::accumulate_heterodyne_grid(double theta0, double dtheta,
                                                       double* acc, std::size_t n) const {
  if (!has_het_) return;
  kernels::active().cos_accum(std::fma(2.0, theta0, het_psi_), 2.0 * dtheta, het_amp_,
                              het_const_, acc, n);
}

void AccumulatedLikelihood::accumulate_grid(double theta0, double dtheta, double* acc,
                                            std::size_t n) const {
  for (std::size_t i = 0; i < batches_.size(); ++i) {
    accumulate_batch_grid(i, theta0, dtheta, acc, n);
  }
  accumulate_heterodyne_grid(theta0, dtheta, acc, n);
}

EstimateResult maximize_from_grid(const AccumulatedLikelihood& lik, Period period,
                                  const std::vector<double>& grid,
                                  const GridSearchPolicy& policy) {
  const double p = period_value(period);
  const double h = p / static_cast<double>(grid.size());
  auto [x, f] = search_max([&lik](double th) { return lik.eval(th); }, 0.0, p, grid, h,
                           policy.refine_width);
  EstimateResult res;
  res.estimate = wrap_phase(x, period);
  res.stationary = true;
  res.loglik_at_estimate = f;
  return res;
}

EstimateResult maximize_accumulated(const AccumulatedLikelihood& lik, Period period,
                                    const GridSearchPolicy& policy,
                                    std::vector<double>& scratch) {
  const double p = period_value(period);
  const double h = p / static_cast<double>(policy.grid_points);
  scratch.assign(policy.grid_points, 0.0);
  lik.accumulate_grid(0.0, h, scratch.data(), scratch.size());
  return maximize_from_grid(lik, period, scratch, policy);
}

}  // namespace sqphase
