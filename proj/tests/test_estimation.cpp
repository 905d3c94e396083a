#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sqphase/estimation.hpp"
#include "sqphase/fisher.hpp"
#include "sqphase/statistics.hpp"

using namespace sqphase;

namespace {

HomodyneBatch make_batch(std::vector<double> xs, double setting) {
  HomodyneBatch b;
  b.outcomes = std::move(xs);
  b.povm_setting = wrap_phase(setting, Period::half_pi);
  b.effective_arg = Phase{0.0, Period::half_pi};
  return b;
}

HeterodyneBatch make_het(std::vector<double> re, std::vector<double> im) {
  HeterodyneBatch b;
  b.re = std::move(re);
  b.im = std::move(im);
  return b;
}

}  // namespace

TEST_CASE("homodyne log-likelihood value and periodicity") {
  // single outcome x = 0 with unit model variance: -log(2 pi)/2.
  // sigma^2(phi) = 1 at phi = 0.352513421777619 (independent inversion).
  const double phi_unit = 0.352513421777619;
  const double topt = optimal_phase_value(1.0);
  const HomodyneBatch b = make_batch({0.0}, 0.0);
  const double theta = phi_unit - topt;
  CHECK(loglik_homodyne(b, 1.0, 0.0, theta) ==
        doctest::Approx(-0.5 * std::log(2.0 * kPi)).epsilon(1e-12));
  const HomodyneBatch c = make_batch({0.7, -0.2, 1.4}, 0.3);
  for (double th = -0.4; th < 2.0; th += 0.23) {
    CHECK(loglik_homodyne(c, 1.0, 0.3, th) ==
          doctest::Approx(loglik_homodyne(c, 1.0, 0.3, th + kHalfPi)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(loglik_homodyne(make_batch({}, 0.0), 1.0, 0.0, 0.1),
                  std::invalid_argument);
}

TEST_CASE("closed-form homodyne MLE cases") {
  const double topt = optimal_phase_value(1.0);
  // mean of squares right at the lower arccos-domain edge: theta* = 0
  {
    const double x = std::exp(-1.0);  // x^2 = e^{-2r}
    const EstimateResult res = mle_homodyne_closed_form(make_batch({x}, 0.8), 1.0);
    CHECK(res.stationary);
    CHECK(res.boundary == BoundarySide::none);
    // a 1-ulp error in the mean of squares amplifies to ~sqrt(ulp) in the
    // arccos at the domain edge
    CHECK(res.estimate.value ==
          doctest::Approx(wrap_phase_value(0.8 - topt, kHalfPi)).epsilon(1e-6));
  }
  // upper edge: theta* = pi/2
  {
    const double x = std::exp(1.0);
    const EstimateResult res = mle_homodyne_closed_form(make_batch({x}, 0.8), 1.0);
    CHECK(res.stationary);
    CHECK(res.estimate.value ==
          doctest::Approx(wrap_phase_value(kHalfPi - topt + 0.8, kHalfPi)).epsilon(1e-6));
  }
  // interior: mean of squares 1 -> theta* = 0.352513421777619
  {
    const EstimateResult res = mle_homodyne_closed_form(make_batch({1.0}, 0.0), 1.0);
    CHECK(res.stationary);
    CHECK(res.discarded == 0);
    CHECK(wrap_phase_value(res.estimate.value + topt, kHalfPi) ==
          doctest::Approx(0.352513421777619).epsilon(1e-12));
    // the implied model variance reproduces the observed mean of squares
    const double phi = effective_argument(res.estimate.value, 0.0, 1.0).value;
    CHECK(quadrature_variance(1.0, phi) == doctest::Approx(1.0).epsilon(1e-10));
  }
  // boundary sides
  {
    const EstimateResult hi = mle_homodyne_closed_form(make_batch({4.0}, 0.2), 1.0);
    CHECK(!hi.stationary);
    CHECK(hi.boundary == BoundarySide::upper);
    const EstimateResult lo = mle_homodyne_closed_form(make_batch({0.01}, 0.2), 1.0);
    CHECK(!lo.stationary);
    CHECK(lo.boundary == BoundarySide::lower);
    // both boundary images coincide (the period is exactly the domain width)
    CHECK(hi.estimate.value == doctest::Approx(lo.estimate.value).epsilon(1e-12));
  }
}

TEST_CASE("truncated estimator hand-traces") {
  {
    const EstimateResult res = mle_homodyne_truncated(make_batch({3.0, 0.1}, 0.0), 1.0);
    CHECK(res.discarded == 0);  // mean 4.505 < e^2
    CHECK(res.stationary);
  }
  {
    const EstimateResult res =
        mle_homodyne_truncated(make_batch({2.0, 1.9, 0.1}, 0.0), 0.5);
    CHECK(res.discarded == 0);  // mean 2.537 < e
  }
  {
    // removal loop drains the whole sample: 3.24 > e even alone
    const EstimateResult res =
        mle_homodyne_truncated(make_batch({2.0, 1.9, 1.8}, 0.0), 0.5);
    CHECK(res.discarded == 3);
    CHECK(!res.stationary);
    CHECK(res.boundary == BoundarySide::upper);
  }
  {
    // partial removal: {0.5, 0.2, 3.0} at r = 0.5: mean 3.096 > e, drop 3.0 ->
    // mean 0.145 < e and also >= e^{-1}=0.368? 0.145 < 0.368 -> lower boundary
    const EstimateResult res =
        mle_homodyne_truncated(make_batch({0.5, 0.2, 3.0}, 0.0), 0.5);
    CHECK(res.discarded == 1);
    CHECK(!res.stationary);
    CHECK(res.boundary == BoundarySide::lower);
  }
  {
    // truncation equals the closed form whenever the raw sample is stationary
    const HomodyneBatch b = make_batch({0.4, -0.9, 1.1, 0.3}, 0.5);
    const EstimateResult t = mle_homodyne_truncated(b, 1.0);
    const EstimateResult c = mle_homodyne_closed_form(b, 1.0);
    CHECK(t.discarded == 0);
    CHECK(t.estimate.value == c.estimate.value);
  }
}

TEST_CASE("heterodyne log-likelihood") {
  // sum alpha^2 = 0 -> flat in theta
  const HeterodyneBatch flat = make_het({1.0, 0.0}, {0.0, 1.0});
  CHECK(loglik_heterodyne(flat, 1.0, 0.3) ==
        doctest::Approx(loglik_heterodyne(flat, 1.0, 1.1)).epsilon(1e-13));
  // single alpha = 1, r = 1, theta = 0 (independent evaluation)
  const HeterodyneBatch one = make_het({1.0}, {0.0});
  CHECK(loglik_heterodyne(one, 1.0, 0.0) ==
        doctest::Approx(-3.34010487228819).epsilon(1e-12));
  for (double th = 0.0; th < 3.0; th += 0.37) {
    CHECK(loglik_heterodyne(one, 1.0, th) ==
          doctest::Approx(loglik_heterodyne(one, 1.0, th + kPi)).epsilon(1e-12));
  }
}

TEST_CASE("closed-form heterodyne MLE") {
  // sum alpha^2 = -1 -> estimate 0; +1 -> pi/2
  const EstimateResult neg = mle_heterodyne_closed_form(make_het({0.0}, {1.0}), 1.0);
  CHECK(neg.estimate.value == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(neg.estimate.period == Period::pi);
  const EstimateResult pos = mle_heterodyne_closed_form(make_het({1.0}, {0.0}), 1.0);
  CHECK(pos.estimate.value == doctest::Approx(kHalfPi).epsilon(1e-12));
  CHECK_THROWS_AS(mle_heterodyne_closed_form(make_het({1.0, 0.0}, {0.0, 1.0}), 1.0),
                  FlatLikelihoodError);

  // grid + golden-section oracle on a random sample
  std::mt19937_64 rng(4242);
  std::normal_distribution<double> nd;
  std::vector<double> re(1000), im(1000);
  for (std::size_t i = 0; i < re.size(); ++i) {
    re[i] = 0.6 * nd(rng);
    im[i] = 1.4 * nd(rng);
  }
  const HeterodyneBatch sample = make_het(re, im);
  const EstimateResult closed = mle_heterodyne_closed_form(sample, 1.0);
  const EstimateResult numeric = mle_numeric(
      [&](double th) { return loglik_heterodyne(sample, 1.0, th); }, 0.0, kPi, Period::pi);
  CHECK(std::abs(closed.estimate.value - numeric.estimate.value) < 1e-6);
  CHECK(closed.loglik_at_estimate >= numeric.loglik_at_estimate - 1e-9);
}

TEST_CASE("numeric maximizer on a known unimodal function") {
  const EstimateResult res = mle_numeric(
      [](double th) { return -(th - 0.3) * (th - 0.3); }, 0.0, kPi, Period::pi);
  CHECK(std::abs(res.estimate.value - 0.3) < 1e-9);
  CHECK_THROWS_AS(mle_numeric([](double) { return std::nan(""); }, 0.0, 1.0, Period::pi),
                  NumericalError);
}

TEST_CASE("closed form vs numeric MLE on random stationary samples") {
  std::mt19937_64 meta(515);
  std::uniform_real_distribution<double> uth(0.0, kHalfPi), ur(0.4, 1.4);
  std::size_t checked = 0;
  for (int trial = 0; trial < 1500 && checked < 1000; ++trial) {
    const double r = ur(meta);
    const double theta = uth(meta);
    const double setting = uth(meta);
    SqueezedProbe probe;
    probe.r = r;
    const HomodyneBatch b =
        sample_homodyne(probe, theta, setting, 100, RngStream::root(trial).child(5));
    const EstimateResult closed = mle_homodyne_closed_form(b, r);
    if (!closed.stationary) continue;
    ++checked;
    const EstimateResult numeric = mle_numeric(
        [&](double th) { return loglik_homodyne(b, r, b.povm_setting.value, th); }, 0.0,
        kHalfPi, Period::half_pi);
    CHECK(std::abs(closed.estimate.value - numeric.estimate.value) < 1e-6);

    // stationary-point identity: the score vanishes at the estimate
    const double h = 1e-6;
    const double up = loglik_homodyne(b, r, b.povm_setting.value, closed.estimate.value + h);
    const double dn = loglik_homodyne(b, r, b.povm_setting.value, closed.estimate.value - h);
    CHECK(std::abs((up - dn) / (2.0 * h)) <
          1e-6 * static_cast<double>(b.outcomes.size()) + 1e-4);
  }
  CHECK(checked >= 1000);
}

TEST_CASE("equivariance in the POVM setting") {
  const HomodyneBatch base = make_batch({0.8, -0.3, 0.5, 1.2, -0.6}, 0.4);
  const EstimateResult r0 = mle_homodyne_closed_form(base, 1.0);
  for (double delta = 0.05; delta < 1.5; delta += 0.22) {
    HomodyneBatch shifted = base;
    shifted.povm_setting = wrap_phase(0.4 + delta, Period::half_pi);
    const EstimateResult r1 = mle_homodyne_closed_form(shifted, 1.0);
    const double got = wrap_phase_value(r1.estimate.value - r0.estimate.value, kHalfPi);
    CHECK(std::abs(got - wrap_phase_value(delta, kHalfPi)) < 1e-12);
  }
}

TEST_CASE("accumulated likelihood agrees with the op-level log-likelihoods") {
  SqueezedProbe probe;
  probe.r = 1.01;
  const HomodyneBatch b1 = sample_homodyne(probe, 0.7, 0.2, 200, RngStream::root(71).child(0));
  const HomodyneBatch b2 = sample_homodyne(probe, 0.7, 0.9, 200, RngStream::root(71).child(1));
  const HeterodyneBatch h = sample_heterodyne(probe, 0.7, 150, RngStream::root(71).child(2));

  AccumulatedLikelihood lik(1.01, 1.0);
  lik.set_heterodyne(150.0, kernels::active().complex_sums(h.re.data(), h.im.data(), h.size()));
  lik.add_homodyne(200.0, b1.sum_squares(), b1.povm_setting.value);
  lik.add_homodyne(200.0, b2.sum_squares(), b2.povm_setting.value);

  for (double th = 0.05; th < kPi; th += 0.19) {
    const double want = loglik_heterodyne(h, 1.01, th) +
                        loglik_homodyne(b1, 1.01, b1.povm_setting.value, th) +
                        loglik_homodyne(b2, 1.01, b2.povm_setting.value, th);
    CHECK(lik.eval(th) == doctest::Approx(want).epsilon(1e-11));
  }

  // the kernel-backed maximization matches the generic search
  std::vector<double> scratch;
  const EstimateResult fast = maximize_accumulated(lik, Period::pi, {}, scratch);
  const EstimateResult slow = mle_numeric([&](double th) { return lik.eval(th); }, 0.0, kPi,
                                          Period::pi);
  CHECK(std::abs(fast.estimate.value - slow.estimate.value) < 1e-7);
}

TEST_CASE("non-stationary frequency matches the chi-squared prediction") {
  // Monte Carlo frequency of the non-real-solution event at setting theta_opt
  // versus 1 - P_SP(theta) (the Fig. 2 comparison)
  SqueezedProbe probe;
  probe.r = 1.0;
  const double topt = optimal_phase_value(1.0);
  const std::size_t trials = 100'000;
  std::vector<double> buf;
  for (const std::size_t nu : {std::size_t{10}, std::size_t{100}, std::size_t{1000}}) {
    const double e2r = std::exp(2.0);
    for (int k = 0; k < 16; ++k) {
      const double theta = kHalfPi * (k + 0.5) / 16.0;
      const double v = quadrature_variance(1.0, theta);
      std::size_t hits = 0;
      buf.resize(nu);
      const RngStream point = RngStream::root(123456).child(nu).child(k);
      for (std::size_t t = 0; t < trials; ++t) {
        point.child(t).normals(0, buf);
        const double q = kernels::active().sum_squares(buf.data(), buf.size());
        if (v * q > e2r * static_cast<double>(nu)) ++hits;
      }
      const double freq = static_cast<double>(hits) / static_cast<double>(trials);
      const double want = 1.0 - stationary_point_prob(theta, 1.0, nu);
      const double se = std::sqrt(std::max(want * (1.0 - want), 1e-12) /
                                  static_cast<double>(trials));
      CHECK(std::abs(freq - want) <= 3.0 * se + 2.0 / trials);
    }
  }
}
