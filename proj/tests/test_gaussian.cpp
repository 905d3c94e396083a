#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "sqphase/gaussian.hpp"

using namespace sqphase;

TEST_CASE("quadrature variance at the known points") {
  CHECK(quadrature_variance(1.0, 0.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(quadrature_variance(0.0, 0.7) == doctest::Approx(1.0).epsilon(1e-14));
  // cosh(2), evaluated independently to 15 digits
  CHECK(quadrature_variance(1.0, kHalfPi / 2.0) ==
        doctest::Approx(3.76219569108363146).epsilon(1e-14));
  CHECK_THROWS_AS(quadrature_variance(1.0, std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(quadrature_variance(-0.1, 0.0), std::invalid_argument);
}

TEST_CASE("variance product identity across a grid") {
  for (double r = 0.1; r < 2.05; r += 0.24) {
    const double sh = std::sinh(2.0 * r);
    for (double th = -1.5; th < 4.7; th += 0.085) {
      const double lhs = quadrature_variance(r, th) * quadrature_variance(r, th + kHalfPi);
      const double s2 = std::sin(2.0 * th);
      const double rhs = 1.0 + sh * sh * s2 * s2;
      CHECK(std::abs(lhs - rhs) < 1e-12 * rhs);
    }
    // pi-periodicity and positivity
    CHECK(quadrature_variance(r, 0.3) ==
          doctest::Approx(quadrature_variance(r, 0.3 + kPi)).epsilon(1e-13));
    CHECK(quadrature_variance(r, 1.1) > 0.0);
  }
}

TEST_CASE("lossy variance reductions and linearity") {
  CHECK(lossy_quadrature_variance(1.0, 0.0, 1.0) ==
        doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(lossy_quadrature_variance(1.7, 0.9, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lossy_quadrature_variance(1.0, 0.0, 0.5) ==
        doctest::Approx(0.567667641618306).epsilon(1e-13));
  for (double t = 0.0; t <= 1.0; t += 0.11) {
    const double v = quadrature_variance(0.8, 0.5);
    CHECK(lossy_quadrature_variance(0.8, 0.5, t) ==
          doctest::Approx(t * v + 1.0 - t).epsilon(1e-14));
  }
  CHECK_THROWS_AS(lossy_quadrature_variance(1.0, 0.0, 1.2), std::invalid_argument);
  CHECK_THROWS_AS(lossy_quadrature_variance(1.0, 0.0, -0.01), std::invalid_argument);
}

TEST_CASE("optimal phase values and monotonicity") {
  CHECK(optimal_phase_value(1e-9) == doctest::Approx(kHalfPi / 2.0).epsilon(1e-6));
  // arccos(tanh 2r)/2 evaluated independently
  CHECK(optimal_phase_value(1.0) == doctest::Approx(0.134517995374441).epsilon(1e-12));
  CHECK(optimal_phase_value(1.01) == doctest::Approx(0.131885445484493).epsilon(1e-12));
  double prev = optimal_phase_value(0.05);
  for (double r = 0.15; r < 3.0; r += 0.1) {
    const double cur = optimal_phase_value(r);
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    CHECK(cur < kHalfPi / 2.0);
    prev = cur;
  }
  CHECK_THROWS_AS(optimal_phase_value(0.0), std::invalid_argument);
}

TEST_CASE("optimal squeezing and the round trip") {
  CHECK(optimal_squeezing(kHalfPi / 2.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(optimal_squeezing(kPi / 3.0) == doctest::Approx(-0.274653072167027).epsilon(1e-12));
  for (double th = 0.01; th < kHalfPi / 2.0 - 0.01; th += 0.01) {
    CHECK(std::abs(optimal_phase_value(optimal_squeezing(th)) - th) < 1e-10);
  }
  CHECK_THROWS_AS(optimal_squeezing(0.0), std::invalid_argument);
  CHECK_THROWS_AS(optimal_squeezing(kHalfPi), std::invalid_argument);
}

TEST_CASE("wrap_phase examples and idempotence") {
  CHECK(wrap_phase_value(kHalfPi + 0.1, kHalfPi) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(wrap_phase_value(-0.2, kPi) == doctest::Approx(kPi - 0.2).epsilon(1e-12));
  CHECK(wrap_phase_value(3.0 * kPi, kPi) == doctest::Approx(0.0));
  for (double x = -9.7; x < 9.7; x += 0.173) {
    for (const double p : {kHalfPi, kPi}) {
      const double w = wrap_phase_value(x, p);
      CHECK(w >= 0.0);
      CHECK(w < p);
      CHECK(wrap_phase_value(w, p) == w);  // idempotent
    }
  }
  CHECK_THROWS_AS(wrap_phase_value(std::nan(""), kPi), std::invalid_argument);
}

TEST_CASE("probe validation") {
  SqueezedProbe p;
  p.r = 1.0;
  CHECK_NOTHROW(p.validate());
  CHECK(p.ideal());
  p.transmission = 0.9;
  CHECK(!p.ideal());
  p.transmission = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.transmission = 1.0;
  p.sigma_r = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
