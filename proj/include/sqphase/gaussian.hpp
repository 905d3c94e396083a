#pragma once

#include <numbers>

// Analytic building blocks of the squeezed-vacuum model: quadrature variances,
// the optimal homodyne phase, and period-aware phase arithmetic. Everything
// here is a pure function.
//
// Convention: the homodyne outcome pdf is N(0, sigma^2(theta)) with
// sigma^2(theta) = exp(-2r) cos^2 + exp(2r) sin^2, i.e. vacuum variance 1 in
// outcome units. All samplers, likelihoods and Fisher formulas use this
// normalization consistently.

namespace sqphase {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kHalfPi = std::numbers::pi / 2.0;

enum class Period { half_pi, pi };

inline constexpr double period_value(Period p) { return p == Period::half_pi ? kHalfPi : kPi; }

// phase wrapped into [0, period)
struct Phase {
  double value = 0.0;
  Period period = Period::half_pi;
};

// wrap x into [0, period); idempotent
double wrap_phase_value(double x, double period);
Phase wrap_phase(double x, Period period);

struct SqueezedProbe {
  double r = 1.0;            // squeezing strength
  double transmission = 1.0; // channel transmission T in [0, 1]
  double sigma_r = 0.0;      // state-prep squeezing std-dev
  double sigma_lo = 0.0;     // LO phase-noise std-dev (radians)

  bool ideal() const { return transmission == 1.0 && sigma_r == 0.0 && sigma_lo == 0.0; }
  void validate() const;  // throws std::invalid_argument on bad parameters
};

// exp(-2r) cos^2(theta) + exp(2r) sin^2(theta)
double quadrature_variance(double r, double theta);

// T * quadrature_variance + (1 - T) vacuum admixture
double lossy_quadrature_variance(double r, double theta, double transmission);

// arccos(tanh 2r)/2; rejects r <= 0 (the Fisher information degenerates there)
Phase optimal_phase(double r);
double optimal_phase_value(double r);

// -log(tan theta)/2, inverse of optimal_phase on (0, pi/4)
double optimal_squeezing(double theta);

}  // namespace sqphase
