#include "sqphase/gaussian.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace sqphase {

namespace {
void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
}
}  // namespace

double wrap_phase_value(double x, double period) {
  require_finite(x, "phase");
  double w = x - period * std::floor(x / period);
  if (w < 0.0) w += period;
  if (w >= period) w -= period;
  return w;
}

Phase wrap_phase(double x, Period period) {
  return Phase{wrap_phase_value(x, period_value(period)), period};
}

void SqueezedProbe::validate() const {
  require_finite(r, "r");
  require_finite(transmission, "transmission");
  require_finite(sigma_r, "sigma_r");
  require_finite(sigma_lo, "sigma_lo");
  if (r < 0.0) throw std::invalid_argument("r must be >= 0");
  if (transmission < 0.0 || transmission > 1.0) {
    throw std::invalid_argument("transmission must lie in [0, 1]");
  }
  if (sigma_r < 0.0) throw std::invalid_argument("sigma_r must be >= 0");
  if (sigma_lo < 0.0) throw std::invalid_argument("sigma_lo must be >= 0");
}

double quadrature_variance(double r, double theta) {
  require_finite(r, "r");
  require_finite(theta, "theta");
  if (r < 0.0) throw std::invalid_argument("r must be >= 0");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return std::exp(-2.0 * r) * c * c + std::exp(2.0 * r) * s * s;
}

double lossy_quadrature_variance(double r, double theta, double transmission) {
  require_finite(transmission, "transmission");
  if (transmission < 0.0 || transmission > 1.0) {
    throw std::invalid_argument("transmission must lie in [0, 1]");
  }
  return transmission * quadrature_variance(r, theta) + (1.0 - transmission);
}

double optimal_phase_value(double r) {
  require_finite(r, "r");
  if (r <= 0.0) {
    throw std::invalid_argument("optimal_phase requires r > 0 (Fisher information vanishes at r = 0)");
  }
  return std::acos(std::tanh(2.0 * r)) / 2.0;
}

Phase optimal_phase(double r) { return Phase{optimal_phase_value(r), Period::half_pi}; }

double optimal_squeezing(double theta) {
  require_finite(theta, "theta");
  if (theta <= 0.0 || theta >= kHalfPi) {
    throw std::invalid_argument("optimal_squeezing requires theta in (0, pi/2)");
  }
  return -0.5 * std::log(std::tan(theta));
}

}  // namespace sqphase
