#include "sqphase/measurements.hpp"

#include <cmath>
#include <stdexcept>

#include "sqphase/kernels.hpp"
#include "sqphase/vmath.hpp"

namespace sqphase {

RngStream RngStream::root(std::uint64_t seed) { return RngStream{vm::mix64(seed)}; }

RngStream RngStream::child(std::uint64_t salt) const { return RngStream{vm::hash_at(key, salt)}; }

double RngStream::uniform01(std::uint64_t counter) const {
  return static_cast<double>(vm::hash_at(key, counter) >> 11) * 0x1.0p-53;
}

void RngStream::normals(std::uint64_t counter0, std::span<double> out) const {
  kernels::active().normal_fill(key, counter0, out.data(), out.size());
}

double HomodyneBatch::sum_squares() const {
  return kernels::active().sum_squares(outcomes.data(), outcomes.size());
}

Phase effective_argument(double theta_true, double povm_setting, double r) {
  const double topt = optimal_phase_value(r);
  return wrap_phase(theta_true + topt - povm_setting, Period::half_pi);
}

HomodyneBatch sample_homodyne(const SqueezedProbe& probe, double theta_true,
                              double povm_setting, std::size_t n, const RngStream& stream) {
  probe.validate();
  if (n == 0) throw std::invalid_argument("sample_homodyne requires n >= 1");

  double setting = povm_setting;
  if (probe.sigma_lo > 0.0) {
    double jitter = 0.0;
    stream.child(2).normals(0, std::span<double>(&jitter, 1));
    setting += probe.sigma_lo * jitter;
  }
  const Phase phi = effective_argument(theta_true, setting, probe.r);

  HomodyneBatch batch;
  batch.povm_setting = wrap_phase(povm_setting, Period::half_pi);
  batch.effective_arg = phi;
  batch.outcomes.resize(n);
  stream.child(0).normals(0, batch.outcomes);

  const double t = probe.transmission;
  if (probe.sigma_r == 0.0) {
    const double scale = std::sqrt(lossy_quadrature_variance(probe.r, phi.value, t));
    for (double& x : batch.outcomes) x *= scale;
  } else {
    std::vector<double> rdraw(n);
    stream.child(1).normals(0, rdraw);
    const double c = std::cos(phi.value);
    const double s = std::sin(phi.value);
    const double c2 = c * c;
    const double s2 = s * s;
    for (std::size_t i = 0; i < n; ++i) {
      const double ri = probe.r + probe.sigma_r * rdraw[i];
      const double v = t * (std::exp(-2.0 * ri) * c2 + std::exp(2.0 * ri) * s2) + (1.0 - t);
      batch.outcomes[i] *= std::sqrt(v);
    }
  }
  return batch;
}

void heterodyne_axis_variances(double r, double transmission, double& v_minus,
                               double& v_plus) {
  v_minus = (transmission * std::exp(-2.0 * r) + (2.0 - transmission)) / 4.0;
  v_plus = (transmission * std::exp(2.0 * r) + (2.0 - transmission)) / 4.0;
}

HeterodyneBatch sample_heterodyne(const SqueezedProbe& probe, double theta_true,
                                  std::size_t n, const RngStream& stream) {
  probe.validate();
  if (n == 0) throw std::invalid_argument("sample_heterodyne requires n >= 1");

  std::vector<double> z(2 * n);
  stream.child(0).normals(0, z);

  std::vector<double> rdraw;
  if (probe.sigma_r > 0.0) {
    rdraw.resize(n);
    stream.child(1).normals(0, rdraw);
  }

  const double c = std::cos(theta_true);
  const double s = std::sin(theta_true);
  HeterodyneBatch batch;
  batch.re.resize(n);
  batch.im.resize(n);
  double vm0 = 0.0, vp0 = 0.0;
  heterodyne_axis_variances(probe.r, probe.transmission, vm0, vp0);
  const double sm0 = std::sqrt(vm0);
  const double sp0 = std::sqrt(vp0);
  for (std::size_t i = 0; i < n; ++i) {
    double sm = sm0, sp = sp0;
    if (!rdraw.empty()) {
      double vmi = 0.0, vpi = 0.0;
      heterodyne_axis_variances(probe.r + probe.sigma_r * rdraw[i], probe.transmission, vmi,
                                vpi);
      sm = std::sqrt(vmi);
      sp = std::sqrt(vpi);
    }
    const double a = sm * z[2 * i];      // squeezed axis
    const double b = sp * z[2 * i + 1];  // anti-squeezed axis
    // alpha = (a + i b) e^{-i theta}
    batch.re[i] = a * c + b * s;
    batch.im[i] = b * c - a * s;
  }
  return batch;
}

}  // namespace sqphase
