#include "sqphase/fisher.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include "sqphase/gaussian.hpp"

namespace sqphase {

namespace {

void check_transmission(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::invalid_argument("transmission must lie in [0, 1]");
  }
}

// roots of H_n by Newton iteration on the orthonormal recurrence
GaussHermiteRule compute_gauss_hermite(std::size_t n) {
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  const double pim4 = 0.7511255444649425;  // pi^{-1/4}
  double z = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == 0) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 1) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 2) {
      z = 1.86 * z - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      z = 1.91 * z - 0.91 * rule.nodes[1];
    } else {
      z = 2.0 * z - rule.nodes[i - 2];
    }
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = pim4;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    rule.nodes[i] = z;
    rule.nodes[n - 1 - i] = -z;
    rule.weights[i] = 2.0 / (pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  if (n % 2 == 1) rule.nodes[m - 1] = 0.0;
  return rule;
}

// E[g(mu + sigma Z)], Z standard normal. Starts from `nodes` points and keeps
// doubling until two successive rules agree to 1e-8 relative.
template <typename F>
double gauss_normal_expectation(const F& g, double mu, double sigma, std::size_t nodes) {
  const double inv_sqrt_pi = 0.5641895835477563;
  auto eval = [&](std::size_t n) {
    const GaussHermiteRule& rule = gauss_hermite(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += rule.weights[i] * g(mu + std::sqrt(2.0) * sigma * rule.nodes[i]);
    }
    return acc * inv_sqrt_pi;
  };
  double coarse = eval(nodes);
  // the plain Hermite recurrence overflows past a couple hundred nodes, so
  // the ladder stops at 167
  for (int round = 0; round < 2; ++round) {
    nodes = 2 * nodes + 1;
    const double fine = eval(nodes);
    if (std::abs(fine - coarse) <= 1e-8 * std::max(1.0, std::abs(fine))) return fine;
    coarse = fine;
  }

  // Gauss-Hermite stalls when g has structure much narrower than sigma (the
  // LO-noise integrand is pi/2-periodic in the shifted argument); integrate
  // the truncated Gaussian with composite Simpson instead.
  auto simpson = [&](std::size_t odd_nodes) {
    const double lim = 10.0 * sigma;
    const double h = 2.0 * lim / static_cast<double>(odd_nodes - 1);
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * kPi));
    double acc = 0.0;
    for (std::size_t i = 0; i < odd_nodes; ++i) {
      const double d = -lim + static_cast<double>(i) * h;
      const double w = (i == 0 || i + 1 == odd_nodes) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      acc += w * g(mu + d) * std::exp(-0.5 * d * d / (sigma * sigma));
    }
    return acc * h / 3.0 * inv_norm;
  };
  coarse = simpson(4001);
  for (std::size_t n = 8001; n <= 64001; n = 2 * n - 1) {
    const double fine = simpson(n);
    if (std::abs(fine - coarse) <= 1e-10 * std::max(1.0, std::abs(fine))) return fine;
    coarse = fine;
  }
  throw NumericalError("conditional-information quadrature did not converge");
}

}  // namespace

const GaussHermiteRule& gauss_hermite(std::size_t n) {
  static std::mutex mu;
  static std::map<std::size_t, GaussHermiteRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_hermite(n)).first;
  return it->second;
}

double qfi_squeezed_vacuum(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  const double s = std::sinh(2.0 * r);
  return 2.0 * s * s;
}

double fisher_homodyne(double r, double theta) {
  if (!(r > 0.0)) throw std::invalid_argument("fisher_homodyne requires r > 0");
  const double v = quadrature_variance(r, theta);
  const double s2 = std::sin(2.0 * theta);
  const double sh = std::sinh(2.0 * r);
  return 2.0 * sh * sh * s2 * s2 / (v * v);
}

double fisher_heterodyne(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("r must be >= 0");
  const double s = std::sinh(r);
  return 4.0 * s * s;
}

double qfi_lossy(double r, double transmission) {
  check_transmission(transmission);
  const double sh = std::sinh(r);
  const double denom = 1.0 + 2.0 * transmission * (1.0 - transmission) * sh * sh;
  return transmission * transmission / denom * qfi_squeezed_vacuum(r);
}

double fisher_homodyne_lossy_max(double r, double transmission) {
  check_transmission(transmission);
  const double sh = std::sinh(r);
  const double denom = 1.0 + 4.0 * transmission * (1.0 - transmission) * sh * sh;
  return transmission * transmission / denom * qfi_squeezed_vacuum(r);
}

double conditional_fisher_state_prep(double r0, double sigma_r, double theta) {
  if (!(sigma_r >= 0.0)) throw std::invalid_argument("sigma_r must be >= 0");
  if (sigma_r == 0.0) return fisher_homodyne(r0, theta);
  auto g = [theta](double rr) { return fisher_homodyne(rr, theta); };
  return gauss_normal_expectation(g, r0, sigma_r, 41);
}

double conditional_fisher_lo_noise(double r, double sigma_lo) {
  if (!(sigma_lo >= 0.0)) throw std::invalid_argument("sigma_lo must be >= 0");
  const double topt = optimal_phase_value(r);
  if (sigma_lo == 0.0) return fisher_homodyne(r, topt);
  auto g = [r, topt](double d) { return fisher_homodyne(r, topt - d); };
  return gauss_normal_expectation(g, 0.0, sigma_lo, 41);
}

double snl_bound(double mean_photons, std::size_t n_probes) {
  if (!(mean_photons > 0.0)) throw std::invalid_argument("mean photon number must be > 0");
  if (n_probes == 0) throw std::invalid_argument("N must be >= 1");
  return 1.0 / (4.0 * static_cast<double>(n_probes) * mean_photons);
}

FisherReport build_fisher_report(double r, const std::vector<double>& theta_grid,
                                 std::size_t n_probes) {
  FisherReport rep;
  rep.theta_grid = theta_grid;
  rep.qfi = qfi_squeezed_vacuum(r);
  rep.cfi_heterodyne = fisher_heterodyne(r);
  rep.n_probes = n_probes;
  rep.cfi_homodyne.reserve(theta_grid.size());
  for (const double th : theta_grid) rep.cfi_homodyne.push_back(fisher_homodyne(r, th));
  const double dn = static_cast<double>(n_probes);
  const double sh = std::sinh(r);
  rep.qcrb = 1.0 / (dn * rep.qfi);
  rep.snl = snl_bound(sh * sh, n_probes);
  rep.het_limit = 1.0 / (dn * rep.cfi_heterodyne);
  return rep;
}

}  // namespace sqphase
