#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace sqphase {

// raised when a quadrature fails its node-doubling convergence check
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// F_Q = 2 sinh^2(2r)
double qfi_squeezed_vacuum(double r);

// F_X(theta) = 2 sinh^2(2r) sin^2(2 theta) / sigma^4(theta)
double fisher_homodyne(double r, double theta);

// F_Z = 4 sinh^2(r), independent of theta
double fisher_heterodyne(double r);

// [T^2 / (1 + 2T(1-T) sinh^2 r)] * F_Q
double qfi_lossy(double r, double transmission);

// [T^2 / (1 + 4T(1-T) sinh^2 r)] * F_Q; the theta-maximum of the lossy
// homodyne Fisher information
double fisher_homodyne_lossy_max(double r, double transmission);

// E_R[F_{X|R}(theta)] with R ~ Normal(r0, sigma_r^2), Gauss-Hermite quadrature
double conditional_fisher_state_prep(double r0, double sigma_r, double theta);

// E_d[F_X(theta_opt - d)] with d ~ Normal(0, sigma_lo^2): information at the
// locally optimal alignment under LO phase noise
double conditional_fisher_lo_noise(double r, double sigma_lo);

// 1 / (4 N E[n])
double snl_bound(double mean_photons, std::size_t n_probes);

struct GaussHermiteRule {
  std::vector<double> nodes;    // physicists' convention: integral of exp(-t^2) f(t)
  std::vector<double> weights;
};
const GaussHermiteRule& gauss_hermite(std::size_t n);

struct FisherReport {
  std::vector<double> theta_grid;
  double qfi = 0.0;
  std::vector<double> cfi_homodyne;
  double cfi_heterodyne = 0.0;
  double qcrb = 0.0;       // 1 / (N qfi)
  double snl = 0.0;        // 1 / (4 N sinh^2 r)
  double het_limit = 0.0;  // 1 / (N F_Z)
  std::size_t n_probes = 0;
};
FisherReport build_fisher_report(double r, const std::vector<double>& theta_grid,
                                 std::size_t n_probes);

}  // namespace sqphase
