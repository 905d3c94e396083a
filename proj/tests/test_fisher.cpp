#include <doctest.h>

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "sqphase/fisher.hpp"
#include "sqphase/gaussian.hpp"
#include "sqphase/kernels.hpp"

using namespace sqphase;

namespace {

// Fisher information of N(0, V(theta)) computed without the analytic score:
// central finite differences of log f in theta, integrated over x by Simpson.
double fd_fisher(double r, double theta, double transmission) {
  const double h = 1e-5;
  const auto logf = [&](double x, double th) {
    const double v = lossy_quadrature_variance(r, th, transmission);
    return -0.5 * (std::log(2.0 * kPi * v) + x * x / v);
  };
  const double vmax = lossy_quadrature_variance(r, kHalfPi, transmission);
  const double lim = 10.0 * std::sqrt(vmax);
  const std::size_t nodes = 8001;
  const double hx = 2.0 * lim / static_cast<double>(nodes - 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = -lim + static_cast<double>(i) * hx;
    const double score = (logf(x, theta + h) - logf(x, theta - h)) / (2.0 * h);
    const double v0 = lossy_quadrature_variance(r, theta, transmission);
    const double f0 = std::exp(-0.5 * x * x / v0) / std::sqrt(2.0 * kPi * v0);
    const double w = (i == 0 || i + 1 == nodes) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    acc += w * f0 * score * score;
  }
  return acc * hx / 3.0;
}

}  // namespace

TEST_CASE("QFI values") {
  CHECK(qfi_squeezed_vacuum(0.0) == 0.0);
  CHECK(qfi_squeezed_vacuum(1.0) == doctest::Approx(26.3082328360165).epsilon(1e-13));
  CHECK(qfi_squeezed_vacuum(1.01) == doctest::Approx(27.4219701389423).epsilon(1e-13));
}

TEST_CASE("QFI photon-number identity") {
  for (double r = 0.0; r < 2.6; r += 0.13) {
    const double en = std::sinh(r) * std::sinh(r);
    const double rhs = 8.0 * (en * en + en);
    CHECK(std::abs(qfi_squeezed_vacuum(r) - rhs) <= 1e-12 * std::max(1.0, rhs));
  }
}

TEST_CASE("homodyne Fisher information") {
  CHECK(fisher_homodyne(1.0, 0.0) == 0.0);
  CHECK(fisher_homodyne(1.0, kHalfPi) == doctest::Approx(0.0).epsilon(1e-20));
  CHECK(fisher_homodyne(1.0, kHalfPi / 2.0) ==
        doctest::Approx(1.85869835029367).epsilon(1e-13));
  // local optimality identity, also acceptance criterion 1
  for (const double r : {0.1, 0.5, 1.0, 1.01, 1.5, 2.0}) {
    CHECK(std::abs(fisher_homodyne(r, optimal_phase_value(r)) - qfi_squeezed_vacuum(r)) <
          1e-10);
  }
}

TEST_CASE("theta_opt maximizes the homodyne Fisher information (grid scan)") {
  for (const double r : {1.0, 1.01}) {
    double best = 0.0, best_th = 0.0;
    for (int i = 1; i < 200000; ++i) {
      const double th = kHalfPi * i / 200000.0;
      const double f = fisher_homodyne(r, th);
      if (f > best) {
        best = f;
        best_th = th;
      }
    }
    CHECK(std::abs(best_th - optimal_phase_value(r)) < 1e-4);
    CHECK(best <= qfi_squeezed_vacuum(r) + 1e-9);
  }
}

TEST_CASE("heterodyne Fisher information") {
  CHECK(fisher_heterodyne(0.0) == 0.0);
  CHECK(fisher_heterodyne(1.0) == doctest::Approx(5.52439138216726).epsilon(1e-13));
  CHECK(fisher_heterodyne(1.01) == doctest::Approx(5.67098039874204).epsilon(1e-13));
  for (double r = 0.05; r < 2.5; r += 0.07) {
    CHECK(fisher_heterodyne(r) < qfi_squeezed_vacuum(r));
  }
}

TEST_CASE("lossy information formulas") {
  CHECK(qfi_lossy(1.0, 1.0) == doctest::Approx(qfi_squeezed_vacuum(1.0)).epsilon(1e-14));
  CHECK(qfi_lossy(1.3, 0.0) == 0.0);
  CHECK(qfi_lossy(1.0, 0.5) / qfi_squeezed_vacuum(1.0) ==
        doctest::Approx(0.147880961404084).epsilon(1e-12));
  CHECK(fisher_homodyne_lossy_max(1.0, 1.0) ==
        doctest::Approx(qfi_squeezed_vacuum(1.0)).epsilon(1e-14));
  CHECK(fisher_homodyne_lossy_max(1.0, 0.5) / qfi_squeezed_vacuum(1.0) ==
        doctest::Approx(0.104993585403507).epsilon(1e-12));
  CHECK(qfi_lossy(1.5, 0.9) >= fisher_homodyne_lossy_max(1.5, 0.9));
  for (double t = 0.05; t < 1.0; t += 0.05) {
    CHECK(qfi_lossy(1.0, t) >= fisher_homodyne_lossy_max(1.0, t));
  }
  CHECK_THROWS_AS(qfi_lossy(1.0, 1.01), std::invalid_argument);
  CHECK_THROWS_AS(fisher_homodyne_lossy_max(1.0, -0.2), std::invalid_argument);
}

TEST_CASE("finite-difference oracle reproduces the analytic Fisher information") {
  for (const double th : {0.1, 0.25, 0.7, 1.2}) {
    const double got = fd_fisher(1.0, th, 1.0);
    const double want = fisher_homodyne(1.0, th);
    CHECK(std::abs(got - want) < 1e-6 * want);
  }
  // the theta-maximum of the lossy-model information matches the closed form
  for (const double t : {0.95, 0.99}) {
    double best = 0.0;
    for (int i = 1; i < 400; ++i) {
      best = std::max(best, fd_fisher(1.0, kHalfPi * i / 400.0, t));
    }
    const double want = fisher_homodyne_lossy_max(1.0, t);
    CHECK(std::abs(best - want) < 1e-3 * want);
  }
}

TEST_CASE("Gauss-Hermite rule integrates exactly on low moments") {
  const GaussHermiteRule& rule = gauss_hermite(41);
  double w0 = 0.0, w2 = 0.0;
  for (std::size_t i = 0; i < 41; ++i) {
    w0 += rule.weights[i];
    w2 += rule.weights[i] * rule.nodes[i] * rule.nodes[i];
  }
  const double sqrt_pi = 1.7724538509055160273;
  CHECK(w0 == doctest::Approx(sqrt_pi).epsilon(1e-13));
  CHECK(w2 == doctest::Approx(sqrt_pi / 2.0).epsilon(1e-12));
}

TEST_CASE("state-prep conditional information") {
  CHECK(conditional_fisher_state_prep(1.0, 0.0, 0.2) ==
        doctest::Approx(fisher_homodyne(1.0, 0.2)).epsilon(1e-14));

  const double topt = optimal_phase_value(1.0);
  const double qfi = qfi_squeezed_vacuum(1.0);

  // Monte Carlo oracle: average the analytic information over draws of R
  const std::size_t n = 1'000'000;
  std::vector<double> z(n);
  kernels::active().normal_fill(7734, 0, z.data(), n);
  double mc = 0.0, mc2 = 0.0;
  for (const double zz : z) {
    const double f = fisher_homodyne(1.0 + 0.01 * zz, topt);
    mc += f;
    mc2 += f * f;
  }
  mc /= static_cast<double>(n);
  const double se = std::sqrt((mc2 / n - mc * mc) / static_cast<double>(n));
  const double got = conditional_fisher_state_prep(1.0, 0.01, topt);
  CHECK(std::abs(got - mc) < 4.0 * se + 1e-9);
  CHECK(std::abs(got - qfi) < 0.005 * qfi);

  // the maximum over theta slightly exceeds the noiseless QFI
  for (const double sr : {0.01, 0.02}) {
    double best = 0.0;
    for (int i = 0; i <= 300; ++i) {
      const double th = topt - 0.02 + 0.04 * i / 300.0;
      best = std::max(best, conditional_fisher_state_prep(1.0, sr, th));
    }
    CHECK(best > qfi);
    CHECK(best < 1.02 * qfi);
  }
}

TEST_CASE("LO-noise conditional information") {
  const double qfi = qfi_squeezed_vacuum(1.0);
  CHECK(conditional_fisher_lo_noise(1.0, 0.0) == doctest::Approx(qfi).epsilon(1e-12));

  const std::size_t n = 1'000'000;
  std::vector<double> z(n);
  kernels::active().normal_fill(887, 0, z.data(), n);
  const double topt = optimal_phase_value(1.0);
  double mc = 0.0, mc2 = 0.0;
  for (const double zz : z) {
    const double f = fisher_homodyne(1.0, topt - 0.05 * zz);
    mc += f;
    mc2 += f * f;
  }
  mc /= static_cast<double>(n);
  const double se = std::sqrt((mc2 / n - mc * mc) / static_cast<double>(n));
  const double mid = conditional_fisher_lo_noise(1.0, 0.05);
  CHECK(std::abs(mid - mc) < 4.0 * se + 1e-9);

  const double large = conditional_fisher_lo_noise(1.0, 0.15);
  CHECK(mid < qfi);
  CHECK(large < mid);
  // "decreases approximately to half of the QFI" at sigma_lo ~ 0.15
  CHECK(large / qfi > 0.45);
  CHECK(large / qfi < 0.75);
  double prev = qfi;
  for (double s = 0.01; s <= 0.15; s += 0.01) {
    const double cur = conditional_fisher_lo_noise(1.0, s);
    CHECK(cur < prev);
    prev = cur;
  }
}

TEST_CASE("SNL bound") {
  CHECK(snl_bound(1.0, 1) == doctest::Approx(0.25));
  CHECK(snl_bound(std::sinh(1.0) * std::sinh(1.0), 1) ==
        doctest::Approx(0.181015415241578).epsilon(1e-12));
  CHECK(snl_bound(1.0, 100) == doctest::Approx(0.0025).epsilon(1e-14));
  CHECK_THROWS_AS(snl_bound(0.0, 10), std::invalid_argument);
}

TEST_CASE("fisher report invariants") {
  std::vector<double> grid;
  for (int i = 1; i < 64; ++i) grid.push_back(kHalfPi * i / 64.0);
  const FisherReport rep = build_fisher_report(1.0, grid, 3705);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(rep.cfi_homodyne[i] >= 0.0);
    CHECK(rep.cfi_homodyne[i] <= rep.qfi + 1e-12);
  }
  CHECK(rep.qcrb == doctest::Approx(1.0 / (3705.0 * rep.qfi)).epsilon(1e-14));
  CHECK(rep.het_limit == doctest::Approx(1.0 / (3705.0 * rep.cfi_heterodyne)).epsilon(1e-14));
  CHECK(rep.snl ==
        doctest::Approx(1.0 / (4.0 * 3705.0 * std::sinh(1.0) * std::sinh(1.0))).epsilon(1e-14));
}
