#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

// Arithmetic inner loops of the simulator, in a scalar reference version and
// an AVX2 version selected at runtime. Both backends implement the exact same
// operation sequence (see vmath.hpp) and are equivalence-tested bit-for-bit.

namespace sqphase::kernels {

enum class Backend { scalar, avx2 };

struct ComplexSums {
  double abs2 = 0.0;  // sum |alpha|^2
  double re2 = 0.0;   // Re sum alpha^2
  double im2 = 0.0;   // Im sum alpha^2
};

// Accumulates, for a uniform grid arg_g = base + g*step (g = 0..n-1), the
// log-likelihood contribution of one homodyne batch:
//   acc[g] += -0.5*(count*(log V_g + log 2pi) + sum_sq/V_g)
// with V_g = b_coef - a_coef*cos(wrap(arg_g, pi)).  base/step are already
// doubled phases (arg = 2*(theta + delta)); the mod-pi wrap implements the
// pi/2-periodic variance model.
struct HomodyneGridArgs {
  double base = 0.0;
  double step = 0.0;
  double a_coef = 0.0;  // T*sinh(2r)
  double b_coef = 0.0;  // T*cosh(2r) + (1-T)
  double count = 0.0;   // number of outcomes in the batch
  double sum_sq = 0.0;  // sum of squared outcomes
};

struct Ops {
  // out[i] = i.i.d. standard normals; pure function of (key, counter0 + i).
  // Pair 2p, 2p+1 is Box-Muller applied to the hashed words at counters
  // (counter0 + 2p, counter0 + 2p + 1).
  void (*normal_fill)(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n);
  // 4-way striped sum of squares: acc[i mod 4] = fma(x_i, x_i, acc[i mod 4]),
  // total = (acc0 + acc1) + (acc2 + acc3).
  double (*sum_squares)(const double* x, std::size_t n);
  // Same striping for the heterodyne sufficient statistics.
  ComplexSums (*complex_sums)(const double* re, const double* im, std::size_t n);
  void (*homodyne_grid)(const HomodyneGridArgs& args, double* acc, std::size_t n);
  // acc[g] = fma(amp, cos(base + g*step), acc[g] + offset)
  void (*cos_accum)(double base, double step, double amp, double offset, double* acc,
                    std::size_t n);
};

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when this build/CPU cannot run AVX2
const Ops& active();
Backend active_backend();
// Returns false (and leaves the selection unchanged) if the backend is
// unavailable.
bool select_backend(Backend backend);
bool select_backend(const std::string& name);  // "auto" | "scalar" | "avx2"

}  // namespace sqphase::kernels
