#include <cmath>

#include "sqphase/kernels.hpp"
#include "sqphase/vmath.hpp"

// Reference backend. The AVX2 backend in kernels_avx2.cpp mirrors these loops
// lane for lane; any change here must be replicated there (the equivalence
// tests compare the two bit-for-bit).

namespace sqphase::kernels {
namespace {

constexpr double kInv53 = 0x1.0p-53;

void normal_fill_scalar(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n) {
  const std::size_t pairs = n / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::uint64_t wa = vm::hash_at(key, counter0 + 2 * p);
    const std::uint64_t wb = vm::hash_at(key, counter0 + 2 * p + 1);
    const double u1 = static_cast<double>((wa >> 11) + 1) * kInv53;  // (0, 1]
    const double u2 = static_cast<double>(wb >> 11) * kInv53;        // [0, 1)
    const double radius = std::sqrt(-2.0 * vm::log_pos(u1));
    double s, c;
    vm::sincos(vm::kTwoPi * u2, s, c);
    out[2 * p] = radius * c;
    out[2 * p + 1] = radius * s;
  }
  if (n & 1) {
    const std::uint64_t wa = vm::hash_at(key, counter0 + n - 1);
    const std::uint64_t wb = vm::hash_at(key, counter0 + n);
    const double u1 = static_cast<double>((wa >> 11) + 1) * kInv53;
    const double u2 = static_cast<double>(wb >> 11) * kInv53;
    const double radius = std::sqrt(-2.0 * vm::log_pos(u1));
    double s, c;
    vm::sincos(vm::kTwoPi * u2, s, c);
    out[n - 1] = radius * c;
  }
}

double sum_squares_scalar(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    acc[i & 3] = std::fma(x[i], x[i], acc[i & 3]);
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

ComplexSums complex_sums_scalar(const double* re, const double* im, std::size_t n) {
  double abs2[4] = {0, 0, 0, 0};
  double re2[4] = {0, 0, 0, 0};
  double im2[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l = i & 3;
    const double a = re[i];
    const double b = im[i];
    abs2[l] = std::fma(b, b, std::fma(a, a, abs2[l]));
    re2[l] = std::fma(-b, b, std::fma(a, a, re2[l]));
    im2[l] = std::fma(a + a, b, im2[l]);
  }
  ComplexSums out;
  out.abs2 = (abs2[0] + abs2[1]) + (abs2[2] + abs2[3]);
  out.re2 = (re2[0] + re2[1]) + (re2[2] + re2[3]);
  out.im2 = (im2[0] + im2[1]) + (im2[2] + im2[3]);
  return out;
}

void homodyne_grid_scalar(const HomodyneGridArgs& args, double* acc, std::size_t n) {
  for (std::size_t g = 0; g < n; ++g) {
    const double raw = std::fma(static_cast<double>(g), args.step, args.base);
    const double w = vm::homodyne_grid_term(raw, args.a_coef, args.b_coef, args.count,
                                            args.sum_sq);
    acc[g] = std::fma(-0.5, w, acc[g]);
  }
}

void cos_accum_scalar(double base, double step, double amp, double offset, double* acc,
                      std::size_t n) {
  for (std::size_t g = 0; g < n; ++g) {
    const double raw = std::fma(static_cast<double>(g), step, base);
    double s, c;
    vm::sincos(raw, s, c);
    acc[g] = std::fma(amp, c, acc[g] + offset);
  }
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops{normal_fill_scalar, sum_squares_scalar, complex_sums_scalar,
                       homodyne_grid_scalar, cos_accum_scalar};
  return ops;
}

}  // namespace sqphase::kernels
