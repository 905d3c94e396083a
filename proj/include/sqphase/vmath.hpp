#pragma once

#include <bit>
#include <cmath>
#include <cstdint>

// Polynomial log / sin / cos used by both the scalar reference kernels and
// the AVX2 kernels. The two backends must produce bit-identical results, so
// every operation here has a fixed order and fused multiply-adds are written
// out explicitly (std::fma on the scalar side, _mm256_fmadd_pd on the vector
// side). Do not "simplify" the arithmetic.
//
// Domains:
//   log_pos(x):   x a positive, normal double (no zeros, subnormals, infs)
//   sincos(a):    |a| <= 64 (two-part Cody-Waite pi/2 reduction)

namespace sqphase::vm {

inline constexpr double kLn2Hi = 6.93147180369123816490e-01;
inline constexpr double kLn2Lo = 1.90821492927058770002e-10;
inline constexpr double kSqrtHalf = 0.70710678118654752440;
inline constexpr double kTwoOverPi = 6.36619772367581343076e-01;
inline constexpr double kPiO2Hi = 1.57079632673412561417e+00;
inline constexpr double kPiO2Lo = 6.07710050650619224932e-11;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647693;
inline constexpr double kLog2Pi = 1.83787706640934548356;

// atanh-series coefficients for log: log(f) = 2w + 2w*t*P(t), w=(f-1)/(f+1), t=w^2
inline constexpr double kLogC3 = 1.0 / 3.0;
inline constexpr double kLogC5 = 1.0 / 5.0;
inline constexpr double kLogC7 = 1.0 / 7.0;
inline constexpr double kLogC9 = 1.0 / 9.0;
inline constexpr double kLogC11 = 1.0 / 11.0;
inline constexpr double kLogC13 = 1.0 / 13.0;
inline constexpr double kLogC15 = 1.0 / 15.0;
inline constexpr double kLogC17 = 1.0 / 17.0;
inline constexpr double kLogC19 = 1.0 / 19.0;
inline constexpr double kLogC21 = 1.0 / 21.0;

// Cephes minimax coefficients on [-pi/4, pi/4] (highest degree first).
inline constexpr double kSinC0 = 1.58962301576546568060e-10;
inline constexpr double kSinC1 = -2.50507477628578072866e-8;
inline constexpr double kSinC2 = 2.75573136213857245213e-6;
inline constexpr double kSinC3 = -1.98412698295895385996e-4;
inline constexpr double kSinC4 = 8.33333333332211858878e-3;
inline constexpr double kSinC5 = -1.66666666666666307295e-1;

inline constexpr double kCosC0 = -1.13585365213876817300e-11;
inline constexpr double kCosC1 = 2.08757008419747316778e-9;
inline constexpr double kCosC2 = -2.75573141792967388112e-7;
inline constexpr double kCosC3 = 2.48015872888517179954e-5;
inline constexpr double kCosC4 = -1.38888888888730564116e-3;
inline constexpr double kCosC5 = 4.16666666666665929218e-2;

inline double log_pos(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  std::int64_t e = static_cast<std::int64_t>(bits >> 52) - 1022;
  double f = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FE0000000000000ull);
  if (f < kSqrtHalf) {
    f = f + f;
    e -= 1;
  }
  const double w = (f - 1.0) / (f + 1.0);
  const double t = w * w;
  double p = kLogC21;
  p = std::fma(p, t, kLogC19);
  p = std::fma(p, t, kLogC17);
  p = std::fma(p, t, kLogC15);
  p = std::fma(p, t, kLogC13);
  p = std::fma(p, t, kLogC11);
  p = std::fma(p, t, kLogC9);
  p = std::fma(p, t, kLogC7);
  p = std::fma(p, t, kLogC5);
  p = std::fma(p, t, kLogC3);
  const double s = w + w;
  const double lnf = std::fma(s * t, p, s);
  const double k = static_cast<double>(e);
  return std::fma(k, kLn2Hi, std::fma(k, kLn2Lo, lnf));
}

inline double sin_poly(double x, double z) {
  double p = kSinC0;
  p = std::fma(p, z, kSinC1);
  p = std::fma(p, z, kSinC2);
  p = std::fma(p, z, kSinC3);
  p = std::fma(p, z, kSinC4);
  p = std::fma(p, z, kSinC5);
  return std::fma(x * z, p, x);
}

inline double cos_poly(double z) {
  double p = kCosC0;
  p = std::fma(p, z, kCosC1);
  p = std::fma(p, z, kCosC2);
  p = std::fma(p, z, kCosC3);
  p = std::fma(p, z, kCosC4);
  p = std::fma(p, z, kCosC5);
  return std::fma(z * z, p, std::fma(-0.5, z, 1.0));
}

inline void sincos(double a, double& sin_out, double& cos_out) {
  const double k = std::nearbyint(a * kTwoOverPi);
  double x = std::fma(-k, kPiO2Hi, a);
  x = std::fma(-k, kPiO2Lo, x);
  // quadrant index in {0,1,2,3}; computed in double arithmetic so the AVX2
  // path can mirror it without 64-bit integer ops
  const double j = k - 4.0 * std::floor(k * 0.25);
  const double z = x * x;
  const double sp = sin_poly(x, z);
  const double cp = cos_poly(z);
  if (j == 0.0) {
    sin_out = sp;
    cos_out = cp;
  } else if (j == 1.0) {
    sin_out = cp;
    cos_out = -sp;
  } else if (j == 2.0) {
    sin_out = -sp;
    cos_out = -cp;
  } else {
    sin_out = -cp;
    cos_out = sp;
  }
}

inline double cos(double a) {
  double s, c;
  sincos(a, s, c);
  return c;
}

inline double sin(double a) {
  double s, c;
  sincos(a, s, c);
  return s;
}

// cos of wrap(raw, pi) taken in [0, pi); the discontinuous mod-pi wrap is part
// of the pi/2-periodic variance model, not a plain range reduction
inline double cos_mod_pi(double raw) {
  const double q = std::floor(raw * (1.0 / kPi));
  double t = std::fma(-q, kPiO2Hi, raw);
  t = std::fma(-q, kPiO2Hi, t);
  t = std::fma(-q, 2.0 * kPiO2Lo, t);
  if (t < 0.0) t += kPi;
  if (t >= kPi) t -= kPi;
  const double k = std::nearbyint(t * kTwoOverPi);  // 0, 1 or 2
  double x = std::fma(-k, kPiO2Hi, t);
  x = std::fma(-k, kPiO2Lo, x);
  const double z = x * x;
  const double sp = sin_poly(x, z);
  const double cp = cos_poly(z);
  if (k == 0.0) return cp;
  if (k == 1.0) return -sp;
  return -cp;
}

// one grid point of the homodyne batch log-likelihood, before the -0.5 factor
inline double homodyne_grid_term(double raw, double a_coef, double b_coef, double count,
                                 double sum_sq) {
  const double c = cos_mod_pi(raw);
  const double v = std::fma(-a_coef, c, b_coef);
  const double d = sum_sq / v;
  const double u = log_pos(v) + kLog2Pi;
  return std::fma(count, u, d);
}

// splitmix64-style counter hash: stream position -> decorrelated 64-bit word
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_at(std::uint64_t key, std::uint64_t counter) {
  return mix64(key + (counter + 1) * kGolden);
}

}  // namespace sqphase::vm
