#include "sqphase/kernels.hpp"
#include "sqphase/vmath.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// AVX2 backend. Mirrors src/kernels_scalar.cpp operation for operation; the
// equivalence tests require bit-identical results, so keep the arithmetic in
// lockstep with the scalar reference.

namespace sqphase::kernels {
namespace {

using vm::kGolden;

inline __m256i mullo64(__m256i a, __m256i b) {
  const __m256i lo = _mm256_mul_epu32(a, b);
  const __m256i ahi = _mm256_srli_epi64(a, 32);
  const __m256i bhi = _mm256_srli_epi64(b, 32);
  const __m256i cross = _mm256_add_epi64(_mm256_mul_epu32(ahi, b), _mm256_mul_epu32(a, bhi));
  return _mm256_add_epi64(lo, _mm256_slli_epi64(cross, 32));
}

inline __m256i mix64(__m256i z) {
  z = mullo64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 30)), _mm256_set1_epi64x(0xBF58476D1CE4E5B9ll));
  z = mullo64(_mm256_xor_si256(z, _mm256_srli_epi64(z, 27)), _mm256_set1_epi64x(0x94D049BB133111EBll));
  return _mm256_xor_si256(z, _mm256_srli_epi64(z, 31));
}

inline __m256i hash_at(__m256i key, __m256i counter) {
  const __m256i step = mullo64(_mm256_add_epi64(counter, _mm256_set1_epi64x(1)),
                               _mm256_set1_epi64x(static_cast<long long>(kGolden)));
  return mix64(_mm256_add_epi64(key, step));
}

// exact u64 -> double for values < 2^53 (split into 21 + 1 + 31 bits)
inline __m256d u64_to_double(__m256i v) {
  const __m256i idx = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  const __m256i lo31 = _mm256_and_si256(v, _mm256_set1_epi64x(0x7FFFFFFFll));
  const __m256i b31 = _mm256_and_si256(_mm256_srli_epi64(v, 31), _mm256_set1_epi64x(1));
  const __m256i hi21 = _mm256_srli_epi64(v, 32);
  const __m256d lo_d =
      _mm256_cvtepi32_pd(_mm256_castsi256_si128(_mm256_permutevar8x32_epi32(lo31, idx)));
  const __m256d b_d =
      _mm256_cvtepi32_pd(_mm256_castsi256_si128(_mm256_permutevar8x32_epi32(b31, idx)));
  const __m256d hi_d =
      _mm256_cvtepi32_pd(_mm256_castsi256_si128(_mm256_permutevar8x32_epi32(hi21, idx)));
  const __m256d inner = _mm256_fmadd_pd(b_d, _mm256_set1_pd(2147483648.0), lo_d);
  return _mm256_fmadd_pd(hi_d, _mm256_set1_pd(4294967296.0), inner);
}

// signed 64-bit lanes with small magnitude -> double (low dwords carry the value)
inline __m256d i64small_to_double(__m256i v) {
  const __m256i idx = _mm256_setr_epi32(0, 2, 4, 6, 0, 2, 4, 6);
  return _mm256_cvtepi32_pd(_mm256_castsi256_si128(_mm256_permutevar8x32_epi32(v, idx)));
}

inline __m256d log_pos(__m256d x) {
  const __m256i bits = _mm256_castpd_si256(x);
  const __m256i e_raw = _mm256_sub_epi64(_mm256_srli_epi64(bits, 52), _mm256_set1_epi64x(1022));
  const __m256i mant = _mm256_or_si256(
      _mm256_and_si256(bits, _mm256_set1_epi64x(0x000FFFFFFFFFFFFFll)),
      _mm256_set1_epi64x(0x3FE0000000000000ll));
  __m256d f = _mm256_castsi256_pd(mant);
  __m256d k = i64small_to_double(e_raw);
  const __m256d small = _mm256_cmp_pd(f, _mm256_set1_pd(vm::kSqrtHalf), _CMP_LT_OQ);
  f = _mm256_blendv_pd(f, _mm256_add_pd(f, f), small);
  k = _mm256_sub_pd(k, _mm256_and_pd(small, _mm256_set1_pd(1.0)));
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d w = _mm256_div_pd(_mm256_sub_pd(f, one), _mm256_add_pd(f, one));
  const __m256d t = _mm256_mul_pd(w, w);
  __m256d p = _mm256_set1_pd(vm::kLogC21);
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC19));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC17));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC15));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC13));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC11));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC9));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC7));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC5));
  p = _mm256_fmadd_pd(p, t, _mm256_set1_pd(vm::kLogC3));
  const __m256d s = _mm256_add_pd(w, w);
  const __m256d lnf = _mm256_fmadd_pd(_mm256_mul_pd(s, t), p, s);
  return _mm256_fmadd_pd(k, _mm256_set1_pd(vm::kLn2Hi),
                         _mm256_fmadd_pd(k, _mm256_set1_pd(vm::kLn2Lo), lnf));
}

inline __m256d sin_poly(__m256d x, __m256d z) {
  __m256d p = _mm256_set1_pd(vm::kSinC0);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kSinC1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kSinC2));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kSinC3));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kSinC4));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kSinC5));
  return _mm256_fmadd_pd(_mm256_mul_pd(x, z), p, x);
}

inline __m256d cos_poly(__m256d z) {
  __m256d p = _mm256_set1_pd(vm::kCosC0);
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kCosC1));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kCosC2));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kCosC3));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kCosC4));
  p = _mm256_fmadd_pd(p, z, _mm256_set1_pd(vm::kCosC5));
  const __m256d tail =
      _mm256_fmadd_pd(_mm256_set1_pd(-0.5), z, _mm256_set1_pd(1.0));
  return _mm256_fmadd_pd(_mm256_mul_pd(z, z), p, tail);
}

inline __m256d negate_where(__m256d x, __m256d mask) {
  const __m256d signbit = _mm256_set1_pd(-0.0);
  return _mm256_xor_pd(x, _mm256_and_pd(mask, signbit));
}

inline __m256d negate(__m256d x) { return _mm256_xor_pd(x, _mm256_set1_pd(-0.0)); }

inline void sincos(__m256d a, __m256d& sin_out, __m256d& cos_out) {
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(a, _mm256_set1_pd(vm::kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d nk = negate(k);
  __m256d x = _mm256_fmadd_pd(nk, _mm256_set1_pd(vm::kPiO2Hi), a);
  x = _mm256_fmadd_pd(nk, _mm256_set1_pd(vm::kPiO2Lo), x);
  const __m256d j = _mm256_sub_pd(
      k, _mm256_mul_pd(_mm256_set1_pd(4.0),
                       _mm256_floor_pd(_mm256_mul_pd(k, _mm256_set1_pd(0.25)))));
  const __m256d z = _mm256_mul_pd(x, x);
  const __m256d sp = sin_poly(x, z);
  const __m256d cp = cos_poly(z);
  const __m256d j1 = _mm256_cmp_pd(j, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d j2 = _mm256_cmp_pd(j, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  const __m256d j3 = _mm256_cmp_pd(j, _mm256_set1_pd(3.0), _CMP_EQ_OQ);
  const __m256d swap = _mm256_or_pd(j1, j3);
  const __m256d s_base = _mm256_blendv_pd(sp, cp, swap);
  const __m256d c_base = _mm256_blendv_pd(cp, sp, swap);
  sin_out = negate_where(s_base, _mm256_or_pd(j2, j3));
  cos_out = negate_where(c_base, _mm256_or_pd(j1, j2));
}

void normal_fill_avx2(std::uint64_t key, std::uint64_t counter0, double* out, std::size_t n) {
  const std::size_t pairs = n / 2;
  const __m256i keyv = _mm256_set1_epi64x(static_cast<long long>(key));
  const __m256d inv53 = _mm256_set1_pd(0x1.0p-53);
  std::size_t p = 0;
  for (; p + 4 <= pairs; p += 4) {
    const std::uint64_t c = counter0 + 2 * p;
    const __m256i ctr_a = _mm256_setr_epi64x(
        static_cast<long long>(c), static_cast<long long>(c + 2), static_cast<long long>(c + 4),
        static_cast<long long>(c + 6));
    const __m256i ctr_b = _mm256_add_epi64(ctr_a, _mm256_set1_epi64x(1));
    const __m256i wa = hash_at(keyv, ctr_a);
    const __m256i wb = hash_at(keyv, ctr_b);
    const __m256i ua_bits =
        _mm256_add_epi64(_mm256_srli_epi64(wa, 11), _mm256_set1_epi64x(1));
    const __m256d u1 = _mm256_mul_pd(u64_to_double(ua_bits), inv53);
    const __m256d u2 = _mm256_mul_pd(u64_to_double(_mm256_srli_epi64(wb, 11)), inv53);
    const __m256d radius = _mm256_sqrt_pd(
        _mm256_mul_pd(_mm256_set1_pd(-2.0), log_pos(u1)));
    __m256d s, cth;
    sincos(_mm256_mul_pd(_mm256_set1_pd(vm::kTwoPi), u2), s, cth);
    const __m256d xc = _mm256_mul_pd(radius, cth);
    const __m256d xs = _mm256_mul_pd(radius, s);
    // interleave (xc0, xs0, xc1, xs1, ...) back into consecutive pairs
    const __m256d lo = _mm256_unpacklo_pd(xc, xs);  // c0 s0 c2 s2
    const __m256d hi = _mm256_unpackhi_pd(xc, xs);  // c1 s1 c3 s3
    _mm256_storeu_pd(out + 2 * p, _mm256_permute2f128_pd(lo, hi, 0x20));
    _mm256_storeu_pd(out + 2 * p + 4, _mm256_permute2f128_pd(lo, hi, 0x31));
  }
  if (2 * p < n) {
    scalar_ops().normal_fill(key, counter0 + 2 * p, out + 2 * p, n - 2 * p);
  }
}

double sum_squares_avx2(const double* x, std::size_t n) {
  __m256d accv = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    accv = _mm256_fmadd_pd(v, v, accv);
  }
  alignas(32) double acc[4];
  _mm256_store_pd(acc, accv);
  for (std::size_t i = n4; i < n; ++i) {
    acc[i & 3] = std::fma(x[i], x[i], acc[i & 3]);
  }
  return (acc[0] + acc[1]) + (acc[2] + acc[3]);
}

ComplexSums complex_sums_avx2(const double* re, const double* im, std::size_t n) {
  __m256d abs2v = _mm256_setzero_pd();
  __m256d re2v = _mm256_setzero_pd();
  __m256d im2v = _mm256_setzero_pd();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d a = _mm256_loadu_pd(re + i);
    const __m256d b = _mm256_loadu_pd(im + i);
    abs2v = _mm256_fmadd_pd(b, b, _mm256_fmadd_pd(a, a, abs2v));
    re2v = _mm256_fnmadd_pd(b, b, _mm256_fmadd_pd(a, a, re2v));
    im2v = _mm256_fmadd_pd(_mm256_add_pd(a, a), b, im2v);
  }
  alignas(32) double abs2[4], re2[4], im2[4];
  _mm256_store_pd(abs2, abs2v);
  _mm256_store_pd(re2, re2v);
  _mm256_store_pd(im2, im2v);
  for (std::size_t i = n4; i < n; ++i) {
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

inline __m256d cos_mod_pi(__m256d raw) {
  const __m256d q = _mm256_floor_pd(_mm256_mul_pd(raw, _mm256_set1_pd(1.0 / vm::kPi)));
  const __m256d nq = negate(q);
  __m256d t = _mm256_fmadd_pd(nq, _mm256_set1_pd(vm::kPiO2Hi), raw);
  t = _mm256_fmadd_pd(nq, _mm256_set1_pd(vm::kPiO2Hi), t);
  t = _mm256_fmadd_pd(nq, _mm256_set1_pd(2.0 * vm::kPiO2Lo), t);
  const __m256d pi = _mm256_set1_pd(vm::kPi);
  t = _mm256_blendv_pd(t, _mm256_add_pd(t, pi), _mm256_cmp_pd(t, _mm256_setzero_pd(), _CMP_LT_OQ));
  t = _mm256_blendv_pd(t, _mm256_sub_pd(t, pi), _mm256_cmp_pd(t, pi, _CMP_GE_OQ));
  const __m256d k = _mm256_round_pd(_mm256_mul_pd(t, _mm256_set1_pd(vm::kTwoOverPi)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d nk = negate(k);
  __m256d x = _mm256_fmadd_pd(nk, _mm256_set1_pd(vm::kPiO2Hi), t);
  x = _mm256_fmadd_pd(nk, _mm256_set1_pd(vm::kPiO2Lo), x);
  const __m256d z = _mm256_mul_pd(x, x);
  const __m256d sp = sin_poly(x, z);
  const __m256d cp = cos_poly(z);
  const __m256d k1 = _mm256_cmp_pd(k, _mm256_set1_pd(1.0), _CMP_EQ_OQ);
  const __m256d k2 = _mm256_cmp_pd(k, _mm256_set1_pd(2.0), _CMP_EQ_OQ);
  __m256d c = _mm256_blendv_pd(cp, negate_where(sp, k1), k1);
  c = _mm256_blendv_pd(c, negate_where(cp, k2), k2);
  return c;
}

void homodyne_grid_avx2(const HomodyneGridArgs& args, double* acc, std::size_t n) {
  const __m256d stepv = _mm256_set1_pd(args.step);
  const __m256d basev = _mm256_set1_pd(args.base);
  const __m256d av = _mm256_set1_pd(args.a_coef);
  const __m256d bv = _mm256_set1_pd(args.b_coef);
  const __m256d cv = _mm256_set1_pd(args.count);
  const __m256d qv = _mm256_set1_pd(args.sum_sq);
  const __m256d log2pi = _mm256_set1_pd(vm::kLog2Pi);
  const __m256d neg_half = _mm256_set1_pd(-0.5);
  __m256d g = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d raw = _mm256_fmadd_pd(g, stepv, basev);
    const __m256d c = cos_mod_pi(raw);
    const __m256d v = _mm256_fnmadd_pd(av, c, bv);
    const __m256d d = _mm256_div_pd(qv, v);
    const __m256d u = _mm256_add_pd(log_pos(v), log2pi);
    const __m256d w = _mm256_fmadd_pd(cv, u, d);
    const __m256d prev = _mm256_loadu_pd(acc + i);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(neg_half, w, prev));
    g = _mm256_add_pd(g, four);
  }
  for (std::size_t gg = n4; gg < n; ++gg) {
    const double raw = std::fma(static_cast<double>(gg), args.step, args.base);
    const double w = vm::homodyne_grid_term(raw, args.a_coef, args.b_coef, args.count,
                                            args.sum_sq);
    acc[gg] = std::fma(-0.5, w, acc[gg]);
  }
}

void cos_accum_avx2(double base, double step, double amp, double offset, double* acc,
                    std::size_t n) {
  const __m256d stepv = _mm256_set1_pd(step);
  const __m256d basev = _mm256_set1_pd(base);
  const __m256d ampv = _mm256_set1_pd(amp);
  const __m256d offv = _mm256_set1_pd(offset);
  __m256d g = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
  const __m256d four = _mm256_set1_pd(4.0);
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    const __m256d raw = _mm256_fmadd_pd(g, stepv, basev);
    __m256d s, c;
    sincos(raw, s, c);
    const __m256d prev = _mm256_add_pd(_mm256_loadu_pd(acc + i), offv);
    _mm256_storeu_pd(acc + i, _mm256_fmadd_pd(ampv, c, prev));
    g = _mm256_add_pd(g, four);
  }
  for (std::size_t gg = n4; gg < n; ++gg) {
    const double raw = std::fma(static_cast<double>(gg), step, base);
    double s, c;
    vm::sincos(raw, s, c);
    acc[gg] = std::fma(amp, c, acc[gg] + offset);
  }
}

}  // namespace

const Ops* avx2_ops_impl() {
  static const Ops ops{normal_fill_avx2, sum_squares_avx2, complex_sums_avx2,
                       homodyne_grid_avx2, cos_accum_avx2};
  return &ops;
}

}  // namespace sqphase::kernels

#endif  // x86_64
