#include "fsm/kernels.hpp"

#include <immintrin.h>

// AVX2 variants.  Complex arrays are processed two elements per 256-bit
// register ([re0 im0 re1 im1]); tails fall through to scalar code.

namespace fsm::kernels {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

void scale_by_real_avx2(const cplx* in, const double* mult, cplx* out, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(in);
  double* y = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m128d m = _mm_loadu_pd(mult + i);
    __m256d mm = _mm256_insertf128_pd(_mm256_castpd128_pd256(_mm_unpacklo_pd(m, m)),
                                      _mm_unpackhi_pd(m, m), 1);
    _mm256_storeu_pd(y + 2 * i, _mm256_mul_pd(_mm256_loadu_pd(x + 2 * i), mm));
  }
  for (; i < n; ++i) out[i] = in[i] * mult[i];
}

void scale_by_complex_avx2(const cplx* in, const cplx* mult, cplx* out, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(in);
  const double* m = reinterpret_cast<const double*>(mult);
  double* y = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d a = _mm256_loadu_pd(x + 2 * i);    // [ar0 ai0 ar1 ai1]
    __m256d b = _mm256_loadu_pd(m + 2 * i);    // [br0 bi0 br1 bi1]
    __m256d br = _mm256_movedup_pd(b);         // [br0 br0 br1 br1]
    __m256d bi = _mm256_permute_pd(b, 0xF);    // [bi0 bi0 bi1 bi1]
    __m256d aswap = _mm256_permute_pd(a, 0x5); // [ai0 ar0 ai1 ar1]
    // (ar*br - ai*bi, ar*bi + ai*br) via addsub
    _mm256_storeu_pd(y + 2 * i,
                     _mm256_fmaddsub_pd(a, br, _mm256_mul_pd(aswap, bi)));
  }
  for (; i < n; ++i) out[i] = in[i] * mult[i];
}

cplx dot_conjugated_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(a);
  const double* y = reinterpret_cast<const double*>(b);
  __m256d accr = _mm256_setzero_pd();
  __m256d acci = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(x + 2 * i);
    __m256d vb = _mm256_loadu_pd(y + 2 * i);
    // re: ar*br + ai*bi ; im: ar*bi - ai*br
    accr = _mm256_fmadd_pd(va, vb, accr);
    __m256d vbswap = _mm256_permute_pd(vb, 0x5);
    __m256d prod = _mm256_mul_pd(va, vbswap);           // [ar*bi ai*br ...]
    __m256d neg = _mm256_mul_pd(prod, _mm256_setr_pd(1.0, -1.0, 1.0, -1.0));
    acci = _mm256_add_pd(acci, neg);
  }
  double re = hsum(accr);
  double im = hsum(acci);
  for (; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double real_pairing_avx2(const cplx* a, const cplx* b, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(a);
  const double* y = reinterpret_cast<const double*>(b);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t m = 2 * n;
  for (; i + 4 <= m; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double s = hsum(acc);
  for (; i < m; ++i) s += x[i] * y[i];
  return s;
}

double weighted_norm_sq_avx2(const cplx* a, const double* w, std::size_t n) {
  const double* x = reinterpret_cast<const double*>(a);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d va = _mm256_loadu_pd(x + 2 * i);
    __m128d mw = _mm_loadu_pd(w + i);
    __m256d vw = _mm256_insertf128_pd(_mm256_castpd128_pd256(_mm_unpacklo_pd(mw, mw)),
                                      _mm_unpackhi_pd(mw, mw), 1);
    acc = _mm256_fmadd_pd(_mm256_mul_pd(va, va), vw, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i)
    s += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  return s;
}

}  // namespace

const Table& avx2_table() {
  static const Table t{scale_by_real_avx2, scale_by_complex_avx2, dot_conjugated_avx2,
                       real_pairing_avx2,  weighted_norm_sq_avx2, "avx2"};
  return t;
}

}  // namespace fsm::kernels
