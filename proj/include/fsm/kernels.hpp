#pragma once

#include <complex>
#include <cstddef>

// Data-parallel inner loops used by the spectral and sampling layers.
// Each kernel has a scalar reference implementation and, on x86-64 with
// AVX2, a vectorized variant selected once at startup.  Variants are
// equivalence-tested against the scalar reference (tolerance-level; FMA
// contraction changes the rounding).

namespace fsm::kernels {

using cplx = std::complex<double>;

struct Table {
  // out[i] = in[i] * mult[i], real diagonal multiplier
  void (*scale_by_real)(const cplx* in, const double* mult, cplx* out, std::size_t n);
  // out[i] = in[i] * mult[i], complex diagonal multiplier
  void (*scale_by_complex)(const cplx* in, const cplx* mult, cplx* out, std::size_t n);
  // sum_i conj(a[i]) * b[i]
  cplx (*dot_conjugated)(const cplx* a, const cplx* b, std::size_t n);
  // sum_i Re(conj(a[i]) * b[i])
  double (*real_pairing)(const cplx* a, const cplx* b, std::size_t n);
  // sum_i w[i] * |a[i]|^2
  double (*weighted_norm_sq)(const cplx* a, const double* w, std::size_t n);
  const char* name;
};

const Table& scalar_table();
// Dispatched table: AVX2 when the CPU supports it and the build enabled it,
// otherwise scalar.  FSM_FORCE_SCALAR=1 in the environment forces scalar.
const Table& active();

#ifdef FSM_BUILD_AVX2
const Table& avx2_table();
#endif

}  // namespace fsm::kernels
