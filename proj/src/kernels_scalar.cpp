#include "fsm/kernels.hpp"

namespace fsm::kernels {

namespace {

void scale_by_real_ref(const cplx* in, const double* mult, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * mult[i];
}

void scale_by_complex_ref(const cplx* in, const cplx* mult, cplx* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] * mult[i];
}

cplx dot_conjugated_ref(const cplx* a, const cplx* b, std::size_t n) {
  double re = 0.0, im = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ar = a[i].real(), ai = a[i].imag();
    const double br = b[i].real(), bi = b[i].imag();
    re += ar * br + ai * bi;
    im += ar * bi - ai * br;
  }
  return {re, im};
}

double real_pairing_ref(const cplx* a, const cplx* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += a[i].real() * b[i].real() + a[i].imag() * b[i].imag();
  return acc;
}

double weighted_norm_sq_ref(const cplx* a, const double* w, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    acc += w[i] * (a[i].real() * a[i].real() + a[i].imag() * a[i].imag());
  return acc;
}

}  // namespace

const Table& scalar_table() {
  static const Table t{scale_by_real_ref, scale_by_complex_ref, dot_conjugated_ref,
                       real_pairing_ref,  weighted_norm_sq_ref, "scalar"};
  return t;
}

}  // namespace fsm::kernels
