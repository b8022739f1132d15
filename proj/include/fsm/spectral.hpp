#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

// Truncated Fourier representation of complex-valued functions on the flat
// 2-torus (period 2*pi per axis).  A field of truncation N keeps the modes
// e^{i k.x} with |k1|,|k2| <= N, stored row-major in (k1,k2) from (-N,-N)
// to (N,N).  Conventions, fixed once here and used everywhere:
//   * modes e^{i k.x} are orthonormal (torus measure normalized to 1), so
//     inner products and norms are plain coefficient sums and pointwise
//     products are plain coefficient convolutions;
//   * -Laplacian has eigenvalue |k|^2; d/dz = (i/2)(k1 - i k2).

namespace fsm::spectral {

using cplx = std::complex<double>;

struct FreqIndex {
  int k1 = 0;
  int k2 = 0;
};

class SpectralField {
 public:
  SpectralField() = default;
  explicit SpectralField(int trunc);
  SpectralField(int trunc, std::vector<cplx> coeffs);

  int trunc() const { return trunc_; }
  int side() const { return 2 * trunc_ + 1; }
  int modes() const { return side() * side(); }

  int index(FreqIndex k) const { return (k.k1 + trunc_) * side() + (k.k2 + trunc_); }
  FreqIndex freq(int idx) const {
    return {idx / side() - trunc_, idx % side() - trunc_};
  }

  cplx& at(FreqIndex k) { return coeffs_[index(k)]; }
  const cplx& at(FreqIndex k) const { return coeffs_[index(k)]; }

  std::vector<cplx>& coeffs() { return coeffs_; }
  const std::vector<cplx>& coeffs() const { return coeffs_; }
  const cplx* data() const { return coeffs_.data(); }
  cplx* data() { return coeffs_.data(); }

  bool finite() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx a);
  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(cplx a, SpectralField f) { return f *= a; }

 private:
  int trunc_ = 0;
  std::vector<cplx> coeffs_;
};

// Constant function c (single coefficient at k = 0).
SpectralField constant_field(int trunc, cplx c);

// Real-linear operator on a truncated field space, stored as a dense real
// matrix of size 2M x 2M acting on interleaved (Re c, Im c) coordinates.
struct RealifiedOperator {
  int trunc = 0;
  Eigen::MatrixXd mat;  // 2M x 2M

  int dim() const { return static_cast<int>(mat.rows()); }
};

// Realified coordinates of a field (interleaved Re/Im), and back.
Eigen::VectorXd realify(const SpectralField& f);
SpectralField unrealify(int trunc, const Eigen::VectorXd& v);

// (1 - Laplacian)^p: coefficient at k scaled by (1 + |k|^2)^p.
SpectralField laplacian_power(const SpectralField& f, double p);

// d/dz: multiplier (i/2)(k1 - i k2).
SpectralField del(const SpectralField& f);
// d/dzbar: multiplier (i/2)(k1 + i k2).   4 delbar(del(f)) == Laplacian f.
SpectralField delbar(const SpectralField& f);

// Pointwise complex conjugate of the function: c_k -> conj(c_{-k}).
SpectralField conjugate_field(const SpectralField& f);

// Pointwise polynomial sum_j poly[j] f(x)^j, projected exactly (alias-free)
// onto |k_i| <= N via a collocation grid with >= deg*(2N+1) points per axis.
SpectralField apply_polynomial(const SpectralField& f, const std::vector<cplx>& poly);

// Exact pointwise product; the result lives at truncation trunc(f)+trunc(g)
// so nothing is lost.  Direct coefficient convolution.
SpectralField multiply_fields(const SpectralField& f, const SpectralField& g);

// Restrict/extend to a different truncation (modes outside are dropped/zero).
SpectralField retruncate(const SpectralField& f, int trunc);

// <f,g> = sum_k conj(f_k) g_k.
cplx l2_inner(const SpectralField& f, const SpectralField& g);

// sqrt(sum_k (1+|k|^2)^lam |f_k|^2).
double sobolev_norm(const SpectralField& f, double lam);

// Dense realified matrix of delta -> P(psi * delta), or delta -> P(psi *
// conj(delta)) when conjugate_argument is set; P projects back onto the
// truncation of psi.
RealifiedOperator multiplication_operator(const SpectralField& psi, bool conjugate_argument);

// Realified matrix of a diagonal complex-linear multiplier m(k).
RealifiedOperator diagonal_multiplier_operator(int trunc,
                                               const std::vector<cplx>& multipliers);
std::vector<cplx> del_multipliers(int trunc);
std::vector<double> laplacian_multipliers(int trunc, double p);
RealifiedOperator diagonal_real_operator(int trunc, const std::vector<double>& multipliers);

// JSON fixture format: {"N": n, "coeffs": [[re,im],...]} row-major (k1,k2).
std::string to_json(const SpectralField& f);
SpectralField field_from_json(const std::string& text);

}  // namespace fsm::spectral
