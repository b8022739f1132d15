#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "fsm/spectral.hpp"

// Finite-dimensional Schatten norms, Fredholm determinants and the
// Poincare-Simon regularized determinants det_k, with phase extraction.
//
// det_k(1+K) = prod_i (1+lambda_i) exp(sum_{n<k} (-lambda_i)^n / n); the
// primary route goes through the eigenvalues (complex Schur).  Two
// independent cross-check routes exist: det(1 + R_k(K)) with R_k built via a
// matrix exponential, and the closed form det(1+K) exp(sum (-1)^n tr K^n/n).

namespace fsm::detkit {

using cplx = std::complex<double>;

struct OperatorMatrix {
  Eigen::MatrixXcd entries;
  bool is_real = false;

  int dim() const { return static_cast<int>(entries.rows()); }

  static OperatorMatrix from_real(const Eigen::MatrixXd& m);
  static OperatorMatrix from_complex(const Eigen::MatrixXcd& m);
  static OperatorMatrix from_realified(const spectral::RealifiedOperator& op);
  static OperatorMatrix identity(int n, bool real = true);

  void require_square_finite() const;
};

// Singular values, descending.  Exact fast path for diagonal matrices.
std::vector<double> singular_values(const OperatorMatrix& K);

// (sum_i sigma_i^k)^{1/k}.  The unrooted sum_i sigma_i^k is schatten_sum.
double schatten_norm(const OperatorMatrix& K, int k);
double schatten_sum(const OperatorMatrix& K, int k);

// det(1+K) from the eigenvalues (Pi (1+lambda_i)).
cplx fredholm_det(const OperatorMatrix& K);
// det(1+K) from the exterior-power series sum_n tr Lambda^n K, evaluated via
// Newton's identities on the power sums tr K^j.  Independent of the
// eigenvalue route.
cplx fredholm_det_series(const OperatorMatrix& K);

// R_k(K) = (1+K) exp(sum_{n=1}^{k-1} (-K)^n / n) - 1.
OperatorMatrix r_k(const OperatorMatrix& K, int k);

// Regularized determinant det_k(1+K), eigenvalue route.
cplx det_k(const OperatorMatrix& K, int k);

// log |det_k(1+K)| and, for real K, the exact sign of det_k(1+K).  Uses a
// real LU for det(1+K) plus real trace corrections, so the sign is exact;
// the magnitude is returned in log space to dodge overflow.
struct RealDetK {
  double log_abs;
  int sign;  // +1 / -1 / 0
};
RealDetK det_k_real(const Eigen::MatrixXd& K, int k);

// z / |z|; throws NearZeroDeterminant when |z| <= tol.
cplx phase(cplx z, double tol);
double default_phase_tol(int dim);

}  // namespace fsm::detkit
