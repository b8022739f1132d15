#include "fsm/detkit.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <unsupported/Eigen/MatrixFunctions>

#include "fsm/errors.hpp"

namespace fsm::detkit {

OperatorMatrix OperatorMatrix::from_real(const Eigen::MatrixXd& m) {
  OperatorMatrix K;
  K.entries = m.cast<cplx>();
  K.is_real = true;
  return K;
}

OperatorMatrix OperatorMatrix::from_complex(const Eigen::MatrixXcd& m) {
  OperatorMatrix K;
  K.entries = m;
  K.is_real = false;
  return K;
}

OperatorMatrix OperatorMatrix::from_realified(const spectral::RealifiedOperator& op) {
  return from_real(op.mat);
}

OperatorMatrix OperatorMatrix::identity(int n, bool real) {
  OperatorMatrix K;
  K.entries = Eigen::MatrixXcd::Identity(n, n);
  K.is_real = real;
  return K;
}

void OperatorMatrix::require_square_finite() const {
  if (entries.rows() != entries.cols()) throw ConfigError("operator matrix must be square");
  if (!entries.allFinite()) throw NumericalError("operator matrix has non-finite entries");
}

std::vector<double> singular_values(const OperatorMatrix& K) {
  K.require_square_finite();
  const int n = K.dim();
  std::vector<double> sv(static_cast<std::size_t>(n));

  bool diagonal = true;
  for (int i = 0; i < n && diagonal; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && K.entries(i, j) != cplx{0.0, 0.0}) {
        diagonal = false;
        break;
      }
  if (diagonal) {
    for (int i = 0; i < n; ++i) sv[static_cast<std::size_t>(i)] = std::abs(K.entries(i, i));
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
  }

  if (K.is_real) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(K.entries.real());
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
    for (int i = 0; i < n; ++i) sv[static_cast<std::size_t>(i)] = svd.singularValues()[i];
    return sv;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(K.entries);
  if (svd.info() != Eigen::Success) throw NumericalError("SVD failed");
  for (int i = 0; i < n; ++i) sv[static_cast<std::size_t>(i)] = svd.singularValues()[i];
  return sv;
}

double schatten_sum(const OperatorMatrix& K, int k) {
  if (k < 1) throw ConfigError("schatten: k must be >= 1");
  const auto sv = singular_values(K);
  double s = 0.0;
  for (auto it = sv.rbegin(); it != sv.rend(); ++it) s += std::pow(*it, k);
  return s;
}

double schatten_norm(const OperatorMatrix& K, int k) {
  return std::pow(schatten_sum(K, k), 1.0 / k);
}

namespace {

Eigen::VectorXcd eigenvalues(const OperatorMatrix& K) {
  K.require_square_finite();
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(K.entries, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed");
  return es.eigenvalues();
}

// sum_{n=1}^{k-1} (-z)^n / n
cplx trace_correction(cplx z, int k) {
  cplx acc{0.0, 0.0};
  cplx p{1.0, 0.0};
  for (int n = 1; n <= k - 1; ++n) {
    p *= -z;
    acc += p / static_cast<double>(n);
  }
  return acc;
}

}  // namespace

cplx fredholm_det(const OperatorMatrix& K) {
  const auto lam = eigenvalues(K);
  cplx det{1.0, 0.0};
  for (Eigen::Index i = 0; i < lam.size(); ++i) det *= cplx{1.0, 0.0} + lam[i];
  return det;
}

cplx fredholm_det_series(const OperatorMatrix& K) {
  K.require_square_finite();
  const int n = K.dim();
  // power sums p_j = tr K^j, then Newton's identities for the elementary
  // symmetric functions e_m = tr Lambda^m K; det(1+K) = sum_m e_m.
  std::vector<cplx> p(static_cast<std::size_t>(n) + 1, cplx{0.0, 0.0});
  Eigen::MatrixXcd pw = K.entries;
  for (int j = 1; j <= n; ++j) {
    p[static_cast<std::size_t>(j)] = pw.trace();
    if (j < n) pw = pw * K.entries;
  }
  std::vector<cplx> e(static_cast<std::size_t>(n) + 1, cplx{0.0, 0.0});
  e[0] = 1.0;
  for (int m = 1; m <= n; ++m) {
    cplx acc{0.0, 0.0};
    double sgn = 1.0;
    for (int j = 1; j <= m; ++j) {
      acc += sgn * p[static_cast<std::size_t>(j)] * e[static_cast<std::size_t>(m - j)];
      sgn = -sgn;
    }
    e[static_cast<std::size_t>(m)] = acc / static_cast<double>(m);
  }
  cplx det{0.0, 0.0};
  for (int m = n; m >= 0; --m) det += e[static_cast<std::size_t>(m)];
  return det;
}

OperatorMatrix r_k(const OperatorMatrix& K, int k) {
  if (k < 1) throw ConfigError("r_k: k must be >= 1");
  K.require_square_finite();
  const int n = K.dim();
  if (k == 1) return K;
  Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(n, n);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(n, n);
  for (int m = 1; m <= k - 1; ++m) {
    P = P * (-K.entries);
    S += P / static_cast<double>(m);
  }
  const Eigen::MatrixXcd E = S.exp();
  OperatorMatrix out;
  out.entries = (Eigen::MatrixXcd::Identity(n, n) + K.entries) * E -
                Eigen::MatrixXcd::Identity(n, n);
  out.is_real = K.is_real;
  return out;
}

cplx det_k(const OperatorMatrix& K, int k) {
  if (k < 1) throw ConfigError("det_k: k must be >= 1");
  const auto lam = eigenvalues(K);
  // log-sum form: branch choice per factor is irrelevant to the product
  cplx logsum{0.0, 0.0};
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const cplx w = cplx{1.0, 0.0} + lam[i];
    if (w == cplx{0.0, 0.0}) return {0.0, 0.0};
    logsum += std::log(w) + trace_correction(lam[i], k);
  }
  return std::exp(logsum);
}

RealDetK det_k_real(const Eigen::MatrixXd& K, int k) {
  if (k < 1) throw ConfigError("det_k: k must be >= 1");
  if (!K.allFinite()) throw NumericalError("operator matrix has non-finite entries");
  const int n = static_cast<int>(K.rows());
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(Eigen::MatrixXd::Identity(n, n) + K);
  // sign and log|det| from the LU factors; the exp trace corrections are
  // strictly positive so they never move the sign
  const Eigen::MatrixXd& U = lu.matrixLU();
  double log_abs = 0.0;
  int sign = lu.permutationP().determinant() > 0 ? 1 : -1;
  for (int i = 0; i < n; ++i) {
    const double d = U(i, i);
    if (d == 0.0) return {-std::numeric_limits<double>::infinity(), 0};
    if (d < 0.0) sign = -sign;
    log_abs += std::log(std::abs(d));
  }
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
  double corr = 0.0;
  for (int m = 1; m <= k - 1; ++m) {
    P = P * (-K);
    corr += P.trace() / static_cast<double>(m);
  }
  return {log_abs + corr, sign};
}

cplx phase(cplx z, double tol) {
  const double a = std::abs(z);
  if (!(a > tol))
    throw NearZeroDeterminant("determinant magnitude " + std::to_string(a) +
                              " at or below tolerance " + std::to_string(tol));
  return z / a;
}

double default_phase_tol(int dim) { return 1e-10 * dim; }

}  // namespace fsm::detkit
