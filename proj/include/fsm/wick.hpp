#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fsm/gaussian.hpp"

// Exact Wick/moment combinatorics on a torus surrogate geometry.
//
// The correlation under test is
//
//   mu( conj(h_L) h_R H_1 ... H_n ),     B := (1-Lap)^{-s} A,
//
// where A is matrix-valued white noise (independent components along an
// orthonormal basis T_a of the chosen Lie algebra, each component a scalar
// white noise at scale t), and
//
//   h_L(A) = s_L tr(B(z)^* phi_z),   h_R(A) = s_R tr(B(w)^* phi_w),
//   H_i(A) = tr(B(z_i)^* x_i B(z_i)) - (centered ? mean : 0).
//
// Two independent evaluations are provided.  The oracle enumerates raw Wick
// pairings and sums explicitly over basis labels; the cycles-and-chain
// formula enumerates partitions of {1..n} into cycles plus one chain and
// multiplies closed-form trace factors and kernel strings
//   c(z, z_{b1}) c(z_{b1}, z_{b2}) ... c(z_{bm}, w)
// with c(y,y') = (2/t^2) * torus_kernel(s,N,y,y'), the covariance of B.
//
// Trace conventions: the literal form uses plain traces
// tr(x_{a1}...x_{aj}) per cycle and tr(phi_z^* x_{b1}...x_{bm} phi_w) for
// the chain; the projector form closes every factor with the algebra's
// completeness projector (for gl(n) this is the literal cycle trace times a
// factor n per cycle; for sl(n) it adds 1/n correction terms).  Which
// convention reproduces the oracle is an experimental finding.

namespace fsm::wick {

using cplx = std::complex<double>;

// ---- pair partitions and Wick's theorem --------------------------------

struct PairingPartition {
  int k = 0;
  std::vector<int> target;  // target[i] = j pairs holo slot i with anti slot j (0-based)
};

// All k! bijections {1..k} -> {k+1..2k}; 0 <= k <= 8.
std::vector<PairingPartition> enumerate_pairings(int k);

// sum over pairings of prod cov(holo slot, anti slot).
cplx wick_expectation(int k, const std::function<cplx(int, int)>& cov);

// Closed-form covariance E[L_f conj(L_g)] of the linear functionals
// L_f(sigma) = <f, sigma> under the sampling convention of fsm::gaussian:
// (2/t^2) sum_k (1+|k|^2)^{-2s} conj(f_k) g_k.
cplx measured_covariance(const gaussian::GaussianSpec& spec, const spectral::SpectralField& f,
                         const spectral::SpectralField& g);

// ---- cycles-and-one-chain partitions ------------------------------------

struct CyclesChainPartition {
  std::vector<std::vector<int>> cycles;  // rotation-normalized, smallest first
  std::vector<int> chain;                // possibly empty, order matters
};

// All partitions of {1..n} into cycles (length >= min_cycle_len, rotations
// identified, reflections distinct) plus exactly one ordered chain.
// 0 <= n <= 7, min_cycle_len in {1,2}.
std::vector<CyclesChainPartition> enumerate_cycles_chain(int n, int min_cycle_len);

// ---- torus kernel --------------------------------------------------------

struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;
};

// (2 pi)^{-2} sum_{|k_i|<=N} (1+|k|^2)^{-2s} e^{i k.(z-z')}; needs s > 1/2.
cplx torus_kernel(double s, int N, const TorusPoint& z, const TorusPoint& zp);

// ---- kernel table, endpoint data, Lie basis ------------------------------

struct KernelTable {
  // points[0] = z (left endpoint), points[1] = w (right), points[2+i] = z_i
  std::vector<TorusPoint> points;
  Eigen::MatrixXcd values;  // values(i,j) = c(points[i], points[j])
  cplx endpoint_weight_z{1.0, 0.0};  // form contractions at z / w
  cplx endpoint_weight_w{1.0, 0.0};

  void validate() const;  // finite, Hermitian c(i,j) = conj(c(j,i))
  static KernelTable from_gaussian(const gaussian::GaussianSpec& spec,
                                   const TorusPoint& z, const TorusPoint& w,
                                   const std::vector<TorusPoint>& insertions);
};

struct VData {
  Eigen::MatrixXcd phi_z;  // matrix part of v at z
  Eigen::MatrixXcd phi_w;  // matrix part of v' at w
  cplx form_factor_z{1.0, 0.0};
  cplx form_factor_w{1.0, 0.0};
};

struct LieBasisSpec {
  enum class Algebra { kGl, kSl };
  int n = 2;
  Algebra algebra = Algebra::kGl;

  int dim() const { return algebra == Algebra::kGl ? n * n : n * n - 1; }
};

// Orthonormal basis under tr(a^* b): elementary matrices for gl(n), the
// traceless off-diagonal + diagonal combinations for sl(n).
std::vector<Eigen::MatrixXcd> basis_matrices(const LieBasisSpec& basis);

enum class TraceConvention { kProjector, kLiteralTraces };

// Cycles-and-chain evaluation of the correlation.
cplx frenkel_zhu_rhs(const std::vector<Eigen::MatrixXcd>& x, const KernelTable& kernel,
                     const VData& vdata, const LieBasisSpec& basis, int min_cycle_len,
                     TraceConvention convention = TraceConvention::kProjector);

struct OracleResult {
  cplx value{0.0, 0.0};
  std::uint64_t pairings = 0;  // contributing pairing count
};

// Ground truth: raw Wick-pairing enumeration with explicit basis-label sums.
// centered=true removes self-contractions (the H's are mean-subtracted) and
// corresponds to min_cycle_len = 2.  n <= 4, N <= 6, term cap 1e7.
OracleResult gaussian_moment_oracle(const std::vector<Eigen::MatrixXcd>& x,
                                    const TorusPoint& z, const TorusPoint& w,
                                    const std::vector<TorusPoint>& insertions,
                                    const VData& vdata, const gaussian::GaussianSpec& spec,
                                    const LieBasisSpec& basis, bool centered = true);

// Monte Carlo evaluation of the same correlation by actually sampling the
// matrix field; used to cross-check the oracle's conventions end to end.
McEstimate moment_mc(const std::vector<Eigen::MatrixXcd>& x, const TorusPoint& z,
                     const TorusPoint& w, const std::vector<TorusPoint>& insertions,
                     const VData& vdata, const gaussian::GaussianSpec& spec,
                     const LieBasisSpec& basis, bool centered, std::uint64_t n_samples,
                     std::uint64_t seed, int workers = 1);

}  // namespace fsm::wick
