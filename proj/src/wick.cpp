#include "fsm/wick.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fsm/errors.hpp"
#include "fsm/rng.hpp"

namespace fsm::wick {

// ---- pairings ------------------------------------------------------------

std::vector<PairingPartition> enumerate_pairings(int k) {
  if (k < 0 || k > 8) throw ConfigError("enumerate_pairings: k out of range [0,8]");
  std::vector<int> perm(static_cast<std::size_t>(k));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<PairingPartition> out;
  do {
    out.push_back({k, perm});
  } while (std::next_permutation(perm.begin(), perm.end()));
  return out;
}

cplx wick_expectation(int k, const std::function<cplx(int, int)>& cov) {
  cplx acc{0.0, 0.0};
  for (const auto& q : enumerate_pairings(k)) {
    cplx term{1.0, 0.0};
    for (int i = 0; i < k; ++i) term *= cov(i, q.target[static_cast<std::size_t>(i)]);
    acc += term;
  }
  return acc;
}

cplx measured_covariance(const gaussian::GaussianSpec& spec, const spectral::SpectralField& f,
                         const spectral::SpectralField& g) {
  spec.validate();
  if (f.trunc() != spec.trunc || g.trunc() != spec.trunc)
    throw ConfigError("measured_covariance: truncation mismatch");
  const spectral::SpectralField gw = spectral::laplacian_power(g, -2.0 * spec.smooth);
  return 2.0 / (spec.scale * spec.scale) * spectral::l2_inner(f, gw);
}

// ---- cycles and one chain --------------------------------------------------

namespace {

void cycle_partitions(std::vector<int> remaining, int min_len,
                      std::vector<std::vector<int>>& current,
                      std::vector<std::vector<std::vector<int>>>& out) {
  if (remaining.empty()) {
    out.push_back(current);
    return;
  }
  const int head = remaining.front();
  std::vector<int> rest(remaining.begin() + 1, remaining.end());
  const int r = static_cast<int>(rest.size());
  // choose the other members of head's cycle: every subset of `rest` of size
  // >= min_len-1, in every order (reflections distinct, rotation fixed by
  // putting the smallest element first)
  for (unsigned mask = 0; mask < (1u << r); ++mask) {
    std::vector<int> members;
    std::vector<int> leftover;
    for (int i = 0; i < r; ++i)
      (mask >> i & 1u ? members : leftover).push_back(rest[static_cast<std::size_t>(i)]);
    if (static_cast<int>(members.size()) + 1 < min_len) continue;
    std::sort(members.begin(), members.end());
    do {
      std::vector<int> cyc;
      cyc.push_back(head);
      cyc.insert(cyc.end(), members.begin(), members.end());
      current.push_back(std::move(cyc));
      cycle_partitions(leftover, min_len, current, out);
      current.pop_back();
    } while (std::next_permutation(members.begin(), members.end()));
  }
}

}  // namespace

std::vector<CyclesChainPartition> enumerate_cycles_chain(int n, int min_cycle_len) {
  if (n < 0 || n > 7) throw ConfigError("enumerate_cycles_chain: n out of range [0,7]");
  if (min_cycle_len != 1 && min_cycle_len != 2)
    throw ConfigError("enumerate_cycles_chain: min_cycle_len must be 1 or 2");

  std::vector<CyclesChainPartition> out;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    std::vector<int> chain_set, cycle_set;
    for (int i = 0; i < n; ++i)
      (mask >> i & 1u ? chain_set : cycle_set).push_back(i + 1);

    std::vector<std::vector<std::vector<int>>> cycle_opts;
    std::vector<std::vector<int>> scratch;
    cycle_partitions(cycle_set, min_cycle_len, scratch, cycle_opts);
    if (cycle_opts.empty()) continue;

    std::sort(chain_set.begin(), chain_set.end());
    do {
      for (const auto& cycles : cycle_opts) {
        CyclesChainPartition p;
        p.cycles = cycles;
        p.chain = chain_set;
        out.push_back(std::move(p));
      }
    } while (std::next_permutation(chain_set.begin(), chain_set.end()));
  }
  return out;
}

// ---- torus kernel ----------------------------------------------------------

cplx torus_kernel(double s, int N, const TorusPoint& z, const TorusPoint& zp) {
  if (!(s > 0.5)) throw ConfigError("torus_kernel: needs s > 1/2");
  if (N < 1) throw ConfigError("torus_kernel: needs N >= 1");
  const double d1 = z.x1 - zp.x1, d2 = z.x2 - zp.x2;
  cplx acc{0.0, 0.0};
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2) {
      const double w = std::pow(1.0 + double(k1) * k1 + double(k2) * k2, -2.0 * s);
      const double ph = k1 * d1 + k2 * d2;
      acc += w * cplx{std::cos(ph), std::sin(ph)};
    }
  constexpr double inv4pi2 = 1.0 / (4.0 * M_PI * M_PI);
  return acc * inv4pi2;
}

// ---- kernel table / basis ----------------------------------------------------

void KernelTable::validate() const {
  const auto m = static_cast<Eigen::Index>(points.size());
  if (values.rows() != m || values.cols() != m)
    throw ConfigError("kernel table: value matrix does not cover the points");
  if (!values.allFinite()) throw ConfigError("kernel table: non-finite value");
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      if (std::abs(values(i, j) - std::conj(values(j, i))) > 1e-12 * (1.0 + std::abs(values(i, j))))
        throw ConfigError("kernel table: Hermitian symmetry violated");
}

KernelTable KernelTable::from_gaussian(const gaussian::GaussianSpec& spec, const TorusPoint& z,
                                       const TorusPoint& w,
                                       const std::vector<TorusPoint>& insertions) {
  KernelTable t;
  t.points.push_back(z);
  t.points.push_back(w);
  t.points.insert(t.points.end(), insertions.begin(), insertions.end());
  const auto m = static_cast<Eigen::Index>(t.points.size());
  t.values.resize(m, m);
  const double scale = 2.0 / (spec.scale * spec.scale);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      t.values(i, j) = scale * torus_kernel(spec.smooth, spec.trunc,
                                            t.points[static_cast<std::size_t>(i)],
                                            t.points[static_cast<std::size_t>(j)]);
  return t;
}

std::vector<Eigen::MatrixXcd> basis_matrices(const LieBasisSpec& basis) {
  if (basis.n < 2) throw ConfigError("lie basis: n must be >= 2");
  const int n = basis.n;
  std::vector<Eigen::MatrixXcd> T;
  if (basis.algebra == LieBasisSpec::Algebra::kGl) {
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
        e(p, q) = 1.0;
        T.push_back(std::move(e));
      }
    return T;
  }
  // sl(n): off-diagonal units plus orthonormal traceless diagonals
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (p == q) continue;
      Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
      e(p, q) = 1.0;
      T.push_back(std::move(e));
    }
  for (int j = 1; j < n; ++j) {
    Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, n);
    const double norm = 1.0 / std::sqrt(double(j) * (j + 1));
    for (int i = 0; i < j; ++i) e(i, i) = norm;
    e(j, j) = -double(j) * norm;
    T.push_back(std::move(e));
  }
  return T;
}

// ---- cycles-and-chain evaluation ---------------------------------------------

namespace {

// completeness projector onto the algebra, as an n^2 x n^2 matrix acting on
// column-major vec(M)
Eigen::MatrixXcd projector_matrix(const LieBasisSpec& basis) {
  const int n = basis.n;
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(n * n, n * n);
  if (basis.algebra == LieBasisSpec::Algebra::kSl) {
    Eigen::VectorXcd vid = Eigen::VectorXcd::Zero(n * n);
    for (int i = 0; i < n; ++i) vid(i + i * n) = 1.0;
    P -= (vid * vid.adjoint()) / double(n);
  }
  return P;
}

Eigen::MatrixXcd left_mul_matrix(const Eigen::MatrixXcd& x) {
  const int n = static_cast<int>(x.rows());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (int c = 0; c < n; ++c) M.block(c * n, c * n, n, n) = x;
  return M;
}

Eigen::VectorXcd vec_of(const Eigen::MatrixXcd& m) {
  Eigen::VectorXcd v(m.size());
  Eigen::Index idx = 0;
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) v(idx++) = m(r, c);
  return v;
}

}  // namespace

cplx frenkel_zhu_rhs(const std::vector<Eigen::MatrixXcd>& x, const KernelTable& kernel,
                     const VData& vdata, const LieBasisSpec& basis, int min_cycle_len,
                     TraceConvention convention) {
  const int n = static_cast<int>(x.size());
  kernel.validate();
  if (static_cast<int>(kernel.points.size()) != n + 2)
    throw ConfigError("frenkel_zhu_rhs: kernel table must cover z, w and the insertions");
  for (const auto& xi : x) {
    if (xi.rows() != basis.n || xi.cols() != basis.n)
      throw ConfigError("frenkel_zhu_rhs: matrix size mismatch");
    if ((xi - xi.adjoint()).norm() > 1e-10 * (1.0 + xi.norm()))
      throw ConfigError("frenkel_zhu_rhs: insertion matrices must be Hermitian");
  }

  // kernel index of insertion i (1-based): i + 1;  z = 0, w = 1
  auto cval = [&](int i, int j) { return kernel.values(i, j); };

  const bool projector = convention == TraceConvention::kProjector;
  Eigen::MatrixXcd P;
  std::vector<Eigen::MatrixXcd> mul;
  if (projector) {
    P = projector_matrix(basis);
    mul.reserve(x.size());
    for (const auto& xi : x) mul.push_back(left_mul_matrix(xi));
  }

  cplx total{0.0, 0.0};
  for (const auto& part : enumerate_cycles_chain(n, min_cycle_len)) {
    cplx term{1.0, 0.0};
    for (const auto& cyc : part.cycles) {
      const auto j = cyc.size();
      for (std::size_t i = 0; i < j; ++i)
        term *= cval(cyc[i] + 1, cyc[(i + 1) % j] + 1);
      if (projector) {
        Eigen::MatrixXcd prod =
            Eigen::MatrixXcd::Identity(basis.n * basis.n, basis.n * basis.n);
        for (std::size_t i = 0; i < j; ++i)
          prod = prod * P * mul[static_cast<std::size_t>(cyc[i] - 1)];
        term *= prod.trace();
      } else {
        Eigen::MatrixXcd prod = Eigen::MatrixXcd::Identity(basis.n, basis.n);
        for (std::size_t i = 0; i < j; ++i) prod = prod * x[static_cast<std::size_t>(cyc[i] - 1)];
        term *= prod.trace();
      }
    }
    // chain kernels: z -> b1 -> ... -> bm -> w
    int prev = 0;
    for (int b : part.chain) {
      term *= cval(prev, b + 1);
      prev = b + 1;
    }
    term *= cval(prev, 1);
    // chain trace
    if (projector) {
      Eigen::VectorXcd v = P * vec_of(vdata.phi_w);
      for (auto it = part.chain.rbegin(); it != part.chain.rend(); ++it)
        v = P * (mul[static_cast<std::size_t>(*it - 1)] * v);
      term *= (vec_of(vdata.phi_z).adjoint() * v).value();
    } else {
      Eigen::MatrixXcd prod = vdata.phi_z.adjoint();
      for (int b : part.chain) prod = prod * x[static_cast<std::size_t>(b - 1)];
      term *= (prod * vdata.phi_w).trace();
    }
    total += term;
  }
  const cplx pre = std::conj(kernel.endpoint_weight_z * vdata.form_factor_z) *
                   (kernel.endpoint_weight_w * vdata.form_factor_w);
  return pre * total;
}

// ---- raw-pairing oracle ---------------------------------------------------------

OracleResult gaussian_moment_oracle(const std::vector<Eigen::MatrixXcd>& x, const TorusPoint& z,
                                    const TorusPoint& w,
                                    const std::vector<TorusPoint>& insertions,
                                    const VData& vdata, const gaussian::GaussianSpec& spec,
                                    const LieBasisSpec& basis, bool centered) {
  const int n = static_cast<int>(x.size());
  if (n > 4) throw ConfigError("oracle: n <= 4");
  if (static_cast<int>(insertions.size()) != n)
    throw ConfigError("oracle: one insertion point per matrix");
  if (spec.trunc > 6) throw ConfigError("oracle: N <= 6");
  spec.validate();

  const auto T = basis_matrices(basis);
  const int dim = static_cast<int>(T.size());

  // term-count guard
  double perms = 1.0;
  for (int i = 2; i <= n + 1; ++i) perms *= i;
  if (perms * std::pow(double(dim), n + 1) > 1e7)
    throw ConfigError("oracle: term count exceeds 1e7 cap");

  // contraction tables
  std::vector<cplx> EZ(static_cast<std::size_t>(dim)), EW(static_cast<std::size_t>(dim));
  for (int a = 0; a < dim; ++a) {
    EZ[static_cast<std::size_t>(a)] = (vdata.phi_z.adjoint() * T[static_cast<std::size_t>(a)]).trace();
    EW[static_cast<std::size_t>(a)] = (T[static_cast<std::size_t>(a)].adjoint() * vdata.phi_w).trace();
  }
  std::vector<Eigen::MatrixXcd> TUM;  // TUM[j](a,b) = tr(T_a^* x_j T_b)
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXcd t(dim, dim);
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        t(a, b) = (T[static_cast<std::size_t>(a)].adjoint() * x[static_cast<std::size_t>(j)] *
                   T[static_cast<std::size_t>(b)])
                      .trace();
    TUM.push_back(std::move(t));
  }

  // source i at point: 0 -> z, i -> z_{i}; sink j: 0 -> w, j -> z_j
  auto pt = [&](int i, bool source) -> const TorusPoint& {
    if (i == 0) return source ? z : w;
    return insertions[static_cast<std::size_t>(i - 1)];
  };
  const double cov_scale = 2.0 / (spec.scale * spec.scale);
  Eigen::MatrixXcd C(n + 1, n + 1);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      C(i, j) = cov_scale * torus_kernel(spec.smooth, spec.trunc, pt(i, true), pt(j, false));

  std::vector<int> perm(static_cast<std::size_t>(n) + 1);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> inv(static_cast<std::size_t>(n) + 1);
  std::vector<int> label(static_cast<std::size_t>(n) + 1, 0);

  OracleResult res;
  do {
    if (centered) {
      bool self = false;
      for (int i = 1; i <= n; ++i)
        if (perm[static_cast<std::size_t>(i)] == i) {
          self = true;
          break;
        }
      if (self) continue;
    }
    ++res.pairings;
    for (int i = 0; i <= n; ++i) inv[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])] = i;

    cplx kern{1.0, 0.0};
    for (int i = 0; i <= n; ++i) kern *= C(i, perm[static_cast<std::size_t>(i)]);

    // blind sum over basis labels, one label per link (indexed by source)
    std::fill(label.begin(), label.end(), 0);
    cplx lie_sum{0.0, 0.0};
    for (;;) {
      cplx p = EZ[static_cast<std::size_t>(label[0])] *
               EW[static_cast<std::size_t>(label[static_cast<std::size_t>(inv[0])])];
      for (int j = 1; j <= n; ++j)
        p *= TUM[static_cast<std::size_t>(j - 1)](label[static_cast<std::size_t>(inv[static_cast<std::size_t>(j)])],
                                                  label[static_cast<std::size_t>(j)]);
      lie_sum += p;
      int d = 0;
      while (d <= n && ++label[static_cast<std::size_t>(d)] == dim) {
        label[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      if (d > n) break;
    }
    res.value += kern * lie_sum;
  } while (std::next_permutation(perm.begin(), perm.end()));

  res.value *= std::conj(vdata.form_factor_z) * vdata.form_factor_w;
  return res;
}

// ---- Monte Carlo cross-check ------------------------------------------------------

McEstimate moment_mc(const std::vector<Eigen::MatrixXcd>& x, const TorusPoint& z,
                     const TorusPoint& w, const std::vector<TorusPoint>& insertions,
                     const VData& vdata, const gaussian::GaussianSpec& spec,
                     const LieBasisSpec& basis, bool centered, std::uint64_t n_samples,
                     std::uint64_t seed, int workers) {
  const int n = static_cast<int>(x.size());
  gaussian::GaussianSpec gs = spec;
  gs.rank = basis.dim();
  const auto T = basis_matrices(basis);

  // evaluation points and their mode tables e^{i k.p} / (2 pi)
  std::vector<TorusPoint> pts{z, w};
  pts.insert(pts.end(), insertions.begin(), insertions.end());
  const int N = spec.trunc;
  const int side = 2 * N + 1, M = side * side;
  Eigen::MatrixXcd modes(static_cast<Eigen::Index>(pts.size()), M);
  for (std::size_t p = 0; p < pts.size(); ++p)
    for (int k1 = -N; k1 <= N; ++k1)
      for (int k2 = -N; k2 <= N; ++k2) {
        const double ph = k1 * pts[p].x1 + k2 * pts[p].x2;
        modes(static_cast<Eigen::Index>(p), (k1 + N) * side + (k2 + N)) =
            cplx{std::cos(ph), std::sin(ph)} / (2.0 * M_PI);
      }

  // exact means for the centering
  std::vector<cplx> hmean(static_cast<std::size_t>(n), cplx{0.0, 0.0});
  if (centered) {
    for (int j = 0; j < n; ++j) {
      cplx tsum{0.0, 0.0};
      for (const auto& t : T) tsum += (t.adjoint() * x[static_cast<std::size_t>(j)] * t).trace();
      hmean[static_cast<std::size_t>(j)] =
          tsum * 2.0 / (spec.scale * spec.scale) *
          torus_kernel(spec.smooth, spec.trunc, insertions[static_cast<std::size_t>(j)],
                       insertions[static_cast<std::size_t>(j)]);
    }
  }

  std::vector<cplx> vals(n_samples);
  fsm::mc::parallel_for(n_samples, workers, [&](std::uint64_t i) {
    const auto comps = gaussian::sample_smoothed(gs, seed, i);
    // B(p) = sum_a (sum_k c_{a,k} e_k(p)) T_a
    std::vector<Eigen::MatrixXcd> B(pts.size(), Eigen::MatrixXcd::Zero(basis.n, basis.n));
    for (int a = 0; a < gs.rank; ++a) {
      const auto& coef = comps[static_cast<std::size_t>(a)].coeffs();
      for (std::size_t p = 0; p < pts.size(); ++p) {
        cplx s{0.0, 0.0};
        for (int m = 0; m < M; ++m) s += coef[static_cast<std::size_t>(m)] * modes(static_cast<Eigen::Index>(p), m);
        B[p] += s * T[static_cast<std::size_t>(a)];
      }
    }
    cplx prod = std::conj(vdata.form_factor_z * (B[0].adjoint() * vdata.phi_z).trace()) *
                (vdata.form_factor_w * (B[1].adjoint() * vdata.phi_w).trace());
    for (int j = 0; j < n; ++j) {
      const cplx h =
          (B[static_cast<std::size_t>(j + 2)].adjoint() * x[static_cast<std::size_t>(j)] *
           B[static_cast<std::size_t>(j + 2)])
              .trace() -
          hmean[static_cast<std::size_t>(j)];
      prod *= h;
    }
    vals[i] = prod;
  });
  return fsm::mc::reduce(vals);
}

}  // namespace fsm::wick
