#include "fsm/wzlg.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "fsm/detkit.hpp"
#include "fsm/errors.hpp"
#include "fsm/gaussian.hpp"
#include "fsm/rng.hpp"

namespace fsm::wzlg {

namespace {

constexpr double kResidualTol = 1e-9;  // L2 norm of F(phi) - eta
constexpr double kDedupTol = 1e-6;
constexpr int kMaxNewtonIters = 60;
constexpr int kMaxHalvings = 40;

std::vector<cplx> differentiate(const std::vector<cplx>& p) {
  std::vector<cplx> d;
  for (std::size_t j = 1; j < p.size(); ++j) d.push_back(static_cast<double>(j) * p[j]);
  if (d.empty()) d.push_back(cplx{0.0, 0.0});
  return d;
}

cplx horner(const std::vector<cplx>& p, cplx z) {
  cplx acc = p.back();
  for (std::size_t j = p.size() - 1; j-- > 0;) acc = acc * z + p[j];
  return acc;
}

}  // namespace

WzlgModel make_model(std::vector<cplx> poly, double s, double t, int trunc, cplx base) {
  if (poly.size() < 3) throw ConfigError("wzlg: P must have degree >= 2");
  if (poly.back() == cplx{0.0, 0.0}) throw ConfigError("wzlg: leading coefficient of P is zero");
  if (!(s > 0.0)) throw ConfigError("wzlg: s must be > 0");
  if (!(t > 0.0)) throw ConfigError("wzlg: t must be > 0");
  if (trunc < 1) throw ConfigError("wzlg: N must be >= 1");

  WzlgModel m;
  m.poly = std::move(poly);
  m.s = s;
  m.t = t;
  m.trunc = trunc;
  m.base = base;
  m.dp = differentiate(m.poly);
  m.ddp = differentiate(m.dp);

  if (std::abs(horner(m.ddp, base)) <= 1e-8)
    throw ConfigError("wzlg: P''(base) vanishes, base point unusable");

  // spot-check P' against finite differences of P
  for (int trial = 0; trial < 5; ++trial) {
    const cplx z{rng::uniform_range(rng::key(0xd1ffu, trial, 0), -1.5, 1.5),
                 rng::uniform_range(rng::key(0xd1ffu, trial, 1), -1.5, 1.5)};
    const double h = 1e-6;
    const cplx fd = (horner(m.poly, z + h) - horner(m.poly, z - h)) / (2.0 * h);
    if (std::abs(fd - horner(m.dp, z)) > 1e-4 * std::max(1.0, std::abs(fd)))
      throw ConfigError("wzlg: derivative polynomial inconsistent with P");
  }
  return m;
}

std::vector<cplx> polynomial_roots(const std::vector<cplx>& p) {
  int deg = static_cast<int>(p.size()) - 1;
  while (deg > 0 && p[static_cast<std::size_t>(deg)] == cplx{0.0, 0.0}) --deg;
  std::vector<cplx> roots;
  if (deg < 1) return roots;

  Eigen::MatrixXcd comp = Eigen::MatrixXcd::Zero(deg, deg);
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  for (int i = 0; i < deg; ++i)
    comp(i, deg - 1) = -p[static_cast<std::size_t>(i)] / p[static_cast<std::size_t>(deg)];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(comp, false);

  const auto ddp = differentiate(p);
  for (int i = 0; i < deg; ++i) {
    cplx r = es.eigenvalues()[i];
    // polish: drives |P'(r)| to the floor (often exactly 0 in double)
    for (int it = 0; it < 50; ++it) {
      const cplx f = horner(p, r);
      if (f == cplx{0.0, 0.0}) break;
      const cplx d = horner(ddp, r);
      if (d == cplx{0.0, 0.0}) break;
      const cplx rn = r - f / d;
      if (std::abs(horner(p, rn)) >= std::abs(f)) break;
      r = rn;
    }
    roots.push_back(r);
  }
  return roots;
}

std::vector<cplx> critical_points(const WzlgModel& model) { return polynomial_roots(model.dp); }

SpectralField apply_F(const WzlgModel& model, const SpectralField& phi) {
  if (phi.trunc() != model.trunc) throw ConfigError("apply_F: truncation mismatch");
  const SpectralField nl = spectral::conjugate_field(spectral::apply_polynomial(phi, model.dp));
  return spectral::laplacian_power(spectral::del(phi) + nl, model.s);
}

namespace {

// field conj(P''(phi)) used as the multiplier in both derivative variants
SpectralField curvature_field(const WzlgModel& model, const SpectralField& phi) {
  return spectral::conjugate_field(spectral::apply_polynomial(phi, model.ddp));
}

RealifiedOperator assemble_derivative(const WzlgModel& model, const SpectralField& chi,
                                      DerivativeVariant variant) {
  const int N = model.trunc;
  RealifiedOperator mult =
      spectral::multiplication_operator(chi, variant == DerivativeVariant::kFrechet);
  RealifiedOperator dz = spectral::diagonal_multiplier_operator(N, spectral::del_multipliers(N));
  RealifiedOperator lap =
      spectral::diagonal_real_operator(N, spectral::laplacian_multipliers(N, model.s));
  RealifiedOperator out;
  out.trunc = N;
  out.mat = lap.mat * (dz.mat + mult.mat);
  return out;
}

// complex M x M version of the Literal (complex-linear) derivative
Eigen::MatrixXcd complex_derivative(const WzlgModel& model, const SpectralField& chi) {
  const int N = model.trunc;
  const int M = chi.modes();
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(M, M);
  const auto dz = spectral::del_multipliers(N);
  const auto lap = spectral::laplacian_multipliers(N, model.s);
  for (int m = 0; m < M; ++m) {
    const auto fm = chi.freq(m);
    for (int k = 0; k < M; ++k) {
      const auto fk = chi.freq(k);
      const int d1 = fm.k1 - fk.k1, d2 = fm.k2 - fk.k2;
      if (std::abs(d1) <= N && std::abs(d2) <= N) D(m, k) = chi.at({d1, d2});
    }
    D(m, m) += dz[static_cast<std::size_t>(m)];
  }
  for (int m = 0; m < M; ++m) D.row(m) *= lap[static_cast<std::size_t>(m)];
  return D;
}

}  // namespace

RealifiedOperator derivative_operator(const WzlgModel& model, const SpectralField& phi,
                                      DerivativeVariant variant) {
  if (phi.trunc() != model.trunc) throw ConfigError("derivative_operator: truncation mismatch");
  return assemble_derivative(model, curvature_field(model, phi), variant);
}

RealifiedOperator k_operator(const WzlgModel& model, const SpectralField& phi,
                             DerivativeVariant variant) {
  const SpectralField phi0 = spectral::constant_field(model.trunc, model.base);
  const RealifiedOperator D0 = derivative_operator(model, phi0, variant);

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(D0.mat);
  if (lu.rcond() < 1e-12)
    throw SingularBasePoint("wzlg: base-point derivative is numerically singular");

  // D_phi - D_phi0 = (1-Lap)^s M(chi - chi0): difference of the
  // multiplication parts only, so K(phi0, phi0) is exactly zero.
  const SpectralField dchi = curvature_field(model, phi) - curvature_field(model, phi0);
  RealifiedOperator mult =
      spectral::multiplication_operator(dchi, variant == DerivativeVariant::kFrechet);
  RealifiedOperator lap = spectral::diagonal_real_operator(
      model.trunc, spectral::laplacian_multipliers(model.trunc, model.s));

  RealifiedOperator K;
  K.trunc = model.trunc;
  K.mat = lu.solve(lap.mat * mult.mat);
  return K;
}

cplx psi_phase(const WzlgModel& model, const SpectralField& phi, DerivativeVariant variant) {
  if (variant == DerivativeVariant::kFrechet) {
    const RealifiedOperator K = k_operator(model, phi, variant);
    const auto d = detkit::det_k_real(K.mat, 3);
    const double log_tol = std::log(detkit::default_phase_tol(K.dim()));
    if (d.sign == 0 || d.log_abs <= log_tol)
      throw NearZeroDeterminant("wzlg: det_3 at or below tolerance (near the singular set)");
    return {static_cast<double>(d.sign), 0.0};
  }
  // Literal variant: the operator is complex-linear, take the complex det_3.
  const SpectralField phi0 = spectral::constant_field(model.trunc, model.base);
  const Eigen::MatrixXcd D0 = complex_derivative(model, curvature_field(model, phi0));
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(D0);
  if (lu.rcond() < 1e-12)
    throw SingularBasePoint("wzlg: base-point derivative is numerically singular");
  const Eigen::MatrixXcd D = complex_derivative(model, curvature_field(model, phi));
  const Eigen::MatrixXcd K = lu.solve(D) - Eigen::MatrixXcd::Identity(D.rows(), D.cols());
  const cplx d3 = detkit::det_k(detkit::OperatorMatrix::from_complex(K), 3);
  return detkit::phase(d3, detkit::default_phase_tol(static_cast<int>(K.rows())));
}

// ---- pullback sampling --------------------------------------------------

namespace {

// Shared per-model state for the Newton pipelines.
struct Workspace {
  const WzlgModel* model;
  std::vector<cplx> roots;  // critical points of P
  std::vector<double> lap;  // (1+|k|^2)^s
  RealifiedOperator dz_op;
  Eigen::MatrixXd lap_mat;

  explicit Workspace(const WzlgModel& m) : model(&m) {
    roots = critical_points(m);
    lap = spectral::laplacian_multipliers(m.trunc, m.s);
    dz_op = spectral::diagonal_multiplier_operator(m.trunc, spectral::del_multipliers(m.trunc));
    lap_mat = spectral::diagonal_real_operator(m.trunc, lap).mat;
  }

  Eigen::MatrixXd jacobian(const SpectralField& phi) const {
    const SpectralField chi = curvature_field(*model, phi);
    return lap_mat * (dz_op.mat + spectral::multiplication_operator(chi, true).mat);
  }
};

double residual_norm(const SpectralField& r) { return spectral::sobolev_norm(r, 0.0); }

// One damped-Newton run; returns the converged field or nullopt.
std::optional<SpectralField> newton_solve(const Workspace& ws, const SpectralField& eta,
                                          SpectralField phi) {
  const WzlgModel& m = *ws.model;
  SpectralField r = apply_F(m, phi) - eta;
  double rn = residual_norm(r);
  for (int it = 0; it < kMaxNewtonIters; ++it) {
    if (rn <= kResidualTol) return phi;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(ws.jacobian(phi));
    const Eigen::VectorXd step = lu.solve(-spectral::realify(r));
    if (!step.allFinite()) return std::nullopt;
    double lam = 1.0;
    bool improved = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      SpectralField cand = spectral::unrealify(m.trunc, spectral::realify(phi) + lam * step);
      SpectralField rc = apply_F(m, cand) - eta;
      const double rcn = residual_norm(rc);
      if (rcn < rn) {
        phi = std::move(cand);
        r = std::move(rc);
        rn = rcn;
        improved = true;
        break;
      }
      lam *= 0.5;
    }
    if (!improved) return std::nullopt;
  }
  return rn <= kResidualTol ? std::optional<SpectralField>(phi) : std::nullopt;
}

SpectralField random_start(const WzlgModel& m, cplx center, std::uint64_t k) {
  SpectralField f(m.trunc);
  for (int i = 0; i < f.modes(); ++i) {
    const auto pr = rng::normal_pair(rng::chain(k, static_cast<std::uint64_t>(i)));
    f.coeffs()[static_cast<std::size_t>(i)] = {pr.a, pr.b};
  }
  f.at({0, 0}) += center;
  return f;
}

void dedup_insert(std::vector<SpectralField>& set, const SpectralField& phi) {
  for (const auto& b : set) {
    const SpectralField d = b - phi;
    if (spectral::sobolev_norm(d, 0.0) <= kDedupTol) return;
  }
  set.push_back(phi);
}

bool same_branch_set(const std::vector<SpectralField>& a, const std::vector<SpectralField>& b) {
  if (a.size() != b.size()) return false;
  for (const auto& x : a) {
    bool found = false;
    for (const auto& y : b)
      if (spectral::sobolev_norm(x - y, 0.0) <= 10 * kDedupTol) {
        found = true;
        break;
      }
    if (!found) return false;
  }
  return true;
}

PullbackSample sample_with_workspace(const Workspace& ws, std::uint64_t seed,
                                     std::uint64_t index, int n_starts) {
  const WzlgModel& m = *ws.model;
  gaussian::GaussianSpec gs;
  gs.trunc = m.trunc;
  gs.scale = m.t;
  gs.smooth = 0.0;
  gs.rank = 1;
  const SpectralField eta = gaussian::sample_white_noise(gs, seed, index)[0];

  PullbackSample out;
  out.stats.n_starts = 0;

  // completeness monitor: two independently seeded batches
  std::vector<SpectralField> batch[2];
  for (int half = 0; half < 2; ++half) {
    // deterministic starts at the critical constants
    for (std::size_t j = 0; j < ws.roots.size(); ++j) {
      ++out.stats.n_starts;
      auto sol = newton_solve(ws, eta, spectral::constant_field(m.trunc, ws.roots[j]));
      if (sol) {
        ++out.stats.n_converged;
        dedup_insert(batch[half], *sol);
      } else {
        ++out.stats.n_failed;
      }
    }
    const int randoms = std::max(0, n_starts / 2);
    for (int sidx = 0; sidx < randoms; ++sidx) {
      ++out.stats.n_starts;
      const cplx center = ws.roots.empty()
                              ? m.base
                              : ws.roots[static_cast<std::size_t>(sidx) % ws.roots.size()];
      const auto k = rng::key(seed ^ 0x9b97f4a7c15ull, index,
                              static_cast<std::uint64_t>(half) + 7, static_cast<std::uint64_t>(sidx));
      auto sol = newton_solve(ws, eta, random_start(m, center, k));
      if (sol) {
        ++out.stats.n_converged;
        dedup_insert(batch[half], *sol);
      } else {
        ++out.stats.n_failed;
      }
    }
  }
  out.stats.batches_agree = same_branch_set(batch[0], batch[1]);
  out.branches = std::move(batch[0]);
  for (const auto& b : batch[1]) dedup_insert(out.branches, b);
  return out;
}

}  // namespace

PullbackSample pullback_sample(const WzlgModel& model, std::uint64_t seed, std::uint64_t index,
                               int n_starts) {
  Workspace ws(model);
  return sample_with_workspace(ws, seed, index, n_starts);
}

ExperimentResult run_experiment(const WzlgModel& model, std::uint64_t n_samples,
                                std::uint64_t seed, int n_starts, DerivativeVariant variant,
                                int workers) {
  Workspace ws(model);

  // base-point LU shared across draws for the phase evaluation
  const SpectralField phi0 = spectral::constant_field(model.trunc, model.base);
  const SpectralField chi0 = curvature_field(model, phi0);
  const RealifiedOperator D0 = assemble_derivative(model, chi0, variant);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu0(D0.mat);
  if (lu0.rcond() < 1e-12)
    throw SingularBasePoint("wzlg: base-point derivative is numerically singular");

  struct DrawResult {
    int branch_count = 0;
    cplx phase_sum{0.0, 0.0};
    std::uint64_t failures = 0;
    std::uint64_t near_zero = 0;
    bool mismatch = false;
  };
  std::vector<DrawResult> draws(n_samples);

  fsm::mc::parallel_for(n_samples, workers, [&](std::uint64_t i) {
    DrawResult d;
    const PullbackSample ps = sample_with_workspace(ws, seed, i, n_starts);
    d.branch_count = static_cast<int>(ps.branches.size());
    d.failures = static_cast<std::uint64_t>(ps.stats.n_failed);
    d.mismatch = !ps.stats.batches_agree;
    for (const auto& phi : ps.branches) {
      try {
        if (variant == DerivativeVariant::kFrechet) {
          const SpectralField dchi = curvature_field(model, phi) - chi0;
          Eigen::MatrixXd Km =
              lu0.solve(ws.lap_mat * spectral::multiplication_operator(dchi, true).mat);
          const auto dk = detkit::det_k_real(Km, 3);
          const double log_tol =
              std::log(detkit::default_phase_tol(static_cast<int>(Km.rows())));
          if (dk.sign == 0 || dk.log_abs <= log_tol)
            throw NearZeroDeterminant("near-singular branch");
          d.phase_sum += cplx{static_cast<double>(dk.sign), 0.0};
        } else {
          d.phase_sum += psi_phase(model, phi, variant);
        }
      } catch (const NearZeroDeterminant&) {
        ++d.near_zero;
      }
    }
    draws[i] = d;
  });

  ExperimentResult res;
  std::vector<cplx> mass_vals(n_samples), phase_vals(n_samples);
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    mass_vals[i] = {static_cast<double>(draws[i].branch_count), 0.0};
    phase_vals[i] = draws[i].phase_sum;
    res.branch_histogram[draws[i].branch_count]++;
    res.newton_failures += draws[i].failures;
    res.near_zero_phases += draws[i].near_zero;
    if (draws[i].mismatch) ++res.draws_with_batch_mismatch;
  }
  res.mass = fsm::mc::reduce(mass_vals);
  res.phase_integral = fsm::mc::reduce(phase_vals);
  return res;
}

McEstimate estimate_mass(const WzlgModel& model, std::uint64_t n_samples, std::uint64_t seed,
                         int n_starts, int workers) {
  return run_experiment(model, n_samples, seed, n_starts, DerivativeVariant::kFrechet, workers)
      .mass;
}

McEstimate estimate_phase_integral(const WzlgModel& model, std::uint64_t n_samples,
                                   std::uint64_t seed, DerivativeVariant variant, int n_starts,
                                   int workers) {
  return run_experiment(model, n_samples, seed, n_starts, variant, workers).phase_integral;
}

}  // namespace fsm::wzlg
