#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "fsm/mc.hpp"
#include "fsm/spectral.hpp"

// The Wess-Zumino-Landau-Ginzburg map on a truncated torus field space,
//
//   F(phi) = (1 - Lap)^s ( d/dz phi + conj(P'(phi)) ),
//
// its real-linear derivative, the compact K-operator relative to a constant
// base point, the det_3 phase, and Monte Carlo estimators for the mass and
// phase integral of the pullback measure (eta drawn from white noise at
// scale t, branches found by damped-Newton multistart).

namespace fsm::wzlg {

using cplx = std::complex<double>;
using spectral::RealifiedOperator;
using spectral::SpectralField;

// The written form of the derivative multiplies delta by conj(P''(phi));
// the true derivative of phi -> conj(P'(phi)) multiplies conj(delta)
// instead.  Both are kept: Frechet is the default (it is what Newton and
// the signed-density analogy need), Literal is the comparison variant.
enum class DerivativeVariant { kFrechet, kLiteral };

struct WzlgModel {
  std::vector<cplx> poly;  // P, coefficients c0..cd, d >= 2
  double s = 1.0;          // smoothing exponent > 0
  double t = 1.0;          // scale > 0
  int trunc = 1;           // N
  cplx base{0.0, 0.0};     // base point phi_0 == base, P''(base) != 0

  std::vector<cplx> dp;    // P'
  std::vector<cplx> ddp;   // P''
};

// Validates, differentiates, and finite-difference spot-checks P'.
WzlgModel make_model(std::vector<cplx> poly, double s, double t, int trunc, cplx base);

// Complex roots via the companion matrix, Newton-polished in double
// precision (polishing usually lands on an exact double root when one
// exists, e.g. +-1 for z^2 - 1).
std::vector<cplx> polynomial_roots(const std::vector<cplx>& p);

// Roots of P'.
std::vector<cplx> critical_points(const WzlgModel& model);

SpectralField apply_F(const WzlgModel& model, const SpectralField& phi);

RealifiedOperator derivative_operator(const WzlgModel& model, const SpectralField& phi,
                                      DerivativeVariant variant);

// K = D_{phi0}^{-1} D_phi - 1, assembled as D_{phi0}^{-1} (D_phi - D_{phi0})
// so that K(phi0, phi0) vanishes exactly.  Throws SingularBasePoint when
// D_{phi0} has condition number above 1e12.
RealifiedOperator k_operator(const WzlgModel& model, const SpectralField& phi,
                             DerivativeVariant variant);

// phase(det_3(1 + K)).  For the Frechet (realified) variant the determinant
// is real and the result is exactly +-1; for the Literal variant the
// complex-linear operator is used and the phase lives on the unit circle.
cplx psi_phase(const WzlgModel& model, const SpectralField& phi, DerivativeVariant variant);

struct NewtonStats {
  int n_starts = 0;
  int n_converged = 0;
  int n_failed = 0;
  bool batches_agree = true;  // two independent start batches found the same set
};

struct PullbackSample {
  std::vector<SpectralField> branches;
  NewtonStats stats;
};

// Solve F(phi) = eta for one white-noise draw eta; multistart Newton from
// n_starts random fields plus the constant fields at the roots of P'.
PullbackSample pullback_sample(const WzlgModel& model, std::uint64_t seed, std::uint64_t index,
                               int n_starts);

struct ExperimentResult {
  McEstimate mass;            // branch count per draw
  McEstimate phase_integral;  // sum of branch phases per draw
  std::map<int, std::uint64_t> branch_histogram;
  std::uint64_t newton_failures = 0;
  std::uint64_t near_zero_phases = 0;
  std::uint64_t draws_with_batch_mismatch = 0;
};

ExperimentResult run_experiment(const WzlgModel& model, std::uint64_t n_samples,
                                std::uint64_t seed, int n_starts, DerivativeVariant variant,
                                int workers = 1);

McEstimate estimate_mass(const WzlgModel& model, std::uint64_t n_samples, std::uint64_t seed,
                         int n_starts = 64, int workers = 1);
McEstimate estimate_phase_integral(const WzlgModel& model, std::uint64_t n_samples,
                                   std::uint64_t seed, DerivativeVariant variant,
                                   int n_starts = 64, int workers = 1);

}  // namespace fsm::wzlg
