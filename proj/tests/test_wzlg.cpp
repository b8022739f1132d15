#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsm/detkit.hpp"
#include "fsm/errors.hpp"
#include "fsm/gaussian.hpp"
#include "fsm/wzlg.hpp"

using namespace fsm::wzlg;
using fsm::gaussian::random_field;
using fsm::spectral::constant_field;
using fsm::spectral::SpectralField;
using fsm::spectral::realify;
using fsm::spectral::sobolev_norm;
using fsm::spectral::unrealify;

namespace {

// P = z^3/3 - z: P' = z^2 - 1 (roots +-1), P'' = 2z
WzlgModel cubic_model(int N, double s = 2.0, double t = 1.0) {
  return make_model({{0, 0}, {-1, 0}, {0, 0}, {1.0 / 3.0, 0}}, s, t, N, {1.0, 0.0});
}

// P = z^2/2: P' = z, P'' = 1
WzlgModel quadratic_model(int N, double s = 1.0, double t = 1.0) {
  return make_model({{0, 0}, {0, 0}, {0.5, 0}}, s, t, N, {0.0, 0.0});
}

double op_norm_of_inverse(const Eigen::MatrixXd& A) {
  // power iteration on (A^{-1})^T A^{-1} via one LU
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
  double lam = 0.0;
  for (int it = 0; it < 30; ++it) {
    Eigen::VectorXd w = lu.solve(v);
    w = lu.transpose().solve(w);
    lam = w.norm();
    v = w / lam;
  }
  return std::sqrt(lam);  // ~ sigma_max(A^{-1}) = 1/sigma_min(A)
}

}  // namespace

TEST_CASE("model construction") {
  CHECK_THROWS_AS(make_model({{0, 0}, {1, 0}}, 1.0, 1.0, 2, {0, 0}), fsm::ConfigError);
  // P''(base) = 0 at base 0 for the cubic
  CHECK_THROWS_AS(make_model({{0, 0}, {-1, 0}, {0, 0}, {1.0 / 3.0, 0}}, 2.0, 1.0, 2, {0, 0}),
                  fsm::ConfigError);
  const auto m = cubic_model(3);
  CHECK(m.dp.size() == 3);
  CHECK(m.ddp.size() == 2);
}

TEST_CASE("polynomial roots are polished to exact doubles where possible") {
  // z^2 - 1
  const auto roots = polynomial_roots({{-1.0, 0.0}, {0.0, 0.0}, {1.0, 0.0}});
  REQUIRE(roots.size() == 2);
  for (const auto& r : roots) CHECK(std::abs(std::abs(r.real()) - 1.0) == 0.0);
}

TEST_CASE("apply_F") {
  SUBCASE("quadratic P at phi = 0 gives 0") {
    const auto m = quadratic_model(3);
    CHECK(sobolev_norm(apply_F(m, SpectralField(3)), 0.0) == 0.0);
  }

  SUBCASE("vanishes exactly at every constant root of P'") {
    for (int N : {2, 4}) {
      for (double s : {1.0, 2.0}) {
        const auto m = cubic_model(N, s);
        for (const auto& r : critical_points(m))
          CHECK(sobolev_norm(apply_F(m, constant_field(N, r)), 0.0) == 0.0);
      }
    }
  }

  SUBCASE("P' = phi on a real constant is the constant itself") {
    const auto m = quadratic_model(2);
    const auto out = apply_F(m, constant_field(2, {0.7, 0.0}));
    CHECK(std::abs(out.at({0, 0}) - fsm::spectral::cplx{0.7, 0.0}) <= 1e-15);
  }
}

TEST_CASE("derivative_operator") {
  SUBCASE("frechet variant matches central finite differences") {
    const auto m = cubic_model(3, 1.5);
    for (int trial = 0; trial < 5; ++trial) {
      const auto phi = random_field(3, 100 + trial, 1.0);
      const auto delta = random_field(3, 200 + trial, 1.0);
      const auto D = derivative_operator(m, phi, DerivativeVariant::kFrechet);
      const double h = 1e-6;
      SpectralField dplus = phi, dminus = phi;
      dplus += unrealify(3, h * realify(delta));
      dminus -= unrealify(3, h * realify(delta));
      const Eigen::VectorXd fd =
          (realify(apply_F(m, dplus)) - realify(apply_F(m, dminus))) / (2.0 * h);
      const Eigen::VectorXd lin = D.mat * realify(delta);
      CHECK((fd - lin).norm() <= 1e-5 * std::max(1.0, lin.norm()));
    }
  }

  SUBCASE("quadratic P: operator independent of phi") {
    const auto m = quadratic_model(3);
    const auto D0 = derivative_operator(m, SpectralField(3), DerivativeVariant::kFrechet);
    const auto D1 = derivative_operator(m, random_field(3, 5, 1.0), DerivativeVariant::kFrechet);
    CHECK((D0.mat - D1.mat).norm() == 0.0);
  }

  SUBCASE("literal and frechet agree on Hermitian-symmetric fields when P'' is a real constant") {
    const auto m = quadratic_model(2);
    const auto phi = random_field(2, 9, 1.0);
    const auto Df = derivative_operator(m, phi, DerivativeVariant::kFrechet);
    const auto Dl = derivative_operator(m, phi, DerivativeVariant::kLiteral);
    CHECK((Df.mat - Dl.mat).norm() > 0.0);
    for (int trial = 0; trial < 4; ++trial) {
      auto d = random_field(2, 300 + trial, 1.0);
      auto sym = d + fsm::spectral::conjugate_field(d);  // real-valued function
      const Eigen::VectorXd a = Df.mat * realify(sym);
      const Eigen::VectorXd b = Dl.mat * realify(sym);
      CHECK((a - b).norm() <= 1e-12 * std::max(1.0, a.norm()));
    }
  }

  SUBCASE("quadratic operator is uniformly invertible across truncations") {
    // d/dz + conj() has realified singular values bounded below; the mode
    // pairing gives 1 + |k|^2/4 on each (k,-k) block
    for (int N : {2, 4, 8, 16}) {
      const auto m = quadratic_model(N, 0.0 + 1.0);  // s = 1
      // strip the (1-Lap)^s factor: test the core d/dz + conj() map
      WzlgModel flat = m;
      flat.s = 1e-12;  // s > 0 required; effectively flat
      const auto D = derivative_operator(flat, SpectralField(N), DerivativeVariant::kFrechet);
      const double smin = 1.0 / op_norm_of_inverse(D.mat);
      INFO("N=", N, " smin=", smin);
      CHECK(smin >= 0.5);
    }
  }
}

TEST_CASE("k_operator") {
  SUBCASE("vanishes exactly at the base point") {
    const auto m = cubic_model(3);
    const auto K = k_operator(m, constant_field(3, m.base), DerivativeVariant::kFrechet);
    CHECK(K.mat.norm() == 0.0);
  }

  SUBCASE("quadratic P gives K = 0 for every phi") {
    const auto m = quadratic_model(3);
    const auto K = k_operator(m, random_field(3, 17, 1.0), DerivativeVariant::kFrechet);
    CHECK(K.mat.norm() == 0.0);
  }

  SUBCASE("Schatten 3-norm is stable across truncations for a fixed smooth field") {
    // fixed low-mode field, embedded at increasing truncation
    auto probe = [](int N) {
      const auto m = cubic_model(N, 2.0);
      SpectralField phi = constant_field(N, {0.8, 0.1});
      phi.at({1, 0}) = {0.3, -0.2};
      phi.at({0, -1}) = {-0.15, 0.25};
      const auto K = k_operator(m, phi, DerivativeVariant::kFrechet);
      return fsm::detkit::schatten_norm(fsm::detkit::OperatorMatrix::from_realified(K), 3);
    };
    const double s8 = probe(8), s12 = probe(12);
    INFO("|K|_3: N=8: ", s8, "  N=12: ", s12);
    CHECK(std::abs(s12 - s8) / s8 < 0.10);
  }
}

TEST_CASE("psi_phase") {
  SUBCASE("+1 at the base point, both variants") {
    const auto m = cubic_model(3);
    const auto phi0 = constant_field(3, m.base);
    CHECK(psi_phase(m, phi0, DerivativeVariant::kFrechet) == fsm::spectral::cplx{1.0, 0.0});
    CHECK(std::abs(psi_phase(m, phi0, DerivativeVariant::kLiteral) -
                   fsm::spectral::cplx{1.0, 0.0}) <= 1e-12);
  }

  SUBCASE("quadratic P: +1 everywhere") {
    const auto m = quadratic_model(3);
    CHECK(psi_phase(m, random_field(3, 23, 1.0), DerivativeVariant::kFrechet) ==
          fsm::spectral::cplx{1.0, 0.0});
  }

  SUBCASE("frechet phase squares to one") {
    const auto m = cubic_model(3);
    for (int trial = 0; trial < 5; ++trial) {
      auto phi = constant_field(3, m.base) +
                 fsm::spectral::cplx{0.15, 0.0} * random_field(3, 400 + trial, 1.0);
      const auto z = psi_phase(m, phi, DerivativeVariant::kFrechet);
      CHECK(z.imag() == 0.0);
      CHECK(z.real() * z.real() == 1.0);
    }
  }

  SUBCASE("real-LU route agrees with the eigenvalue route") {
    const auto m = cubic_model(3);
    for (int trial = 0; trial < 5; ++trial) {
      const auto phi = constant_field(3, m.base) +
                       fsm::spectral::cplx{0.5, 0.0} * random_field(3, 500 + trial, 1.0);
      const auto K = k_operator(m, phi, DerivativeVariant::kFrechet);
      const auto fast = psi_phase(m, phi, DerivativeVariant::kFrechet);
      const auto slow = fsm::detkit::phase(
          fsm::detkit::det_k(fsm::detkit::OperatorMatrix::from_realified(K), 3),
          fsm::detkit::default_phase_tol(K.dim()));
      CHECK(std::abs(fast - slow) <= 1e-8);
    }
  }
}

TEST_CASE("pullback_sample") {
  SUBCASE("quadratic P: exactly one branch, equal to the direct linear solve") {
    const auto m = quadratic_model(3, 1.0, 1.0);
    for (std::uint64_t draw = 0; draw < 3; ++draw) {
      const auto ps = pullback_sample(m, 77, draw, 8);
      REQUIRE(ps.branches.size() == 1);
      CHECK(ps.stats.batches_agree);
      // oracle: solve the realified linear system D phi = eta directly
      fsm::gaussian::GaussianSpec gs;
      gs.trunc = 3;
      gs.scale = 1.0;
      const auto eta = fsm::gaussian::sample_white_noise(gs, 77, draw)[0];
      const auto D = derivative_operator(m, SpectralField(3), DerivativeVariant::kFrechet);
      const auto direct = unrealify(3, D.mat.partialPivLu().solve(realify(eta)));
      CHECK(sobolev_norm(ps.branches[0] - direct, 0.0) <= 1e-8);
    }
  }

  SUBCASE("cubic P at eta = 0 finds the constant branches at the roots of P'") {
    // eta = 0 is not a white-noise draw; drive Newton directly via the
    // constant starts by sampling with a huge t (eta ~ 0)
    const auto m = cubic_model(3, 2.0, 1e8);
    const auto ps = pullback_sample(m, 5, 0, 16);
    bool found_plus = false, found_minus = false;
    for (const auto& b : ps.branches) {
      if (sobolev_norm(b - constant_field(3, {1.0, 0.0}), 0.0) <= 1e-3) found_plus = true;
      if (sobolev_norm(b - constant_field(3, {-1.0, 0.0}), 0.0) <= 1e-3) found_minus = true;
    }
    CHECK(found_plus);
    CHECK(found_minus);
  }

  SUBCASE("branch fields concentrate near the critical constants as t grows") {
    double dist[3];
    int idx = 0;
    for (double t : {1.0, 4.0, 16.0}) {
      const auto m = cubic_model(3, 2.0, t);
      double worst = 0.0;
      for (std::uint64_t draw = 0; draw < 4; ++draw) {
        const auto ps = pullback_sample(m, 99, draw, 12);
        for (const auto& b : ps.branches) {
          double best = 1e300;
          for (const auto& r : critical_points(m))
            best = std::min(best, sobolev_norm(b - constant_field(3, r), 0.0));
          worst = std::max(worst, best);
        }
      }
      dist[idx++] = worst;
    }
    // reported, not asserted: the trend is monotone for these seeds
    MESSAGE("max distance to critical constants at t=1,4,16: ", dist[0], " ", dist[1], " ",
            dist[2]);
    CHECK(dist[2] < dist[0]);
  }
}

TEST_CASE("estimators") {
  SUBCASE("quadratic P: mass exactly 1, phase integral exactly +1") {
    const auto m = quadratic_model(3);
    const auto res = run_experiment(m, 20, 7, 8, DerivativeVariant::kFrechet);
    CHECK(res.mass.mean == fsm::spectral::cplx{1.0, 0.0});
    CHECK(res.mass.stderr_ == 0.0);
    CHECK(res.phase_integral.mean == fsm::spectral::cplx{1.0, 0.0});
    CHECK(res.phase_integral.stderr_ == 0.0);
    CHECK(res.branch_histogram.at(1) == 20);
    CHECK(res.newton_failures == 0);
  }

  SUBCASE("n = 1 draw reports that draw's branch count") {
    const auto m = cubic_model(3, 2.0, 8.0);
    const auto mass = estimate_mass(m, 1, 11, 8);
    CHECK(mass.n == 1);
    CHECK(mass.mean.real() == std::floor(mass.mean.real()));
    CHECK(mass.mean.real() >= 1.0);
  }

  SUBCASE("worker count leaves the estimates bit-identical") {
    const auto m = cubic_model(2, 2.0, 6.0);
    const auto a = run_experiment(m, 6, 13, 8, DerivativeVariant::kFrechet, 1);
    const auto b = run_experiment(m, 6, 13, 8, DerivativeVariant::kFrechet, 2);
    CHECK(a.mass.mean == b.mass.mean);
    CHECK(a.phase_integral.mean == b.phase_integral.mean);
    CHECK(a.phase_integral.stderr_ == b.phase_integral.stderr_);
  }
}
