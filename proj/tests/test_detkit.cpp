#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "fsm/detkit.hpp"
#include "fsm/errors.hpp"
#include "fsm/rng.hpp"

using namespace fsm::detkit;

namespace {

// random complex matrix scaled so the spectral radius stays comfortably
// below 1 (keeps 1 + lambda away from zero)
OperatorMatrix random_contraction(int n, std::uint64_t seed, double scale = 0.5) {
  Eigen::MatrixXcd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto p = fsm::rng::normal_pair(
          fsm::rng::key(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
      m(i, j) = cplx{p.a, p.b};
    }
  m *= scale / std::sqrt(2.0 * n);
  return OperatorMatrix::from_complex(m);
}

}  // namespace

TEST_CASE("schatten norms") {
  SUBCASE("zero matrix") {
    OperatorMatrix z = OperatorMatrix::from_complex(Eigen::MatrixXcd::Zero(5, 5));
    for (int k : {1, 2, 3}) CHECK(schatten_norm(z, k) == 0.0);
  }
  SUBCASE("identity has norm n^{1/k}") {
    auto idm = OperatorMatrix::identity(6);
    for (int k : {1, 2, 3, 4})
      CHECK(schatten_norm(idm, k) == doctest::Approx(std::pow(6.0, 1.0 / k)).epsilon(1e-13));
  }
  SUBCASE("diag(3,4) at k=2 gives 5") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 0) = 3.0;
    d(1, 1) = 4.0;
    CHECK(schatten_norm(OperatorMatrix::from_complex(d), 2) == doctest::Approx(5.0));
  }
  SUBCASE("triangle inequality, rooted norm") {
    for (int trial = 0; trial < 20; ++trial) {
      auto A = random_contraction(7, 100 + trial);
      auto B = random_contraction(7, 200 + trial);
      OperatorMatrix S;
      S.entries = A.entries + B.entries;
      for (int k : {1, 2, 3})
        CHECK(schatten_norm(S, k) <= schatten_norm(A, k) + schatten_norm(B, k) + 1e-12);
    }
  }
  SUBCASE("dense path agrees with the diagonal fast path") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(4, 4);
    d(0, 0) = {0.0, 2.0};
    d(1, 1) = {-1.0, 0.0};
    d(2, 2) = {0.3, 0.4};
    d(3, 3) = 0.0;
    auto K = OperatorMatrix::from_complex(d);
    Eigen::MatrixXcd q = d;
    q(0, 1) = 1e-30;  // forces the dense SVD path
    auto Kd = OperatorMatrix::from_complex(q);
    for (int k : {1, 2, 3})
      CHECK(schatten_norm(K, k) == doctest::Approx(schatten_norm(Kd, k)).epsilon(1e-12));
  }
  SUBCASE("invalid k") {
    CHECK_THROWS_AS(schatten_norm(OperatorMatrix::identity(2), 0), fsm::ConfigError);
  }
  SUBCASE("non-finite entries rejected") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = std::nan("");
    CHECK_THROWS_AS(schatten_norm(OperatorMatrix::from_complex(m), 2), fsm::NumericalError);
  }
}

TEST_CASE("fredholm determinant") {
  SUBCASE("det(1+0) = 1") {
    auto z = OperatorMatrix::from_complex(Eigen::MatrixXcd::Zero(4, 4));
    CHECK(fredholm_det(z) == cplx{1.0, 0.0});
    CHECK(fredholm_det_series(z) == cplx{1.0, 0.0});
  }
  SUBCASE("diag(1,1) gives 4") {
    CHECK(std::abs(fredholm_det(OperatorMatrix::identity(2)) - cplx{4.0, 0.0}) <= 1e-14);
  }
  SUBCASE("eigenvalue route vs exterior-power series, random 8x8") {
    for (int trial = 0; trial < 30; ++trial) {
      auto K = random_contraction(8, 300 + trial);
      const cplx a = fredholm_det(K);
      const cplx b = fredholm_det_series(K);
      CHECK(std::abs(a - b) <= 1e-10 * std::abs(a));
    }
  }
  SUBCASE("multiplicativity: det((1+A)(1+B)) = det(1+A) det(1+B)") {
    for (int trial = 0; trial < 25; ++trial) {
      auto A = random_contraction(10, 400 + trial);
      auto B = random_contraction(10, 500 + trial);
      OperatorMatrix C;
      C.entries = A.entries + B.entries + A.entries * B.entries;
      const cplx lhs = fredholm_det(C);
      const cplx rhs = fredholm_det(A) * fredholm_det(B);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs));
    }
  }
}

TEST_CASE("r_k") {
  SUBCASE("k = 1 returns K itself") {
    auto K = random_contraction(5, 600);
    CHECK((r_k(K, 1).entries - K.entries).norm() == 0.0);
  }
  SUBCASE("K = 0 maps to 0") {
    auto z = OperatorMatrix::from_complex(Eigen::MatrixXcd::Zero(4, 4));
    CHECK(r_k(z, 3).entries.norm() == 0.0);
  }
  SUBCASE("diagonal entries follow the scalar formula at k = 2") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(3, 3);
    d(0, 0) = 0.3;
    d(1, 1) = {0.0, -0.2};
    d(2, 2) = {-0.1, 0.4};
    auto R = r_k(OperatorMatrix::from_complex(d), 2);
    for (int i = 0; i < 3; ++i) {
      const cplx lam = d(i, i);
      const cplx expect = (cplx{1.0, 0.0} + lam) * std::exp(-lam) - cplx{1.0, 0.0};
      CHECK(std::abs(R.entries(i, i) - expect) <= 1e-14);
    }
  }
}

TEST_CASE("det_k") {
  SUBCASE("det_2(1+0) = 1") {
    auto z = OperatorMatrix::from_complex(Eigen::MatrixXcd::Zero(4, 4));
    CHECK(det_k(z, 2) == cplx{1.0, 0.0});
  }
  SUBCASE("K = diag(1,0,...,0): det_2 = 2/e") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(5, 5);
    d(0, 0) = 1.0;
    CHECK(std::abs(det_k(OperatorMatrix::from_complex(d), 2) -
                   cplx{2.0 * std::exp(-1.0), 0.0}) <= 1e-14);
  }
  SUBCASE("eigenvalue route vs det(1 + R_k), random 16x16, k = 3") {
    for (int trial = 0; trial < 20; ++trial) {
      auto K = random_contraction(16, 700 + trial);
      const cplx a = det_k(K, 3);
      const cplx b = fredholm_det(r_k(K, 3));
      CHECK(std::abs(a - b) <= 1e-8 * std::abs(a));
    }
  }
  SUBCASE("closed form det(1+K) exp(sum (-1)^n tr K^n / n)") {
    for (int trial = 0; trial < 20; ++trial) {
      for (int k : {1, 2, 3, 4}) {
        auto K = random_contraction(9, 800 + trial);
        cplx corr{0.0, 0.0};
        Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(9, 9);
        double sgn = -1.0;
        for (int n = 1; n <= k - 1; ++n) {
          P *= K.entries;
          corr += sgn * P.trace() / double(n);
          sgn = -sgn;
        }
        const cplx closed = fredholm_det(K) * std::exp(corr);
        const cplx direct = det_k(K, k);
        CHECK(std::abs(direct - closed) <= 1e-9 * std::abs(closed));
      }
    }
  }
  SUBCASE("real-matrix path agrees with the eigenvalue route") {
    for (int trial = 0; trial < 15; ++trial) {
      Eigen::MatrixXd m(6, 6);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          m(i, j) = 0.25 * fsm::rng::normal_pair(fsm::rng::key(trial, i, j)).a;
      const auto rd = det_k_real(m, 3);
      const cplx cd = det_k(OperatorMatrix::from_real(m), 3);
      CHECK(std::abs(cd) == doctest::Approx(std::exp(rd.log_abs)).epsilon(1e-10));
      CHECK(rd.sign == (cd.real() > 0 ? 1 : -1));
      CHECK(std::abs(cd.imag()) <= 1e-10 * std::abs(cd));
    }
  }
}

// det_k(1+K) != 0 iff 1+K invertible, including constructed singular cases.
TEST_CASE("det_k vanishes exactly on the singular set") {
  const int n = 12;
  int nonzero_checked = 0, singular_checked = 0;
  for (int trial = 0; trial < 50; ++trial) {
    auto K = random_contraction(n, 900 + trial, 0.6);
    for (int k : {1, 2, 3, 4}) {
      const double dk = std::abs(det_k(K, k));
      Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd::Identity(n, n) + K.entries);
      const double smin = svd.singularValues()(n - 1);
      CHECK((dk > 1e-10) == (smin > 1e-10));
      if (smin > 1e-10) ++nonzero_checked;
    }
    // singular construction: (1+K') = (1+K)(I - vv^*)
    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i) {
      const auto p = fsm::rng::normal_pair(fsm::rng::key(950, trial, i));
      v(i) = cplx{p.a, p.b};
    }
    v.normalize();
    OperatorMatrix Ks;
    Ks.entries = (Eigen::MatrixXcd::Identity(n, n) + K.entries) *
                     (Eigen::MatrixXcd::Identity(n, n) - v * v.adjoint()) -
                 Eigen::MatrixXcd::Identity(n, n);
    for (int k : {1, 2, 3, 4}) {
      CHECK(std::abs(det_k(Ks, k)) <= 1e-10);
      ++singular_checked;
    }
  }
  CHECK(nonzero_checked > 150);
  CHECK(singular_checked == 200);
}

// |det_k(1+K) - det_k(1+K')| <= C(K) |K - K'|_k with stable C across eps.
TEST_CASE("det_k continuity probe") {
  for (int k : {2, 3}) {
    auto K = random_contraction(10, 1000 + k);
    auto E = random_contraction(10, 1100 + k);
    const double en = schatten_norm(E, k);
    E.entries /= en;  // unit k-norm direction
    double ratio_max = 0.0, ratio_min = 1e300;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      OperatorMatrix Kp;
      Kp.entries = K.entries + eps * E.entries;
      const double diff = std::abs(det_k(Kp, k) - det_k(K, k));
      const double ratio = diff / eps;
      ratio_max = std::max(ratio_max, ratio);
      ratio_min = std::min(ratio_min, ratio);
    }
    INFO("k=", k, " ratio range ", ratio_min, " .. ", ratio_max);
    CHECK(ratio_max <= 10.0 * ratio_min);
  }
}

TEST_CASE("phase") {
  CHECK(phase({5.0, 0.0}, 1e-10) == cplx{1.0, 0.0});
  CHECK(phase({-2.0, 0.0}, 1e-10) == cplx{-1.0, 0.0});
  CHECK(std::abs(phase({0.0, 3.0}, 1e-10) - cplx{0.0, 1.0}) <= 1e-15);
  CHECK_THROWS_AS(phase({1e-12, 0.0}, 1e-10), fsm::NearZeroDeterminant);
  CHECK(default_phase_tol(100) == doctest::Approx(1e-8));
}

// Schatten membership of the smoothing operator (1 - Lap)^{-1} on the
// realified truncated spaces: the 3-norm converges as N grows, the trace
// norm keeps growing.
TEST_CASE("smoothing operator Schatten probes") {
  auto smoothing_norm = [](int N, int k) {
    const auto mult = fsm::spectral::laplacian_multipliers(N, -1.0);
    const auto op = fsm::spectral::diagonal_real_operator(N, mult);
    return schatten_norm(OperatorMatrix::from_realified(op), k);
  };
  double n3[4], n1[4];
  const int Ns[4] = {4, 8, 16, 24};
  for (int i = 0; i < 4; ++i) {
    n3[i] = smoothing_norm(Ns[i], 3);
    n1[i] = smoothing_norm(Ns[i], 1);
  }
  INFO("3-norms: ", n3[0], " ", n3[1], " ", n3[2], " ", n3[3]);
  INFO("1-norms: ", n1[0], " ", n1[1], " ", n1[2], " ", n1[3]);
  // convergence probe
  CHECK((n3[3] - n3[2]) / n3[2] < 0.05);
  // divergence probe: strictly increasing, >= 25% total growth over the sweep
  CHECK(n1[1] > n1[0]);
  CHECK(n1[2] > n1[1]);
  CHECK(n1[3] > n1[2]);
  CHECK(n1[3] >= 1.25 * n1[0]);
}
