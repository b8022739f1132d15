#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <vector>

#include "fsm/kernels.hpp"
#include "fsm/rng.hpp"

using fsm::kernels::cplx;

namespace {

std::vector<cplx> random_cvec(std::size_t n, std::uint64_t seed) {
  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = fsm::rng::normal_pair(fsm::rng::key(seed, i));
    v[i] = {p.a, p.b};
  }
  return v;
}

std::vector<double> random_rvec(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = fsm::rng::normal_pair(fsm::rng::key(seed, i)).a;
  return v;
}

}  // namespace

// Every dispatched kernel must agree with the scalar reference.  FMA
// contraction shifts the last bits, hence tolerances instead of equality.
TEST_CASE("dispatched kernels match scalar reference") {
  const auto& ref = fsm::kernels::scalar_table();
  const auto& act = fsm::kernels::active();
  INFO("active kernel table: ", act.name);

  for (std::size_t n : {std::size_t(0), std::size_t(1), std::size_t(2), std::size_t(3),
                        std::size_t(7), std::size_t(64), std::size_t(257), std::size_t(1000)}) {
    const auto a = random_cvec(n, 11 + n);
    const auto b = random_cvec(n, 22 + n);
    const auto w = random_rvec(n, 33 + n);

    std::vector<cplx> out_ref(n), out_act(n);
    ref.scale_by_real(a.data(), w.data(), out_ref.data(), n);
    act.scale_by_real(a.data(), w.data(), out_act.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(out_ref[i] - out_act[i]) <= 1e-14 * (1.0 + std::abs(out_ref[i])));

    ref.scale_by_complex(a.data(), b.data(), out_ref.data(), n);
    act.scale_by_complex(a.data(), b.data(), out_act.data(), n);
    for (std::size_t i = 0; i < n; ++i)
      CHECK(std::abs(out_ref[i] - out_act[i]) <= 1e-13 * (1.0 + std::abs(out_ref[i])));

    const cplx d_ref = ref.dot_conjugated(a.data(), b.data(), n);
    const cplx d_act = act.dot_conjugated(a.data(), b.data(), n);
    CHECK(std::abs(d_ref - d_act) <= 1e-12 * (1.0 + std::abs(d_ref)));

    const double r_ref = ref.real_pairing(a.data(), b.data(), n);
    const double r_act = act.real_pairing(a.data(), b.data(), n);
    CHECK(r_act == doctest::Approx(r_ref).epsilon(1e-12));

    std::vector<double> wa(n);
    for (std::size_t i = 0; i < n; ++i) wa[i] = std::abs(w[i]);
    const double n_ref = ref.weighted_norm_sq(a.data(), wa.data(), n);
    const double n_act = act.weighted_norm_sq(a.data(), wa.data(), n);
    CHECK(n_act == doctest::Approx(n_ref).epsilon(1e-12));
  }
}

TEST_CASE("kernel identities") {
  const auto& act = fsm::kernels::active();
  const std::size_t n = 129;
  const auto a = random_cvec(n, 7);
  const auto b = random_cvec(n, 9);

  // real_pairing is the real part of dot_conjugated
  const cplx d = act.dot_conjugated(a.data(), b.data(), n);
  CHECK(act.real_pairing(a.data(), b.data(), n) == doctest::Approx(d.real()).epsilon(1e-12));

  // weighted_norm_sq with unit weights equals <a,a>
  std::vector<double> ones(n, 1.0);
  const cplx aa = act.dot_conjugated(a.data(), a.data(), n);
  CHECK(act.weighted_norm_sq(a.data(), ones.data(), n) ==
        doctest::Approx(aa.real()).epsilon(1e-12));
  CHECK(aa.imag() == doctest::Approx(0.0).epsilon(1e-14));
}

#ifdef FSM_BUILD_AVX2
TEST_CASE("avx2 table is selected on capable hardware") {
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
    CHECK(std::string(fsm::kernels::active().name) == "avx2");
}
#endif
