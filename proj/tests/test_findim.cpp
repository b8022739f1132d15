#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fsm/errors.hpp"
#include "fsm/findim.hpp"

using namespace fsm::findim;

namespace {

Vec vec1(double x) {
  Vec v(1);
  v << x;
  return v;
}

Vec vec2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}

SmoothMap identity_1d() {
  return SmoothMap::checked(
      1, [](const Vec& x) { return x; },
      [](const Vec&) {
        Mat J(1, 1);
        J << 1.0;
        return J;
      },
      10.0, "identity1d");
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace

TEST_CASE("registry") {
  CHECK(registry_ids().size() == 6);
  for (const auto& id : registry_ids()) {
    const auto m = lookup_map(id);  // constructor self-test runs here
    CHECK(m.name == id);
  }
  CHECK_THROWS_AS(lookup_map("nope"), fsm::ConfigError);
}

TEST_CASE("jacobian self-test catches a wrong jacobian") {
  CHECK_THROWS_AS(SmoothMap::checked(
                      1, [](const Vec& x) { return x; },
                      [](const Vec&) {
                        Mat J(1, 1);
                        J << 2.0;  // wrong
                        return J;
                      },
                      10.0, "bad"),
                  fsm::ConfigError);
}

TEST_CASE("pullback_density") {
  SUBCASE("identity at 0") {
    auto m = lookup_map("identity");
    CHECK(pullback_density(m, vec2(0, 0)) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
  }
  SUBCASE("f = -x at 0 in 2d has positive density") {
    auto m = SmoothMap::checked(
        2, [](const Vec& x) { return Vec(-x); },
        [](const Vec&) { return Mat(-Mat::Identity(2, 2)); }, 10.0, "neg");
    CHECK(pullback_density(m, vec2(0, 0)) == doctest::Approx(1.0 / kTwoPi).epsilon(1e-14));
  }
  SUBCASE("f = 2x at 0 in 1d") {
    auto m = SmoothMap::checked(
        1, [](const Vec& x) { return Vec(2.0 * x); },
        [](const Vec&) {
          Mat J(1, 1);
          J << 2.0;
          return J;
        },
        10.0, "twox");
    CHECK(pullback_density(m, vec1(0)) ==
          doctest::Approx(2.0 / std::sqrt(kTwoPi)).epsilon(1e-14));
  }
}

TEST_CASE("degree_quadrature") {
  QuadratureGrid grid;  // half-width 8, 321 points

  SUBCASE("identity in 1d integrates to 1") {
    CHECK(degree_quadrature(identity_1d(), grid) == doctest::Approx(1.0).epsilon(1e-6));
  }
  SUBCASE("z^2 integrates to 2") {
    CHECK(degree_quadrature(lookup_map("zsq"), grid) == doctest::Approx(2.0).epsilon(1e-3));
  }
  SUBCASE("conj(z) integrates to -1") {
    CHECK(degree_quadrature(lookup_map("zbar"), grid) == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("insufficient decay is detected") {
    QuadratureGrid tiny;
    tiny.half_width = 1.5;
    tiny.points_per_axis = 31;
    CHECK_THROWS_AS(degree_quadrature(lookup_map("identity"), tiny), fsm::InsufficientDecay);
  }
}

TEST_CASE("preimages") {
  SUBCASE("identity: single root at y") {
    auto res = preimages(lookup_map("identity"), vec2(0.3, -0.1), 50, 1e-6);
    REQUIRE(res.roots.size() == 1);
    CHECK((res.roots[0].x - vec2(0.3, -0.1)).norm() <= 1e-9);
    CHECK(res.roots[0].sign == 1);
    CHECK(res.report.n_failed == 0);
  }

  SUBCASE("z^2 = 1: roots +-1, both orientation-preserving") {
    auto res = preimages(lookup_map("zsq"), vec2(1.0, 0.0), 200, 1e-6);
    REQUIRE(res.roots.size() == 2);
    for (const auto& r : res.roots) {
      CHECK(std::abs(std::abs(r.x[0]) - 1.0) <= 1e-8);
      CHECK(std::abs(r.x[1]) <= 1e-8);
      CHECK(r.sign == 1);
      CHECK_FALSE(r.degenerate);
    }
  }

  SUBCASE("z^2 = 0: the double root is flagged degenerate") {
    auto res = preimages(lookup_map("zsq"), vec2(0.0, 0.0), 100, 1e-5);
    bool saw_degenerate = false;
    for (const auto& r : res.roots) saw_degenerate |= r.degenerate;
    CHECK(saw_degenerate);
  }
}

TEST_CASE("degree_zero_count") {
  SUBCASE("z^3 has degree 3") {
    CHECK(degree_zero_count(lookup_map("zcube"), vec2(0.4, 0.3)) == 3);
  }
  SUBCASE("x^2 + 1 on the line never hits 0") {
    auto m = SmoothMap::checked(
        1,
        [](const Vec& x) {
          Vec v(1);
          v << x[0] * x[0] + 1.0;
          return v;
        },
        [](const Vec& x) {
          Mat J(1, 1);
          J << 2.0 * x[0];
          return J;
        },
        10.0, "xsq_p1");
    CHECK(degree_zero_count(m, vec1(0.0)) == 0);
  }
  SUBCASE("conj(z) has degree -1") {
    CHECK(degree_zero_count(lookup_map("zbar"), vec2(0.2, 0.7)) == -1);
  }
  SUBCASE("degenerate value throws") {
    CHECK_THROWS_AS(degree_zero_count(lookup_map("zsq"), vec2(0.0, 0.0), 100),
                    fsm::DegenerateRoot);
  }
}

TEST_CASE("quadrature degree equals signed zero count on the registry") {
  QuadratureGrid grid;
  for (const auto& id : registry_ids()) {
    const auto m = lookup_map(id);
    const double q = degree_quadrature(m, grid);
    const long rounded = std::lround(q);
    CHECK(std::abs(q - double(rounded)) <= 1e-3);
    for (int trial = 0; trial < 5; ++trial) {
      // random regular values away from the critical sets
      Vec y(m.dim);
      const double r = 0.45 + 0.3 * trial / 5.0;
      if (m.dim == 2) {
        y = vec2(r * std::cos(1.1 + trial), r * std::sin(1.1 + trial));
      } else {
        y = vec1((trial % 2 ? -1 : 1) * (0.2 + 0.02 * trial));
      }
      CHECK(degree_zero_count(m, y, 300, 77 + trial) == rounded);
    }
  }
}

TEST_CASE("pushforward_expectation") {
  SUBCASE("identity with g = 1 is exactly 1") {
    const auto est =
        pushforward_expectation(lookup_map("identity"), [](const Vec&) { return 1.0; }, 500, 3);
    CHECK(est.mean == fsm::McEstimate{}.mean + std::complex<double>{1.0, 0.0});
    CHECK(est.stderr_ == 0.0);
  }

  SUBCASE("identity with the unit-ball indicator hits 1 - e^{-1/2}") {
    const auto est = pushforward_expectation(
        lookup_map("identity"), [](const Vec& x) { return x.norm() <= 1.0 ? 1.0 : 0.0; },
        20000, 11);
    const double expect = 1.0 - std::exp(-0.5);
    CHECK(std::abs(est.mean.real() - expect) <= 3.0 * est.stderr_);
    CHECK(est.stderr_ > 0.0);
  }

  SUBCASE("z^2 with g = 1 counts two branches a.e.") {
    const auto est =
        pushforward_expectation(lookup_map("zsq"), [](const Vec&) { return 1.0; }, 4000, 19);
    CHECK(std::abs(est.mean.real() - 2.0) <= std::max(3.0 * est.stderr_, 1e-3));
  }
}

TEST_CASE("phase_relation_check on the registry") {
  auto g = [](const Vec& x) { return std::exp(-0.1 * x.squaredNorm()); };
  for (const auto& id : registry_ids()) {
    const auto m = lookup_map(id);
    const auto pr = phase_relation_check(m, g, 4000, 23);
    INFO(id, ": lhs=", pr.lhs, " rhs=", pr.rhs.mean.real(), " +- ", pr.rhs.stderr_);
    CHECK(pr.pass);
  }
}

TEST_CASE("phase relation closed cases") {
  auto one = [](const Vec&) { return 1.0; };
  SUBCASE("identity: both sides 1") {
    const auto pr = phase_relation_check(lookup_map("identity"), one, 500, 29);
    CHECK(pr.rhs.mean.real() == 1.0);
    CHECK(pr.rhs.stderr_ == 0.0);
    CHECK(std::abs(pr.lhs - 1.0) <= 1e-6);
  }
  SUBCASE("zbar: both sides -1") {
    const auto pr = phase_relation_check(lookup_map("zbar"), one, 500, 31);
    CHECK(pr.rhs.mean.real() == -1.0);
    CHECK(std::abs(pr.lhs + 1.0) <= 1e-6);
  }
  SUBCASE("zsq_m1: both sides near 2") {
    const auto pr = phase_relation_check(lookup_map("zsq_m1"), one, 4000, 37);
    CHECK(pr.pass);
    CHECK(std::abs(pr.lhs - 2.0) <= 1e-3);
  }
}
