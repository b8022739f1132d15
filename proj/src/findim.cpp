#include "fsm/findim.hpp"

#include <cmath>

#include "fsm/errors.hpp"
#include "fsm/rng.hpp"

namespace fsm::findim {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kRootTol = 1e-10;       // |f(x)-y| convergence
constexpr double kPolishTol = 1e-13;     // keep iterating down to here while improving
constexpr double kDegenerateTol = 1e-10; // |det grad f| regularity threshold

}  // namespace

SmoothMap SmoothMap::checked(int dim, std::function<Vec(const Vec&)> eval,
                             std::function<Mat(const Vec&)> jacobian, double box_radius,
                             std::string name) {
  SmoothMap m;
  m.dim = dim;
  m.eval = std::move(eval);
  m.jacobian = std::move(jacobian);
  m.multistart_box = box_radius;
  m.name = std::move(name);

  // jacobian vs central differences at 10 random points
  const double h = 1e-6;
  for (int trial = 0; trial < 10; ++trial) {
    Vec x(dim);
    for (int i = 0; i < dim; ++i)
      x[i] = rng::uniform_range(rng::key(0xc0deu, trial, static_cast<std::uint64_t>(i)), -2.0, 2.0);
    const Mat J = m.jacobian(x);
    Mat Jfd(dim, dim);
    for (int j = 0; j < dim; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      Jfd.col(j) = (m.eval(xp) - m.eval(xm)) / (2.0 * h);
    }
    const double scale = std::max(1.0, J.norm());
    if ((J - Jfd).norm() > 1e-5 * scale)
      throw ConfigError("SmoothMap '" + m.name + "': jacobian disagrees with finite differences");
  }
  return m;
}

SmoothMap lookup_map(const std::string& id) {
  // realified complex maps act on (x, y) = (Re z, Im z)
  if (id == "identity") {
    return SmoothMap::checked(
        2, [](const Vec& x) { return x; },
        [](const Vec& x) { return Mat::Identity(x.size(), x.size()); }, 10.0, id);
  }
  if (id == "zsq") {
    return SmoothMap::checked(
        2,
        [](const Vec& v) {
          Vec out(2);
          out << v[0] * v[0] - v[1] * v[1], 2.0 * v[0] * v[1];
          return out;
        },
        [](const Vec& v) {
          Mat J(2, 2);
          J << 2.0 * v[0], -2.0 * v[1], 2.0 * v[1], 2.0 * v[0];
          return J;
        },
        10.0, id);
  }
  if (id == "zcube") {
    return SmoothMap::checked(
        2,
        [](const Vec& v) {
          const std::complex<double> z{v[0], v[1]};
          const auto w = z * z * z;
          Vec out(2);
          out << w.real(), w.imag();
          return out;
        },
        [](const Vec& v) {
          const std::complex<double> z{v[0], v[1]};
          const auto d = 3.0 * z * z;
          Mat J(2, 2);
          J << d.real(), -d.imag(), d.imag(), d.real();
          return J;
        },
        10.0, id);
  }
  if (id == "zbar") {
    return SmoothMap::checked(
        2,
        [](const Vec& v) {
          Vec out(2);
          out << v[0], -v[1];
          return out;
        },
        [](const Vec&) {
          Mat J(2, 2);
          J << 1.0, 0.0, 0.0, -1.0;
          return J;
        },
        10.0, id);
  }
  if (id == "zsq_m1") {
    return SmoothMap::checked(
        2,
        [](const Vec& v) {
          Vec out(2);
          out << v[0] * v[0] - v[1] * v[1] - 1.0, 2.0 * v[0] * v[1];
          return out;
        },
        [](const Vec& v) {
          Mat J(2, 2);
          J << 2.0 * v[0], -2.0 * v[1], 2.0 * v[1], 2.0 * v[0];
          return J;
        },
        10.0, id);
  }
  if (id == "cubic1d") {
    return SmoothMap::checked(
        1,
        [](const Vec& v) {
          Vec out(1);
          out << v[0] * v[0] * v[0] - v[0];
          return out;
        },
        [](const Vec& v) {
          Mat J(1, 1);
          J << 3.0 * v[0] * v[0] - 1.0;
          return J;
        },
        10.0, id);
  }
  throw ConfigError("unknown map id '" + id + "'");
}

std::vector<std::string> registry_ids() {
  return {"identity", "zsq", "zcube", "zbar", "zsq_m1", "cubic1d"};
}

double pullback_density(const SmoothMap& m, const Vec& x) {
  const Vec fx = m.eval(x);
  const double det = m.jacobian(x).determinant();
  return std::pow(kTwoPi, -0.5 * m.dim) * std::exp(-0.5 * fx.squaredNorm()) * det;
}

namespace {

double tensor_quadrature(const SmoothMap& m, const QuadratureGrid& grid,
                         const std::function<double(const Vec&)>& integrand) {
  if (m.dim > 2) throw ConfigError("degree quadrature supports n <= 2 only");
  const int P = grid.points_per_axis;
  if (P < 3) throw ConfigError("quadrature grid too small");
  const double L = grid.half_width;
  const double h = 2.0 * L / (P - 1);

  // boundary decay check on |density|
  auto density_abs = [&](const Vec& x) { return std::abs(pullback_density(m, x)); };
  if (m.dim == 1) {
    Vec x(1);
    for (double bx : {-L, L}) {
      x[0] = bx;
      if (density_abs(x) >= 1e-12)
        throw InsufficientDecay("density has not decayed at the quadrature boundary");
    }
    double acc = 0.0;
    for (int i = 0; i < P; ++i) {
      x[0] = -L + h * i;
      const double w = (i == 0 || i == P - 1) ? 0.5 : 1.0;
      acc += w * integrand(x);
    }
    return acc * h;
  }
  Vec x(2);
  for (int i = 0; i < P; ++i) {
    const double c = -L + h * i;
    for (double b : {-L, L}) {
      x[0] = c;
      x[1] = b;
      if (density_abs(x) >= 1e-12)
        throw InsufficientDecay("density has not decayed at the quadrature boundary");
      x[0] = b;
      x[1] = c;
      if (density_abs(x) >= 1e-12)
        throw InsufficientDecay("density has not decayed at the quadrature boundary");
    }
  }
  double acc = 0.0;
  for (int i = 0; i < P; ++i) {
    const double wi = (i == 0 || i == P - 1) ? 0.5 : 1.0;
    x[0] = -L + h * i;
    double row = 0.0;
    for (int j = 0; j < P; ++j) {
      const double wj = (j == 0 || j == P - 1) ? 0.5 : 1.0;
      x[1] = -L + h * j;
      row += wj * integrand(x);
    }
    acc += wi * row;
  }
  return acc * h * h;
}

}  // namespace

double degree_quadrature(const SmoothMap& m, const QuadratureGrid& grid) {
  return tensor_quadrature(m, grid, [&](const Vec& x) { return pullback_density(m, x); });
}

double weighted_quadrature(const SmoothMap& m, const QuadratureGrid& grid,
                           const std::function<double(const Vec&)>& g, bool signed_phase) {
  return tensor_quadrature(m, grid, [&](const Vec& x) {
    double d = pullback_density(m, x);
    if (!signed_phase) d = std::abs(d);
    return g(x) * d;
  });
}

PreimageResult preimages(const SmoothMap& m, const Vec& y, int n_starts, double dedup_tol,
                         std::uint64_t seed) {
  if (!y.allFinite()) throw ConfigError("preimages: target not finite");
  PreimageResult res;
  res.report.n_starts = n_starts;

  for (int s = 0; s < n_starts; ++s) {
    Vec x(m.dim);
    for (int i = 0; i < m.dim; ++i)
      x[i] = rng::uniform_range(rng::key(seed, static_cast<std::uint64_t>(s),
                                         static_cast<std::uint64_t>(i)),
                                -m.multistart_box, m.multistart_box);
    Vec r = m.eval(x) - y;
    // polish past the convergence threshold while progress lasts, so that
    // degenerate (singular) roots land close enough for the |det| test
    for (int it = 0; it < 60; ++it) {
      if (r.norm() <= kPolishTol) break;
      const Mat J = m.jacobian(x);
      const Vec step = J.fullPivLu().solve(-r);
      if (!step.allFinite()) break;
      double lam = 1.0;
      bool improved = false;
      for (int halve = 0; halve < 40; ++halve) {
        const Vec xn = x + lam * step;
        const Vec rn = m.eval(xn) - y;
        if (rn.norm() < r.norm()) {
          x = xn;
          r = rn;
          improved = true;
          break;
        }
        lam *= 0.5;
      }
      if (!improved) break;
    }
    if (r.norm() > kRootTol) {
      ++res.report.n_failed;
      continue;
    }
    ++res.report.n_converged;

    bool duplicate = false;
    for (const auto& p : res.roots)
      if ((p.x - x).norm() <= dedup_tol) {
        duplicate = true;
        break;
      }
    if (duplicate) continue;

    Preimage p;
    p.x = x;
    const double det = m.jacobian(x).determinant();
    p.degenerate = std::abs(det) <= kDegenerateTol;
    p.sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    if (p.degenerate) ++res.report.n_degenerate;
    res.roots.push_back(std::move(p));
  }
  return res;
}

int degree_zero_count(const SmoothMap& m, const Vec& y_regular, int n_starts,
                      std::uint64_t seed) {
  const auto res = preimages(m, y_regular, n_starts, 1e-6, seed);
  int deg = 0;
  for (const auto& p : res.roots) {
    if (p.degenerate)
      throw DegenerateRoot("degree_zero_count: degenerate preimage, value not regular");
    deg += p.sign;
  }
  return deg;
}

namespace {

McEstimate pushforward_mc(const SmoothMap& m, const std::function<double(const Preimage&)>& h,
                          std::uint64_t n_samples, std::uint64_t seed, int n_starts,
                          int workers) {
  std::vector<std::complex<double>> vals(n_samples);
  fsm::mc::parallel_for(n_samples, workers, [&](std::uint64_t i) {
    Vec y(m.dim);
    for (int d = 0; d < m.dim; d += 2) {
      const auto pr =
          rng::normal_pair(rng::key(seed, i, 0xabcdu, static_cast<std::uint64_t>(d)));
      y[d] = pr.a;
      if (d + 1 < m.dim) y[d + 1] = pr.b;
    }
    const auto res = preimages(m, y, n_starts, 1e-6, rng::key(seed, i, 0x57a7u));
    double acc = 0.0;
    for (const auto& p : res.roots)
      if (!p.degenerate) acc += h(p);
    vals[i] = {acc, 0.0};
  });
  return fsm::mc::reduce(vals);
}

}  // namespace

McEstimate pushforward_expectation(const SmoothMap& m,
                                   const std::function<double(const Vec&)>& g,
                                   std::uint64_t n_samples, std::uint64_t seed, int n_starts,
                                   int workers) {
  return pushforward_mc(
      m, [&](const Preimage& p) { return g(p.x); }, n_samples, seed, n_starts, workers);
}

PhaseRelation phase_relation_check(const SmoothMap& m,
                                   const std::function<double(const Vec&)>& g,
                                   std::uint64_t n_samples, std::uint64_t seed,
                                   const QuadratureGrid& grid, int workers) {
  PhaseRelation out;
  out.lhs = weighted_quadrature(m, grid, g, /*signed_phase=*/true);
  out.rhs = pushforward_mc(
      m, [&](const Preimage& p) { return g(p.x) * p.sign; }, n_samples, seed, 200, workers);
  out.pass = std::abs(out.lhs - out.rhs.mean.real()) <= 3.0 * out.rhs.stderr_ + out.quad_tol;
  return out;
}

}  // namespace fsm::findim
