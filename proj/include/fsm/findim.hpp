#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fsm/mc.hpp"

// Finite-dimensional model suite: pullback densities of the standard
// Gaussian form, Leray-Schauder degree by quadrature and by signed zero
// count, pushforward-by-local-inverse measures, and the phase relation
// between the signed and unsigned constructions.

namespace fsm::findim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct SmoothMap {
  int dim = 1;
  std::function<Vec(const Vec&)> eval;
  std::function<Mat(const Vec&)> jacobian;
  double multistart_box = 10.0;  // radius R of the preimage search box
  std::string name;

  // Construct with a jacobian self-test: central differences at 10 random
  // points must match to relative 1e-5.
  static SmoothMap checked(int dim, std::function<Vec(const Vec&)> eval,
                           std::function<Mat(const Vec&)> jacobian, double box_radius,
                           std::string name);
};

// Registry ids: identity, zsq, zcube, zbar, zsq_m1, cubic1d.
SmoothMap lookup_map(const std::string& id);
std::vector<std::string> registry_ids();

// (2 pi)^{-n/2} exp(-|f(x)|^2 / 2) det(grad f|_x)   (signed)
double pullback_density(const SmoothMap& m, const Vec& x);

struct QuadratureGrid {
  double half_width = 8.0;
  int points_per_axis = 321;
};

// Tensor-grid quadrature of the signed density, optionally weighted by g.
// Throws InsufficientDecay unless |density| < 1e-12 on the grid boundary.
double degree_quadrature(const SmoothMap& m, const QuadratureGrid& grid);
double weighted_quadrature(const SmoothMap& m, const QuadratureGrid& grid,
                           const std::function<double(const Vec&)>& g, bool signed_phase);

struct Preimage {
  Vec x;
  int sign = 0;         // sign of det(grad f) at the root
  bool degenerate = false;  // |det| <= 1e-10
};

struct NewtonReport {
  int n_starts = 0;
  int n_converged = 0;
  int n_failed = 0;
  int n_degenerate = 0;
};

struct PreimageResult {
  std::vector<Preimage> roots;  // deduplicated, degenerate ones flagged
  NewtonReport report;
};

// Damped-Newton multistart preimage search for f(x) = y.
PreimageResult preimages(const SmoothMap& m, const Vec& y, int n_starts, double dedup_tol,
                         std::uint64_t seed = 0x5eed);

// Sum of signs over preimages of a regular value.  Throws DegenerateRoot if
// any root fails the regularity threshold.
int degree_zero_count(const SmoothMap& m, const Vec& y_regular, int n_starts = 200,
                      std::uint64_t seed = 0x5eed);

// E[ sum_{x in f^{-1}(y)} g(x) ] over y ~ standard Gaussian: the expectation
// of g under the pushforward measure.  Degenerate preimages carry no mass.
McEstimate pushforward_expectation(const SmoothMap& m,
                                   const std::function<double(const Vec&)>& g,
                                   std::uint64_t n_samples, std::uint64_t seed,
                                   int n_starts = 200, int workers = 1);

struct PhaseRelation {
  double lhs = 0.0;   // quadrature of g . (signed density)
  McEstimate rhs;     // pushforward expectation of g . Phase det(grad f)
  double quad_tol = 1e-6;
  bool pass = false;  // |lhs - rhs.mean| <= 3 stderr + quad_tol
};

PhaseRelation phase_relation_check(const SmoothMap& m,
                                   const std::function<double(const Vec&)>& g,
                                   std::uint64_t n_samples, std::uint64_t seed,
                                   const QuadratureGrid& grid = {}, int workers = 1);

}  // namespace fsm::findim
