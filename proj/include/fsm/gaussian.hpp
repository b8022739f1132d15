#pragma once

#include <cstdint>
#include <vector>

#include "fsm/mc.hpp"
#include "fsm/spectral.hpp"

// White-noise and smoothed Gaussian measures on truncated field spaces.
//
// Variance convention: at scale t the white-noise coefficient of every mode
// is (a + i b)/t with a, b independent standard normals, i.e. E|c_k|^2 =
// 2/t^2.  This is the normalization that makes the characteristic
// functional E[exp(i Re <phi, sigma>)] equal exp(-|phi|^2_{L2} / (2 t^2))
// exactly on the truncated space; a standard complex normal (E|c|^2 = 1)
// would be off by a factor of 2 in the exponent.

namespace fsm::gaussian {

using spectral::SpectralField;

struct GaussianSpec {
  int trunc = 1;       // N
  double scale = 1.0;  // t > 0
  double smooth = 0.0; // s >= 0, exponent of the (1-Lap)^{-s} pushforward
  int rank = 1;        // independent field components

  void validate() const;
};

// Sample draw `index` of the measure.  Streams are derived per
// (seed, index, component, mode), so draws are reproducible and
// order-independent across parallel workers.
std::vector<SpectralField> sample_white_noise(const GaussianSpec& spec, std::uint64_t seed,
                                              std::uint64_t index);
std::vector<SpectralField> sample_smoothed(const GaussianSpec& spec, std::uint64_t seed,
                                           std::uint64_t index);

// MC estimate of E[exp(i Re <phi, sigma>)] under the (smoothed) measure.
McEstimate characteristic_functional_mc(const GaussianSpec& spec, const SpectralField& phi,
                                        std::uint64_t n, std::uint64_t seed, int workers = 1);

// Radon-Nikodym density of the v-translated measure against the original,
// evaluated at a:  exp(t^2 Re<(1-Lap)^{2s} v, a> - t^2 |v|^2_{2s} / 2).
double cameron_martin_density(const GaussianSpec& spec, const SpectralField& v,
                              const SpectralField& a);

// Deterministic random test field: per-mode complex normals damped by
// (1+|k|^2)^{-decay}.
SpectralField random_field(int trunc, std::uint64_t seed, double decay = 1.0);

}  // namespace fsm::gaussian
