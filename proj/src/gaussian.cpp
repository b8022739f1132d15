#include "fsm/gaussian.hpp"

#include <cmath>

#include "fsm/errors.hpp"
#include "fsm/kernels.hpp"
#include "fsm/rng.hpp"

namespace fsm::gaussian {

void GaussianSpec::validate() const {
  if (trunc < 1) throw ConfigError("gaussian: N must be >= 1");
  if (!(scale > 0.0)) throw ConfigError("gaussian: t must be > 0");
  if (smooth < 0.0) throw ConfigError("gaussian: s must be >= 0");
  if (rank < 1) throw ConfigError("gaussian: rank must be >= 1");
}

namespace {

std::vector<SpectralField> sample_impl(const GaussianSpec& spec, std::uint64_t seed,
                                       std::uint64_t index, bool smoothed) {
  spec.validate();
  std::vector<SpectralField> out;
  out.reserve(static_cast<std::size_t>(spec.rank));
  const double inv_t = 1.0 / spec.scale;
  for (int comp = 0; comp < spec.rank; ++comp) {
    SpectralField f(spec.trunc);
    const int M = f.modes();
    for (int m = 0; m < M; ++m) {
      const auto pair = rng::normal_pair(
          rng::key(seed, index, static_cast<std::uint64_t>(comp), static_cast<std::uint64_t>(m)));
      double w = inv_t;
      if (smoothed && spec.smooth != 0.0) {
        const auto k = f.freq(m);
        w *= std::pow(1.0 + double(k.k1) * k.k1 + double(k.k2) * k.k2, -spec.smooth);
      }
      f.coeffs()[static_cast<std::size_t>(m)] = {pair.a * w, pair.b * w};
    }
    out.push_back(std::move(f));
  }
  return out;
}

}  // namespace

std::vector<SpectralField> sample_white_noise(const GaussianSpec& spec, std::uint64_t seed,
                                              std::uint64_t index) {
  if (spec.smooth != 0.0) throw ConfigError("sample_white_noise requires smooth = 0");
  return sample_impl(spec, seed, index, false);
}

std::vector<SpectralField> sample_smoothed(const GaussianSpec& spec, std::uint64_t seed,
                                           std::uint64_t index) {
  return sample_impl(spec, seed, index, true);
}

McEstimate characteristic_functional_mc(const GaussianSpec& spec, const SpectralField& phi,
                                        std::uint64_t n, std::uint64_t seed, int workers) {
  spec.validate();
  if (phi.trunc() != spec.trunc) throw ConfigError("characteristic functional: truncation mismatch");
  if (n < 2) throw ConfigError("characteristic functional: need n >= 2");

  const int M = phi.modes();
  std::vector<double> smooth_w;
  if (spec.smooth != 0.0) {
    smooth_w = spectral::laplacian_multipliers(spec.trunc, -spec.smooth);
  }
  const double inv_t = 1.0 / spec.scale;

  std::vector<std::complex<double>> vals(n);
  fsm::mc::parallel_for(n, workers, [&](std::uint64_t i) {
    // fused draw + pairing: Re<phi, sigma> accumulated mode by mode
    double x = 0.0;
    for (int m = 0; m < M; ++m) {
      const auto pr = rng::normal_pair(rng::key(seed, i, 0, static_cast<std::uint64_t>(m)));
      double w = inv_t;
      if (!smooth_w.empty()) w *= smooth_w[static_cast<std::size_t>(m)];
      const auto& p = phi.coeffs()[static_cast<std::size_t>(m)];
      x += p.real() * (pr.a * w) + p.imag() * (pr.b * w);
    }
    vals[i] = {std::cos(x), std::sin(x)};
  });
  return fsm::mc::reduce(vals);
}

SpectralField random_field(int trunc, std::uint64_t seed, double decay) {
  SpectralField f(trunc);
  for (int m = 0; m < f.modes(); ++m) {
    const auto pr = rng::normal_pair(rng::key(seed, 0xf1e1dull, static_cast<std::uint64_t>(m)));
    const auto k = f.freq(m);
    const double w = std::pow(1.0 + double(k.k1) * k.k1 + double(k.k2) * k.k2, -decay);
    f.coeffs()[static_cast<std::size_t>(m)] = {pr.a * w, pr.b * w};
  }
  return f;
}

double cameron_martin_density(const GaussianSpec& spec, const SpectralField& v,
                              const SpectralField& a) {
  spec.validate();
  if (v.trunc() != spec.trunc || a.trunc() != spec.trunc)
    throw ConfigError("cameron_martin_density: truncation mismatch");
  const double t2 = spec.scale * spec.scale;
  const SpectralField wv = spectral::laplacian_power(v, 2.0 * spec.smooth);
  const double cross = spectral::l2_inner(wv, a).real();
  const double nrm = spectral::sobolev_norm(v, 2.0 * spec.smooth);
  return std::exp(t2 * cross - 0.5 * t2 * nrm * nrm);
}

}  // namespace fsm::gaussian
