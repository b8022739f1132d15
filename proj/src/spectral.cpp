#include "fsm/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "fsm/errors.hpp"
#include "fsm/kernels.hpp"

namespace fsm::spectral {

SpectralField::SpectralField(int trunc) : trunc_(trunc) {
  if (trunc < 1) throw ConfigError("truncation must be >= 1");
  coeffs_.assign(static_cast<std::size_t>(modes()), cplx{0.0, 0.0});
}

SpectralField::SpectralField(int trunc, std::vector<cplx> coeffs) : trunc_(trunc) {
  if (trunc < 1) throw ConfigError("truncation must be >= 1");
  if (static_cast<int>(coeffs.size()) != modes())
    throw ConfigError("coefficient array length does not match truncation");
  coeffs_ = std::move(coeffs);
}

bool SpectralField::finite() const {
  for (const auto& c : coeffs_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  return true;
}

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  if (o.trunc_ != trunc_) throw ConfigError("truncation mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  if (o.trunc_ != trunc_) throw ConfigError("truncation mismatch");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

SpectralField constant_field(int trunc, cplx c) {
  SpectralField f(trunc);
  f.at({0, 0}) = c;
  return f;
}

Eigen::VectorXd realify(const SpectralField& f) {
  Eigen::VectorXd v(2 * f.modes());
  for (int i = 0; i < f.modes(); ++i) {
    v[2 * i] = f.coeffs()[static_cast<std::size_t>(i)].real();
    v[2 * i + 1] = f.coeffs()[static_cast<std::size_t>(i)].imag();
  }
  return v;
}

SpectralField unrealify(int trunc, const Eigen::VectorXd& v) {
  SpectralField f(trunc);
  if (v.size() != 2 * f.modes()) throw ConfigError("realified vector size mismatch");
  for (int i = 0; i < f.modes(); ++i)
    f.coeffs()[static_cast<std::size_t>(i)] = {v[2 * i], v[2 * i + 1]};
  return f;
}

std::vector<double> laplacian_multipliers(int trunc, double p) {
  const int side = 2 * trunc + 1;
  std::vector<double> m(static_cast<std::size_t>(side * side));
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      const double k1 = a - trunc, k2 = b - trunc;
      m[static_cast<std::size_t>(a * side + b)] = std::pow(1.0 + k1 * k1 + k2 * k2, p);
    }
  return m;
}

std::vector<cplx> del_multipliers(int trunc) {
  const int side = 2 * trunc + 1;
  std::vector<cplx> m(static_cast<std::size_t>(side * side));
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      const double k1 = a - trunc, k2 = b - trunc;
      m[static_cast<std::size_t>(a * side + b)] = cplx{0.0, 0.5} * cplx{k1, -k2};
    }
  return m;
}

SpectralField laplacian_power(const SpectralField& f, double p) {
  SpectralField out(f.trunc());
  const auto mult = laplacian_multipliers(f.trunc(), p);
  kernels::active().scale_by_real(f.data(), mult.data(), out.data(),
                                  static_cast<std::size_t>(f.modes()));
  return out;
}

namespace {

SpectralField apply_dz_multiplier(const SpectralField& f, double sign_k2) {
  SpectralField out(f.trunc());
  const int side = f.side();
  std::vector<cplx> m(static_cast<std::size_t>(f.modes()));
  for (int a = 0; a < side; ++a)
    for (int b = 0; b < side; ++b) {
      const double k1 = a - f.trunc(), k2 = b - f.trunc();
      m[static_cast<std::size_t>(a * side + b)] = cplx{0.0, 0.5} * cplx{k1, sign_k2 * k2};
    }
  kernels::active().scale_by_complex(f.data(), m.data(), out.data(),
                                     static_cast<std::size_t>(f.modes()));
  return out;
}

}  // namespace

SpectralField del(const SpectralField& f) { return apply_dz_multiplier(f, -1.0); }
SpectralField delbar(const SpectralField& f) { return apply_dz_multiplier(f, +1.0); }

SpectralField conjugate_field(const SpectralField& f) {
  SpectralField out(f.trunc());
  const int N = f.trunc();
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2)
      out.at({k1, k2}) = std::conj(f.at({-k1, -k2}));
  return out;
}

SpectralField retruncate(const SpectralField& f, int trunc) {
  SpectralField out(trunc);
  const int n = std::min(trunc, f.trunc());
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) out.at({k1, k2}) = f.at({k1, k2});
  return out;
}

SpectralField multiply_fields(const SpectralField& f, const SpectralField& g) {
  SpectralField out(f.trunc() + g.trunc());
  const int Nf = f.trunc(), Ng = g.trunc();
  for (int a1 = -Nf; a1 <= Nf; ++a1)
    for (int a2 = -Nf; a2 <= Nf; ++a2) {
      const cplx fa = f.at({a1, a2});
      if (fa == cplx{0.0, 0.0}) continue;
      for (int b1 = -Ng; b1 <= Ng; ++b1)
        for (int b2 = -Ng; b2 <= Ng; ++b2)
          out.at({a1 + b1, a2 + b2}) += fa * g.at({b1, b2});
    }
  return out;
}

// ---- FFT collocation engine -------------------------------------------

namespace {

// FFTW plans are cached per grid size; plan creation is serialized (FFTW
// planning is not thread-safe), execution uses fftw_execute_dft with
// caller-owned buffers.
struct PlanPair {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

std::mutex g_plan_mutex;
std::map<int, PlanPair>& plan_cache() {
  static std::map<int, PlanPair> cache;
  return cache;
}

PlanPair get_plans(int G) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(G);
  if (it != cache.end()) return it->second;
  std::vector<cplx> tmp(static_cast<std::size_t>(G) * G);
  auto* p = reinterpret_cast<fftw_complex*>(tmp.data());
  PlanPair pp;
  pp.fwd = fftw_plan_dft_2d(G, G, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  pp.bwd = fftw_plan_dft_2d(G, G, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[G] = pp;
  return pp;
}

int smooth_size(int g) {
  // next 5-smooth integer >= g, keeps FFTW fast for arbitrary truncations
  for (;; ++g) {
    int r = g;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return g;
  }
}

int wrap(int k, int G) { return k >= 0 ? k : k + G; }

}  // namespace

SpectralField apply_polynomial(const SpectralField& f, const std::vector<cplx>& poly) {
  if (poly.empty()) return SpectralField(f.trunc());
  for (const auto& c : poly)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw ConfigError("non-finite polynomial coefficient");

  int deg = static_cast<int>(poly.size()) - 1;
  while (deg > 0 && poly[static_cast<std::size_t>(deg)] == cplx{0.0, 0.0}) --deg;

  const int N = f.trunc();
  if (deg == 0) return constant_field(N, poly[0]);

  const int G = smooth_size(std::max(deg * (2 * N + 1), 2 * N + 1));
  const auto plans = get_plans(G);
  std::vector<cplx> grid(static_cast<std::size_t>(G) * G, cplx{0.0, 0.0});

  // scatter coefficients to wrapped FFT bins
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2)
      grid[static_cast<std::size_t>(wrap(k1, G)) * G + wrap(k2, G)] = f.at({k1, k2});

  auto* p = reinterpret_cast<fftw_complex*>(grid.data());
  fftw_execute_dft(plans.bwd, p, p);  // values = sum_k c_k e^{+i k.x}

  for (auto& v : grid) {
    cplx acc = poly[static_cast<std::size_t>(deg)];
    for (int j = deg - 1; j >= 0; --j) acc = acc * v + poly[static_cast<std::size_t>(j)];
    v = acc;
  }

  fftw_execute_dft(plans.fwd, p, p);
  const double inv = 1.0 / (static_cast<double>(G) * G);
  SpectralField out(N);
  for (int k1 = -N; k1 <= N; ++k1)
    for (int k2 = -N; k2 <= N; ++k2)
      out.at({k1, k2}) = grid[static_cast<std::size_t>(wrap(k1, G)) * G + wrap(k2, G)] * inv;
  return out;
}

cplx l2_inner(const SpectralField& f, const SpectralField& g) {
  if (f.trunc() != g.trunc()) throw ConfigError("l2_inner: truncation mismatch");
  return kernels::active().dot_conjugated(f.data(), g.data(),
                                          static_cast<std::size_t>(f.modes()));
}

double sobolev_norm(const SpectralField& f, double lam) {
  const auto w = laplacian_multipliers(f.trunc(), lam);
  return std::sqrt(kernels::active().weighted_norm_sq(f.data(), w.data(),
                                                      static_cast<std::size_t>(f.modes())));
}

RealifiedOperator multiplication_operator(const SpectralField& psi, bool conjugate_argument) {
  const int N = psi.trunc();
  const int M = psi.modes();
  RealifiedOperator op;
  op.trunc = N;
  op.mat = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  // (psi * delta)_m = sum_k psi_{m-k} delta_k ; with the conjugating flag
  // (psi * conj(delta))_m = sum_k psi_{m+k} conj(delta_k).
  for (int m = 0; m < M; ++m) {
    const FreqIndex fm = psi.freq(m);
    for (int k = 0; k < M; ++k) {
      const FreqIndex fk = psi.freq(k);
      const int d1 = conjugate_argument ? fm.k1 + fk.k1 : fm.k1 - fk.k1;
      const int d2 = conjugate_argument ? fm.k2 + fk.k2 : fm.k2 - fk.k2;
      if (std::abs(d1) > N || std::abs(d2) > N) continue;
      const cplx w = psi.at({d1, d2});
      if (!conjugate_argument) {
        // c -> w c
        op.mat(2 * m, 2 * k) = w.real();
        op.mat(2 * m, 2 * k + 1) = -w.imag();
        op.mat(2 * m + 1, 2 * k) = w.imag();
        op.mat(2 * m + 1, 2 * k + 1) = w.real();
      } else {
        // c -> w conj(c)
        op.mat(2 * m, 2 * k) = w.real();
        op.mat(2 * m, 2 * k + 1) = w.imag();
        op.mat(2 * m + 1, 2 * k) = w.imag();
        op.mat(2 * m + 1, 2 * k + 1) = -w.real();
      }
    }
  }
  return op;
}

RealifiedOperator diagonal_multiplier_operator(int trunc, const std::vector<cplx>& multipliers) {
  const int M = (2 * trunc + 1) * (2 * trunc + 1);
  if (static_cast<int>(multipliers.size()) != M)
    throw ConfigError("multiplier array length mismatch");
  RealifiedOperator op;
  op.trunc = trunc;
  op.mat = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  for (int i = 0; i < M; ++i) {
    const cplx w = multipliers[static_cast<std::size_t>(i)];
    op.mat(2 * i, 2 * i) = w.real();
    op.mat(2 * i, 2 * i + 1) = -w.imag();
    op.mat(2 * i + 1, 2 * i) = w.imag();
    op.mat(2 * i + 1, 2 * i + 1) = w.real();
  }
  return op;
}

RealifiedOperator diagonal_real_operator(int trunc, const std::vector<double>& multipliers) {
  const int M = (2 * trunc + 1) * (2 * trunc + 1);
  if (static_cast<int>(multipliers.size()) != M)
    throw ConfigError("multiplier array length mismatch");
  RealifiedOperator op;
  op.trunc = trunc;
  op.mat = Eigen::MatrixXd::Zero(2 * M, 2 * M);
  for (int i = 0; i < M; ++i) {
    op.mat(2 * i, 2 * i) = multipliers[static_cast<std::size_t>(i)];
    op.mat(2 * i + 1, 2 * i + 1) = multipliers[static_cast<std::size_t>(i)];
  }
  return op;
}

std::string to_json(const SpectralField& f) {
  nlohmann::json j;
  j["N"] = f.trunc();
  auto arr = nlohmann::json::array();
  for (const auto& c : f.coeffs()) arr.push_back({c.real(), c.imag()});
  j["coeffs"] = std::move(arr);
  return j.dump();
}

SpectralField field_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad field JSON: ") + e.what());
  }
  if (!j.contains("N") || !j.contains("coeffs")) throw ConfigError("field JSON needs N, coeffs");
  const int N = j["N"].get<int>();
  SpectralField f(N);
  const auto& arr = j["coeffs"];
  if (static_cast<int>(arr.size()) != f.modes())
    throw ConfigError("field JSON: coeffs length mismatch");
  for (int i = 0; i < f.modes(); ++i) {
    const auto& e = arr[static_cast<std::size_t>(i)];
    f.coeffs()[static_cast<std::size_t>(i)] = {e.at(0).get<double>(), e.at(1).get<double>()};
  }
  if (!f.finite()) throw ConfigError("field JSON: non-finite coefficient");
  return f;
}

}  // namespace fsm::spectral
