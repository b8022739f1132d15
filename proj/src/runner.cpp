#include "fsm/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "fsm/detkit.hpp"
#include "fsm/errors.hpp"
#include "fsm/findim.hpp"
#include "fsm/gaussian.hpp"
#include "fsm/report.hpp"
#include "fsm/rng.hpp"
#include "fsm/wick.hpp"
#include "fsm/wzlg.hpp"

namespace fsm::runner {

namespace {

using cplx = std::complex<double>;

void reject_unknown(const json& params, const std::set<std::string>& allowed) {
  for (auto it = params.begin(); it != params.end(); ++it)
    if (!allowed.count(it.key())) throw ConfigError("unknown parameter '" + it.key() + "'");
}

double get_real(const json& p, const std::string& key, double dflt, double lo, double hi) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_number()) throw ConfigError("parameter '" + key + "' must be a number");
  const double v = p[key].get<double>();
  if (v < lo || v > hi) throw ConfigError("parameter '" + key + "' out of range");
  return v;
}

std::int64_t get_int(const json& p, const std::string& key, std::int64_t dflt, std::int64_t lo,
                     std::int64_t hi) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_number_integer() && !p[key].is_number_unsigned())
    throw ConfigError("parameter '" + key + "' must be an integer");
  const auto v = p[key].get<std::int64_t>();
  if (v < lo || v > hi) throw ConfigError("parameter '" + key + "' out of range");
  return v;
}

std::string get_str(const json& p, const std::string& key, const std::string& dflt,
                    const std::set<std::string>& allowed) {
  if (!p.contains(key)) return dflt;
  if (!p[key].is_string()) throw ConfigError("parameter '" + key + "' must be a string");
  const auto v = p[key].get<std::string>();
  if (!allowed.empty() && !allowed.count(v))
    throw ConfigError("parameter '" + key + "' has unsupported value '" + v + "'");
  return v;
}

cplx parse_complex(const json& v, const std::string& what) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(what + ": expected number or [re, im]");
}

std::vector<cplx> parse_poly(const json& v) {
  std::vector<cplx> out;
  if (v.is_string()) {
    std::stringstream ss(v.get<std::string>());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      try {
        out.emplace_back(std::stod(tok), 0.0);
      } catch (const std::exception&) {
        throw ConfigError("poly: bad coefficient '" + tok + "'");
      }
    }
  } else if (v.is_array()) {
    for (const auto& e : v) out.push_back(parse_complex(e, "poly"));
  } else {
    throw ConfigError("poly: expected array or comma-separated string");
  }
  if (out.size() < 3) throw ConfigError("poly: degree must be >= 2");
  return out;
}

json cplx_json(cplx z) { return json{z.real(), z.imag()}; }

// ---- detk ------------------------------------------------------------------

json run_detk(const json& p, std::uint64_t) {
  reject_unknown(p, {"matrix", "k", "tol"});
  if (!p.contains("matrix") || !p["matrix"].is_array() || p["matrix"].empty())
    throw ConfigError("detk: 'matrix' (2D array) required");
  const auto& rows = p["matrix"];
  const int n = static_cast<int>(rows.size());
  Eigen::MatrixXcd m(n, n);
  bool real = true;
  for (int i = 0; i < n; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != n)
      throw ConfigError("detk: matrix must be square");
    for (int j = 0; j < n; ++j) {
      const auto& e = rows[i][j];
      const cplx z = parse_complex(e, "detk matrix entry");
      if (z.imag() != 0.0) real = false;
      m(i, j) = z;
    }
  }
  const int k = static_cast<int>(get_int(p, "k", 2, 1, 8));
  const double tol = get_real(p, "tol", detkit::default_phase_tol(n), 0.0, 1e3);

  detkit::OperatorMatrix K;
  K.entries = m;
  K.is_real = real;

  const cplx det = detkit::fredholm_det(K);
  const cplx dk = detkit::det_k(K, k);
  const cplx ph = detkit::phase(dk, tol);
  json norms;
  for (int kk = 1; kk <= 4; ++kk)
    norms[std::to_string(kk)] = detkit::schatten_norm(K, kk);
  return json{{"det", cplx_json(det)},
              {"det_k", cplx_json(dk)},
              {"k", k},
              {"phase", cplx_json(ph)},
              {"schatten_norms", norms}};
}

// ---- findim ----------------------------------------------------------------

json run_findim(const json& p, std::uint64_t seed, int workers) {
  reject_unknown(p, {"map", "mode", "y", "n_samples", "n_starts", "grid_points",
                     "grid_halfwidth", "g"});
  const auto map_id = get_str(p, "map", "", {"identity", "zsq", "zcube", "zbar", "zsq_m1",
                                             "cubic1d"});
  if (map_id.empty()) throw ConfigError("findim: 'map' required");
  const auto mode = get_str(p, "mode", "degree", {"degree", "pushforward", "phase"});
  const auto m = findim::lookup_map(map_id);

  findim::QuadratureGrid grid;
  grid.points_per_axis = static_cast<int>(get_int(p, "grid_points", 321, 11, 4001));
  grid.half_width = get_real(p, "grid_halfwidth", 8.0, 1.0, 100.0);
  const int n_starts = static_cast<int>(get_int(p, "n_starts", 200, 1, 100000));

  if (mode == "degree") {
    findim::Vec y(m.dim);
    if (p.contains("y")) {
      const auto& ya = p["y"];
      if (!ya.is_array() || static_cast<int>(ya.size()) != m.dim)
        throw ConfigError("findim: 'y' must be an array of length dim");
      for (int i = 0; i < m.dim; ++i) y[i] = ya[i].get<double>();
    } else {
      y[0] = 0.37;
      if (m.dim > 1) y[1] = 0.22;
      if (m.dim == 1) y[0] = 0.31;
    }
    const double dq = findim::degree_quadrature(m, grid);
    const int dz = findim::degree_zero_count(m, y, n_starts, rng::key(seed, 1));
    return json{{"degree_quadrature", dq},
                {"degree_zero_count", dz},
                {"y", json(std::vector<double>(y.data(), y.data() + y.size()))}};
  }

  const auto n_samples =
      static_cast<std::uint64_t>(get_int(p, "n_samples", 20000, 2, 100000000));
  const auto gname = get_str(p, "g", "one", {"one", "unit_ball"});
  auto g = [&](const findim::Vec& x) -> double {
    return gname == "one" ? 1.0 : (x.norm() <= 1.0 ? 1.0 : 0.0);
  };

  if (mode == "pushforward") {
    const auto est = findim::pushforward_expectation(m, g, n_samples, seed, n_starts, workers);
    return json{{"estimate", report::mc_to_json(est, seed)}, {"g", gname}};
  }
  const auto pr = findim::phase_relation_check(m, g, n_samples, seed, grid, workers);
  return json{{"lhs", pr.lhs},
              {"rhs", report::mc_to_json(pr.rhs, seed)},
              {"quad_tol", pr.quad_tol},
              {"pass", pr.pass},
              {"g", gname}};
}

// ---- gaussian ----------------------------------------------------------------

json run_gaussian(const json& p, std::uint64_t seed, int workers) {
  reject_unknown(p, {"mode", "N", "t", "s", "n", "rank", "phi_norm", "v_norm"});
  const auto mode = get_str(p, "mode", "char", {"char", "cm"});
  gaussian::GaussianSpec spec;
  spec.trunc = static_cast<int>(get_int(p, "N", 8, 1, 64));
  spec.scale = get_real(p, "t", 1.0, 1e-6, 1e6);
  spec.smooth = get_real(p, "s", 0.0, 0.0, 16.0);
  spec.rank = static_cast<int>(get_int(p, "rank", 1, 1, 64));
  const auto n = static_cast<std::uint64_t>(get_int(p, "n", 100000, 2, 1000000000));

  if (mode == "char") {
    const double phi_norm = get_real(p, "phi_norm", 1.0, 1e-9, 1e6);
    auto phi = gaussian::random_field(spec.trunc, rng::key(seed, 0xf00), 1.0);
    const double nrm = spectral::sobolev_norm(phi, 0.0);
    phi *= cplx{phi_norm / nrm, 0.0};
    const auto est = gaussian::characteristic_functional_mc(spec, phi, n, seed, workers);
    // white-noise target; the smoothed law rescales ||phi|| mode by mode
    double target_norm_sq;
    if (spec.smooth == 0.0) {
      target_norm_sq = phi_norm * phi_norm;
    } else {
      const auto phis = spectral::laplacian_power(phi, -spec.smooth);
      const double wn = spectral::sobolev_norm(phis, 0.0);
      target_norm_sq = wn * wn;
    }
    const double expected = std::exp(-0.5 * target_norm_sq / (spec.scale * spec.scale));
    const bool pass = std::abs(est.mean - cplx{expected, 0.0}) <= 3.0 * est.stderr_;
    return json{{"mc", report::mc_to_json(est, seed)},
                {"expected", expected},
                {"phi_l2_norm", phi_norm},
                {"pass_3sigma", pass}};
  }

  // Cameron-Martin reweighting check: E[g(.+v)] vs E[g(.) rho_v(.)]
  const double v_norm = get_real(p, "v_norm", 0.5, 1e-9, 1e3);
  auto v = gaussian::random_field(spec.trunc, rng::key(seed, 0xbeef), 1.5);
  const double vn = spectral::sobolev_norm(v, 2.0 * spec.smooth);
  v *= cplx{v_norm / vn, 0.0};
  auto phi = gaussian::random_field(spec.trunc, rng::key(seed, 0xcafe), 1.0);
  phi *= cplx{1.0 / spectral::sobolev_norm(phi, 0.0), 0.0};

  std::vector<cplx> lhs_vals(n), rhs_vals(n);
  fsm::mc::parallel_for(n, workers, [&](std::uint64_t i) {
    const auto sig = gaussian::sample_smoothed(spec, seed, i)[0];
    const auto shifted = sig + v;
    const double x1 = spectral::l2_inner(phi, shifted).real();
    lhs_vals[i] = cplx{std::cos(x1), std::sin(x1)};
    const double x2 = spectral::l2_inner(phi, sig).real();
    const double rho = gaussian::cameron_martin_density(spec, v, sig);
    rhs_vals[i] = cplx{std::cos(x2), std::sin(x2)} * rho;
  });
  const auto lhs = fsm::mc::reduce(lhs_vals);
  const auto rhs = fsm::mc::reduce(rhs_vals);
  const double diff = std::abs(lhs.mean - rhs.mean);
  const double band = 3.0 * std::sqrt(lhs.stderr_ * lhs.stderr_ + rhs.stderr_ * rhs.stderr_);
  return json{{"translated", report::mc_to_json(lhs, seed)},
              {"reweighted", report::mc_to_json(rhs, seed)},
              {"diff", diff},
              {"band_3sigma", band},
              {"pass_3sigma", diff <= band},
              {"v_sobolev_norm", v_norm}};
}

// ---- wzlg ------------------------------------------------------------------

json run_wzlg(const json& p, std::uint64_t seed, int workers) {
  reject_unknown(p, {"poly", "s", "t", "N", "samples", "starts", "variant", "base"});
  if (!p.contains("poly")) throw ConfigError("wzlg: 'poly' required");
  const auto poly = parse_poly(p["poly"]);
  const double s = get_real(p, "s", 2.0, 1e-6, 16.0);
  const double t = get_real(p, "t", 1.0, 1e-6, 1e6);
  const int N = static_cast<int>(get_int(p, "N", 4, 1, 16));
  const auto samples = static_cast<std::uint64_t>(get_int(p, "samples", 100, 1, 10000000));
  const int starts = static_cast<int>(get_int(p, "starts", 64, 0, 10000));
  const auto vname = get_str(p, "variant", "frechet", {"frechet", "literal"});
  const auto variant = vname == "frechet" ? wzlg::DerivativeVariant::kFrechet
                                          : wzlg::DerivativeVariant::kLiteral;

  cplx base;
  bool have_base = false;
  if (p.contains("base")) {
    base = parse_complex(p["base"], "wzlg base");
    have_base = true;
  } else {
    // first critical point with P'' away from zero
    std::vector<cplx> dp;
    for (std::size_t j = 1; j < poly.size(); ++j) dp.push_back(double(j) * poly[j]);
    std::vector<cplx> ddp;
    for (std::size_t j = 1; j < dp.size(); ++j) ddp.push_back(double(j) * dp[j]);
    for (const auto& r : wzlg::polynomial_roots(dp)) {
      cplx acc = ddp.empty() ? cplx{0, 0} : ddp.back();
      for (std::size_t j = ddp.size(); j-- > 1;) acc = acc * r + ddp[j - 1];
      if (std::abs(acc) > 1e-8) {
        base = r;
        have_base = true;
        break;
      }
    }
  }
  if (!have_base) throw ConfigError("wzlg: no usable base point (P'' vanishes at all roots)");

  const auto model = wzlg::make_model(poly, s, t, N, base);
  const auto res = wzlg::run_experiment(model, samples, seed, starts, variant, workers);

  json hist;
  for (const auto& [count, freq] : res.branch_histogram) hist[std::to_string(count)] = freq;
  return json{{"mass", report::mc_to_json(res.mass, seed)},
              {"phase_integral", report::mc_to_json(res.phase_integral, seed)},
              {"branch_histogram", hist},
              {"newton_failures", res.newton_failures},
              {"near_zero_phases", res.near_zero_phases},
              {"batch_mismatches", res.draws_with_batch_mismatch},
              {"variant", vname},
              {"base", cplx_json(base)}};
}

// ---- fz --------------------------------------------------------------------

Eigen::MatrixXcd random_hermitian(int n, std::uint64_t key, bool traceless) {
  Eigen::MatrixXcd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const auto pr = rng::normal_pair(rng::chain(key, static_cast<std::uint64_t>(i * n + j)));
      g(i, j) = cplx{pr.a, pr.b};
    }
  Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
  if (traceless) h -= (h.trace() / double(n)) * Eigen::MatrixXcd::Identity(n, n);
  return h;
}

json run_fz(const json& p, std::uint64_t seed) {
  reject_unknown(p, {"n", "size", "algebra", "s", "N", "min_cycle_len", "matrices", "points"});
  const int n = static_cast<int>(get_int(p, "n", 2, 0, 4));
  const int size = static_cast<int>(get_int(p, "size", 2, 2, 4));
  const auto alg_name = get_str(p, "algebra", "gl", {"gl", "sl"});
  const double s = get_real(p, "s", 2.0, 0.51, 16.0);
  const int N = static_cast<int>(get_int(p, "N", 3, 1, 6));
  const int min_len = static_cast<int>(get_int(p, "min_cycle_len", 2, 1, 2));

  wick::LieBasisSpec basis;
  basis.n = size;
  basis.algebra = alg_name == "gl" ? wick::LieBasisSpec::Algebra::kGl
                                   : wick::LieBasisSpec::Algebra::kSl;
  const bool traceless = basis.algebra == wick::LieBasisSpec::Algebra::kSl;

  std::vector<Eigen::MatrixXcd> xs;
  if (p.contains("matrices")) {
    for (const auto& mj : p["matrices"]) {
      const int rows = static_cast<int>(mj.size());
      if (rows != size) throw ConfigError("fz: matrix size mismatch");
      Eigen::MatrixXcd m(size, size);
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) m(i, j) = parse_complex(mj[i][j], "fz matrix entry");
      xs.push_back(std::move(m));
    }
    if (static_cast<int>(xs.size()) != n) throw ConfigError("fz: need n matrices");
  } else {
    for (int i = 0; i < n; ++i)
      xs.push_back(random_hermitian(size, rng::key(seed, 0x33, static_cast<std::uint64_t>(i)),
                                    traceless));
  }

  wick::TorusPoint z, w;
  std::vector<wick::TorusPoint> ins;
  if (p.contains("points")) {
    const auto& pa = p["points"];
    if (static_cast<int>(pa.size()) != n + 2)
      throw ConfigError("fz: points must list z, w and the n insertion points");
    auto read_pt = [](const json& e) {
      if (!e.is_array() || e.size() != 2) throw ConfigError("fz: point must be [x1, x2]");
      return wick::TorusPoint{e[0].get<double>(), e[1].get<double>()};
    };
    z = read_pt(pa[0]);
    w = read_pt(pa[1]);
    for (int i = 0; i < n; ++i) ins.push_back(read_pt(pa[static_cast<std::size_t>(i) + 2]));
  } else {
    auto rnd_pt = [&](std::uint64_t tag) {
      return wick::TorusPoint{
          rng::uniform_range(rng::key(seed, 0x44, tag), 0.0, 2.0 * M_PI),
          rng::uniform_range(rng::key(seed, 0x45, tag), 0.0, 2.0 * M_PI)};
    };
    z = rnd_pt(0);
    w = rnd_pt(1);
    for (int i = 0; i < n; ++i) ins.push_back(rnd_pt(static_cast<std::uint64_t>(i) + 2));
  }

  wick::VData vd;
  vd.phi_z = random_hermitian(size, rng::key(seed, 0x55), traceless);
  vd.phi_w = random_hermitian(size, rng::key(seed, 0x56), traceless);

  gaussian::GaussianSpec spec;
  spec.trunc = N;
  spec.scale = 1.0;
  spec.smooth = s;
  spec.rank = basis.dim();

  const auto kt = wick::KernelTable::from_gaussian(spec, z, w, ins);
  const auto oracle = wick::gaussian_moment_oracle(xs, z, w, ins, vd, spec, basis,
                                                   /*centered=*/min_len == 2);
  const cplx rhs_proj =
      wick::frenkel_zhu_rhs(xs, kt, vd, basis, min_len, wick::TraceConvention::kProjector);
  const cplx rhs_lit =
      wick::frenkel_zhu_rhs(xs, kt, vd, basis, min_len, wick::TraceConvention::kLiteralTraces);
  const double scale = std::max(1e-300, std::abs(oracle.value));
  return json{{"oracle", cplx_json(oracle.value)},
              {"rhs_projector", cplx_json(rhs_proj)},
              {"rhs_literal_traces", cplx_json(rhs_lit)},
              {"rel_diff_projector", std::abs(rhs_proj - oracle.value) / scale},
              {"rel_diff_literal", std::abs(rhs_lit - oracle.value) / scale},
              {"pairings", oracle.pairings},
              {"partitions",
               static_cast<std::uint64_t>(wick::enumerate_cycles_chain(n, min_len).size())},
              {"algebra", alg_name}};
}

}  // namespace

json default_config(const std::string& subcommand) {
  return json{{"subcommand", subcommand}, {"seed", 0}, {"workers", 1}, {"params", json::object()}};
}

json run(const json& config) {
  if (!config.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = config.begin(); it != config.end(); ++it) {
    static const std::set<std::string> top{"subcommand", "seed", "workers", "params", "output"};
    if (!top.count(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
  }
  if (!config.contains("subcommand")) throw ConfigError("config: 'subcommand' required");
  const auto sub = config["subcommand"].get<std::string>();

  std::uint64_t seed = 0;
  if (config.contains("seed")) {
    if (!config["seed"].is_number_integer() && !config["seed"].is_number_unsigned())
      throw ConfigError("config: seed must be an integer");
    seed = config["seed"].get<std::uint64_t>();
  } else if (const char* env = std::getenv("FSMLAB_SEED")) {
    seed = std::strtoull(env, nullptr, 10);
  }
  const int workers =
      static_cast<int>(get_int(config, "workers", 1, 1, 256));
  const json params = config.value("params", json::object());

  const auto t0 = std::chrono::steady_clock::now();
  json results;
  if (sub == "detk")
    results = run_detk(params, seed);
  else if (sub == "findim")
    results = run_findim(params, seed, workers);
  else if (sub == "gaussian")
    results = run_gaussian(params, seed, workers);
  else if (sub == "wzlg")
    results = run_wzlg(params, seed, workers);
  else if (sub == "fz")
    results = run_fz(params, seed);
  else
    throw ConfigError("unknown subcommand '" + sub + "'");
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  json rep = report::make_report(sub, seed, params, results, dt, workers);
  if (config.contains("output")) {
    std::ofstream out(config["output"].get<std::string>());
    if (!out) throw ConfigError("cannot open output file");
    out << rep.dump(2) << "\n";
  }
  return rep;
}

namespace {

void flatten_numeric(const json& j, const std::string& prefix,
                     std::map<std::string, double>& out) {
  if (j.is_number()) {
    out[prefix] = j.get<double>();
  } else if (j.is_boolean()) {
    out[prefix] = j.get<bool>() ? 1.0 : 0.0;
  } else if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it)
      flatten_numeric(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (j.is_array()) {
    int i = 0;
    for (const auto& e : j) flatten_numeric(e, prefix + "[" + std::to_string(i++) + "]", out);
  }
}

}  // namespace

std::string sweep(const json& base_config, const std::string& axis, const json& values) {
  if (!values.is_array() || values.empty())
    throw ConfigError("sweep: 'values' must be a non-empty array");
  if (axis.empty()) throw ConfigError("sweep: axis name required");

  std::vector<std::map<std::string, double>> rows;
  std::vector<double> axis_vals;
  for (const auto& v : values) {
    if (!v.is_number()) throw ConfigError("sweep: axis values must be numeric");
    json cfg = base_config;
    cfg.erase("output");
    cfg["params"][axis] = v;
    const json rep = run(cfg);
    std::map<std::string, double> flat;
    flatten_numeric(rep["results"], "", flat);
    rows.push_back(std::move(flat));
    axis_vals.push_back(v.get<double>());
  }

  // union of columns, sorted
  std::set<std::string> cols;
  for (const auto& r : rows)
    for (const auto& [k, _] : r) cols.insert(k);

  std::ostringstream csv;
  csv.precision(17);
  csv << axis;
  for (const auto& c : cols) csv << "," << c;
  csv << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    csv << axis_vals[i];
    for (const auto& c : cols) {
      csv << ",";
      auto it = rows[i].find(c);
      if (it != rows[i].end()) csv << it->second;
    }
    csv << "\n";
  }
  return csv.str();
}

}  // namespace fsm::runner
