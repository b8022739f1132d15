// fsmlab: batch harness for the function-space measure laboratory.
//
// Subcommands: detk, findim, gaussian, wzlg, fz, sweep.  Each run emits a
// JSON report (stdout, or --out FILE); sweeps emit CSV.  Exit codes:
// 0 success, 2 config error, 3 numerical failure.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "fsm/errors.hpp"
#include "fsm/runner.hpp"

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw fsm::ConfigError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw fsm::ConfigError("bad JSON in '" + path + "': " + e.what());
  }
}

struct CommonArgs {
  std::string config_path;
  std::string out_path;
  std::int64_t seed = -1;  // -1: not set on the command line
  int workers = 0;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config_path, "JSON config file (flags override it)");
  cmd->add_option("--out", a.out_path, "write the JSON report here");
  cmd->add_option("--seed", a.seed, "RNG seed (u64)");
  cmd->add_option("--workers", a.workers, "worker thread count");
}

json assemble_config(const std::string& sub, const CommonArgs& a, const json& flag_params) {
  json cfg = a.config_path.empty() ? fsm::runner::default_config(sub)
                                   : load_json_file(a.config_path);
  cfg["subcommand"] = sub;
  if (a.seed >= 0) cfg["seed"] = static_cast<std::uint64_t>(a.seed);
  if (a.workers > 0) cfg["workers"] = a.workers;
  if (!a.out_path.empty()) cfg["output"] = a.out_path;
  for (auto it = flag_params.begin(); it != flag_params.end(); ++it)
    cfg["params"][it.key()] = it.value();
  return cfg;
}

int emit(const json& report, const CommonArgs& a) {
  if (a.out_path.empty()) std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"function-space measure laboratory"};
  app.require_subcommand(1);

  // ---- detk
  CommonArgs detk_args;
  std::string detk_input;
  int detk_k = 2;
  auto* detk = app.add_subcommand("detk", "determinants and Schatten norms of a matrix");
  add_common(detk, detk_args);
  detk->add_option("--input", detk_input, "JSON file with the matrix (2D array)");
  detk->add_option("--k", detk_k, "regularization order");

  // ---- findim
  CommonArgs fd_args;
  std::string fd_map, fd_mode = "degree", fd_g = "one";
  std::int64_t fd_samples = 20000;
  auto* fd = app.add_subcommand("findim", "finite-dimensional degree/pushforward suite");
  add_common(fd, fd_args);
  fd->add_option("--map", fd_map, "map id: identity zsq zcube zbar zsq_m1 cubic1d");
  fd->add_option("--mode", fd_mode, "degree | pushforward | phase");
  fd->add_option("--samples", fd_samples, "MC sample count");
  fd->add_option("--g", fd_g, "test function: one | unit_ball");

  // ---- gaussian
  CommonArgs g_args;
  std::string g_mode = "char";
  std::int64_t g_N = 8, g_n = 100000;
  double g_t = 1.0, g_s = 0.0;
  auto* gs = app.add_subcommand("gaussian", "white-noise measure checks");
  add_common(gs, g_args);
  gs->add_option("--mode", g_mode, "char | cm");
  gs->add_option("--N", g_N, "truncation");
  gs->add_option("--t", g_t, "scale");
  gs->add_option("--s", g_s, "smoothing exponent");
  gs->add_option("--n", g_n, "MC sample count");

  // ---- wzlg
  CommonArgs w_args;
  std::string w_poly, w_variant = "frechet", w_base;
  std::int64_t w_N = 4, w_samples = 100, w_starts = 64;
  double w_s = 2.0, w_t = 1.0;
  auto* wz = app.add_subcommand("wzlg", "WZLG pullback-measure experiment");
  add_common(wz, w_args);
  wz->add_option("--poly", w_poly, "P coefficients 'c0,c1,...'");
  wz->add_option("--s", w_s, "smoothing exponent");
  wz->add_option("--t", w_t, "scale");
  wz->add_option("--N", w_N, "truncation");
  wz->add_option("--samples", w_samples, "eta draws");
  wz->add_option("--starts", w_starts, "Newton multistarts per draw");
  wz->add_option("--variant", w_variant, "frechet | literal");
  wz->add_option("--base", w_base, "base point 're,im'");

  // ---- fz
  CommonArgs fz_args;
  std::string fz_scenario, fz_algebra = "gl";
  std::int64_t fz_n = 2, fz_size = 2, fz_N = 3;
  double fz_s = 2.0;
  auto* fz = app.add_subcommand("fz", "cycles-and-chain correlation identity");
  add_common(fz, fz_args);
  fz->add_option("--scenario", fz_scenario, "JSON scenario {n, matrices, points, s, N, algebra, seed}");
  fz->add_option("--n", fz_n, "insertion count");
  fz->add_option("--size", fz_size, "matrix size");
  fz->add_option("--algebra", fz_algebra, "gl | sl");
  fz->add_option("--s", fz_s, "smoothing exponent");
  fz->add_option("--N", fz_N, "truncation");

  // ---- sweep
  CommonArgs sw_args;
  std::string sw_axis, sw_values;
  auto* sw = app.add_subcommand("sweep", "repeated run over one numeric axis (CSV)");
  add_common(sw, sw_args);
  sw->add_option("--axis", sw_axis, "parameter name to sweep")->required();
  sw->add_option("--values", sw_values, "comma-separated numeric values")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (detk->parsed()) {
      json params;
      if (!detk_input.empty()) params["matrix"] = load_json_file(detk_input);
      params["k"] = detk_k;
      return emit(fsm::runner::run(assemble_config("detk", detk_args, params)), detk_args);
    }
    if (fd->parsed()) {
      json params{{"mode", fd_mode}, {"n_samples", fd_samples}, {"g", fd_g}};
      if (!fd_map.empty()) params["map"] = fd_map;
      return emit(fsm::runner::run(assemble_config("findim", fd_args, params)), fd_args);
    }
    if (gs->parsed()) {
      json params{{"mode", g_mode}, {"N", g_N}, {"t", g_t}, {"s", g_s}, {"n", g_n}};
      return emit(fsm::runner::run(assemble_config("gaussian", g_args, params)), g_args);
    }
    if (wz->parsed()) {
      json params{{"s", w_s}, {"t", w_t},           {"N", w_N},
                  {"samples", w_samples}, {"starts", w_starts}, {"variant", w_variant}};
      if (!w_poly.empty()) params["poly"] = w_poly;
      if (!w_base.empty()) {
        std::stringstream ss(w_base);
        std::string re, im;
        std::getline(ss, re, ',');
        std::getline(ss, im, ',');
        params["base"] = json{std::stod(re), im.empty() ? 0.0 : std::stod(im)};
      }
      return emit(fsm::runner::run(assemble_config("wzlg", w_args, params)), w_args);
    }
    if (fz->parsed()) {
      json params;
      if (!fz_scenario.empty()) {
        json sc = load_json_file(fz_scenario);
        if (sc.contains("seed")) {
          fz_args.seed = sc["seed"].get<std::int64_t>();
          sc.erase("seed");
        }
        params = sc;
      } else {
        params = json{{"n", fz_n}, {"size", fz_size}, {"algebra", fz_algebra},
                      {"s", fz_s}, {"N", fz_N}};
      }
      return emit(fsm::runner::run(assemble_config("fz", fz_args, params)), fz_args);
    }
    if (sw->parsed()) {
      if (sw_args.config_path.empty())
        throw fsm::ConfigError("sweep: --config with a base run config is required");
      json values = json::array();
      std::stringstream ss(sw_values);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          values.push_back(std::stod(tok));
        } catch (const std::exception&) {
          throw fsm::ConfigError("sweep: bad value '" + tok + "'");
        }
      }
      json cfg = load_json_file(sw_args.config_path);
      if (sw_args.seed >= 0) cfg["seed"] = static_cast<std::uint64_t>(sw_args.seed);
      if (sw_args.workers > 0) cfg["workers"] = sw_args.workers;
      const std::string csv = fsm::runner::sweep(cfg, sw_axis, values);
      if (!sw_args.out_path.empty()) {
        std::ofstream out(sw_args.out_path);
        if (!out) throw fsm::ConfigError("cannot open output file");
        out << csv;
      } else {
        std::cout << csv;
      }
      return 0;
    }
  } catch (const fsm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const fsm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
