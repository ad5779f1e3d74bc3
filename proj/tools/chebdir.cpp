#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>

#include <fmt/format.h>

#include "chebdir/experiments.hpp"

namespace {

using chebdir::ConfigError;
using chebdir::ConfigSections;

struct Flags {
  std::string config;
  std::string out_dir = "out";
  std::string kind;
  std::string name;
  std::string model;
  std::string params;
  std::string weight;
  std::string theta;
  std::string method;
  std::string grid;
  std::string out;
  double mesh = 0.0;
  double tol = 0.0;
  int j_min = 0;
  int j_max = 0;
  int n = 0;
};

void put(ConfigSections& s, const std::string& sec, const std::string& key, const std::string& value) {
  if (!value.empty()) s[sec][key] = value;
}

std::string num(double v) { return v > 0.0 ? fmt::format("{:.17g}", v) : std::string(); }
std::string num(int v) { return v > 0 ? std::to_string(v) : std::string(); }

// Flags override the config file; section for theta and j range depends on the kind.
ConfigSections assemble(const Flags& f, const std::string& default_kind) {
  ConfigSections s = f.config.empty() ? ConfigSections{} : chebdir::load_ini(f.config);
  put(s, "experiment", "kind", f.kind);
  if (!s["experiment"].count("kind")) put(s, "experiment", "kind", default_kind);
  put(s, "experiment", "name", f.name);
  const std::string kind = s["experiment"]["kind"];
  if (!f.model.empty()) {
    s["set"].clear();
    s["set"]["model"] = f.model;
    for (const auto& [k, v] : chebdir::parse_params(f.params)) s["set"][k] = v;
  } else if (!f.params.empty()) {
    for (const auto& [k, v] : chebdir::parse_params(f.params)) s["set"][k] = v;
  }
  put(s, "set", "weight", f.weight);
  if (f.mesh > 0.0) {
    s["set"].erase("resolution");
    s["set"]["mesh"] = num(f.mesh);
  }
  put(s, "solver", "tol", num(f.tol));
  const std::string range_sec = kind == "delta" ? "delta" : kind.rfind("verify", 0) == 0 ? "verify" : kind.rfind("lemma100", 0) == 0 ? "lemma100" : "sweep";
  put(s, range_sec == "delta" ? "sweep" : range_sec, "theta", f.theta);
  put(s, range_sec, range_sec == "delta" ? "n_min" : "j_min", num(f.j_min));
  put(s, range_sec, range_sec == "delta" ? "n_max" : "j_max", num(f.j_max));
  put(s, "delta", "method", f.method);
  if (kind == "delta" && f.n > 0) {
    s["delta"]["n_min"] = s["delta"]["n_max"] = num(f.n);
  }
  if (kind == "extremal") put(s, "extremal", "n", num(f.n));
  put(s, "extremal", "grid", f.grid);
  for (auto it = s.begin(); it != s.end();) it = it->second.empty() ? s.erase(it) : std::next(it);
  return s;
}

int run(const Flags& f, const std::string& default_kind, const std::vector<std::string>& allowed) {
  const auto cfg = chebdir::parse_config(assemble(f, default_kind));
  if (std::find(allowed.begin(), allowed.end(), cfg.kind) == allowed.end())
    throw ConfigError(fmt::format("experiment kind '{}' does not belong to this subcommand", cfg.kind));
  const auto outcome = chebdir::run_experiment(cfg, f.out_dir);
  for (const auto& c : outcome.checks) fmt::print("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
  for (const auto& e : outcome.solver_errors) fmt::print("SOLVER {}\n", e);
  for (const auto& p : outcome.files) fmt::print("wrote {}\n", p.string());
  return outcome.exit_code();
}

int gen(const Flags& f) {
  if (f.model.empty()) throw ConfigError("gen: --model is required");
  if (f.out.empty()) throw ConfigError("gen: --out is required");
  const double h = f.mesh > 0.0 ? f.mesh : 2.0 * std::numbers::pi / 64.0;
  chebdir::PointCloud k;
  try {
    k = chebdir::generate(chebdir::make_model(f.model, chebdir::parse_params(f.params)), h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (auto w = chebdir::make_weight(f.weight.empty() ? "none" : f.weight)) k = chebdir::with_weight(std::move(k), w);
  chebdir::save_cloud(f.out, k);
  fmt::print("wrote {} ({} points, dim {})\n", f.out, k.size(), k.dim());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directional Chebyshev constants, transfinite diameter and extremal function experiments"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "INI experiment config")->check(CLI::ExistingFile);
    sub->add_option("--out-dir", f.out_dir, "directory for CSV/SVG output");
    sub->add_option("--name", f.name, "output base name");
    sub->add_option("--kind", f.kind, "experiment kind");
    sub->add_option("--model", f.model, "set model (product_discs, torus, ellipsoid, zaharjuta, interval)");
    sub->add_option("--params", f.params, "model parameters k=v,k=v");
    sub->add_option("--weight", f.weight, "none | const:c | gauss:s");
    sub->add_option("--mesh", f.mesh, "angular spacing h");
    sub->add_option("--tol", f.tol, "relative duality-gap tolerance");
    sub->add_option("--theta", f.theta, "direction, e.g. 0.5:0.5");
    sub->add_option("--j-min", f.j_min);
    sub->add_option("--j-max", f.j_max);
  };

  auto* sweep = app.add_subcommand("sweep", "tau along a direction sequence");
  common(sweep);
  auto* verify = app.add_subcommand("verify", "identity checks");
  common(verify);
  auto* lemma = app.add_subcommand("lemma100", "axis, interior and shear checks on circled sets");
  common(lemma);
  auto* delta = app.add_subcommand("delta", "transfinite diameter estimates");
  common(delta);
  delta->add_option("--method", f.method, "fekete | zaharjuta");
  delta->add_option("--n", f.n, "degree");
  auto* extremal = app.add_subcommand("extremal", "finite-degree extremal function on a grid");
  common(extremal);
  extremal->add_option("--n", f.n, "degree");
  extremal->add_option("--grid", f.grid, "box:lo:hi:count or points:z;z|z;z");
  auto* gen_cmd = app.add_subcommand("gen", "write a point cloud");
  gen_cmd->add_option("--model", f.model)->required();
  gen_cmd->add_option("--params", f.params);
  gen_cmd->add_option("--mesh", f.mesh);
  gen_cmd->add_option("--weight", f.weight);
  gen_cmd->add_option("--out", f.out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 4;
  }

  try {
    if (sweep->parsed()) return run(f, "tau-sweep", {"tau-sweep", "counterexample"});
    if (verify->parsed())
      return run(f, "verify-step1", {"verify-step1", "verify-step2", "verify-step3-factorization", "verify-tch", "verify-tch2"});
    if (lemma->parsed()) return run(f, "lemma100-ellipsoid", {"lemma100-ellipsoid", "lemma100-axis"});
    if (delta->parsed()) return run(f, "delta", {"delta"});
    if (extremal->parsed()) return run(f, "extremal", {"extremal"});
    if (gen_cmd->parsed()) return gen(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 4;
  } catch (const chebdir::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
