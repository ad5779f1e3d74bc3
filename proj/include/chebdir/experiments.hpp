#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chebdir/config.hpp"
#include "chebdir/errors.hpp"
#include "chebdir/fekete.hpp"
#include "chebdir/index_order.hpp"
#include "chebdir/minimax.hpp"
#include "chebdir/parallel.hpp"
#include "chebdir/pluripotential.hpp"
#include "chebdir/report.hpp"
#include "chebdir/sets.hpp"

namespace chebdir {

inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = {"tau-sweep",   "counterexample", "delta",      "verify-step1",       "verify-step2",
                                                 "verify-step3-factorization",    "verify-tch", "verify-tch2",        "lemma100-ellipsoid",
                                                 "lemma100-axis",                 "extremal"};
  return kinds;
}

struct ExperimentConfig {
  std::string kind;
  std::string name;
  std::uint64_t seed = 1;

  std::string model;
  std::map<std::string, std::string> model_params;
  double mesh = 2.0 * std::numbers::pi / 64.0;
  std::string weight = "none";
  MinimaxOptions solver;

  std::vector<double> theta;
  int j_min = 1;
  int j_max = 20;
  int window = 8;
  double conv_tol = 1e-2;
  double mesh_tol = 1e-2;
  bool half_mesh = true;
  std::string expect;
  std::optional<double> expect_limit;
  double limit_tol = 1e-2;

  std::string method = "fekete";
  int exchange_rounds = 0;
  int nodes = 16;
  int degree_for_tau = 20;
  double rel_tol = 0.05;

  double check_tol = 0.0;  // 0 picks the identity's default
  double eps = 0.1;
  std::optional<double> eta;
  int triples = 20;
  std::vector<MultiIndex> alphas;
  int candidates_per_axis = 41;
  double candidates_margin = 1.5;
  double z_tol = 1e-7;

  std::vector<double> interior = {0.80, 0.90, 0.95};
  int degree = 20;
  double axis_tol = 1e-6;
  double bridge_tol = 1e-2;
  cplx shear_c = 1.0;
  std::vector<cplx> shear_d = {0.5};
  double shear_tol = 1e-8;

  int n = 12;
  std::string grid = "box:-2:2:5";
};

namespace detail {

class KeyReader {
public:
  explicit KeyReader(const ConfigSections& s) : s_(s) {}

  const std::string* get(const std::string& section, const std::string& key) {
    used_.insert(section + "." + key);
    const auto it = s_.find(section);
    if (it == s_.end()) return nullptr;
    const auto jt = it->second.find(key);
    return jt == it->second.end() ? nullptr : &jt->second;
  }

  void real(const std::string& sec, const std::string& key, double& out) {
    if (const auto* v = get(sec, key)) out = parse_double(*v, sec + "." + key);
  }
  void integer(const std::string& sec, const std::string& key, int& out) {
    if (const auto* v = get(sec, key)) out = static_cast<int>(parse_int(*v, sec + "." + key));
  }
  void text(const std::string& sec, const std::string& key, std::string& out) {
    if (const auto* v = get(sec, key)) out = *v;
  }

  void reject_unused(const std::set<std::string>& free_sections) const {
    for (const auto& [sec, keys] : s_) {
      if (free_sections.count(sec)) continue;
      for (const auto& [key, value] : keys)
        if (!used_.count(sec + "." + key)) throw ConfigError(fmt::format("config: unknown key '{}' in [{}]", key, sec));
    }
  }

private:
  const ConfigSections& s_;
  std::set<std::string> used_;
};

}  // namespace detail

inline ExperimentConfig parse_config(const ConfigSections& sections) {
  static const std::set<std::string> known = {"experiment", "set", "solver", "sweep", "delta", "verify", "lemma100", "extremal"};
  for (const auto& [sec, keys] : sections)
    if (!known.count(sec)) throw ConfigError("config: unknown section [" + sec + "]");

  detail::KeyReader rd(sections);
  ExperimentConfig c;
  rd.text("experiment", "kind", c.kind);
  if (c.kind.empty()) throw ConfigError("config: [experiment] kind is required");
  if (std::find(experiment_kinds().begin(), experiment_kinds().end(), c.kind) == experiment_kinds().end())
    throw ConfigError("config: unknown experiment kind '" + c.kind + "'");
  c.name = c.kind;
  rd.text("experiment", "name", c.name);
  if (const auto* v = rd.get("experiment", "seed")) c.seed = static_cast<std::uint64_t>(parse_int(*v, "experiment.seed"));

  if (auto it = sections.find("set"); it != sections.end()) {
    for (const auto& [key, value] : it->second) {
      if (key == "model")
        c.model = value;
      else if (key == "mesh")
        c.mesh = parse_double(value, "set.mesh");
      else if (key == "resolution")
        c.mesh = 2.0 * std::numbers::pi / parse_double(value, "set.resolution");
      else if (key == "weight")
        c.weight = value;
      else
        c.model_params[key] = value;
    }
    if (it->second.count("mesh") && it->second.count("resolution")) throw ConfigError("config: give either set.mesh or set.resolution");
  }
  if (!(c.mesh > 0.0) || !std::isfinite(c.mesh)) throw ConfigError("config: mesh must be > 0");

  rd.real("solver", "tol", c.solver.tol);
  rd.integer("solver", "initial_sides", c.solver.initial_sides);
  rd.integer("solver", "max_refinements", c.solver.max_refinements);
  if (!(c.solver.tol > 0.0)) throw ConfigError("config: solver.tol must be > 0");
  if (c.solver.initial_sides < 3) throw ConfigError("config: solver.initial_sides must be >= 3");

  for (const std::string sec : {"sweep", "verify", "lemma100"}) {
    if (const auto* v = rd.get(sec, "theta")) c.theta = parse_doubles(*v, sec + ".theta");
    rd.integer(sec, "j_min", c.j_min);
    rd.integer(sec, "j_max", c.j_max);
  }
  rd.integer("sweep", "window", c.window);
  rd.real("sweep", "conv_tol", c.conv_tol);
  rd.real("sweep", "mesh_tol", c.mesh_tol);
  if (const auto* v = rd.get("sweep", "half_mesh")) c.half_mesh = parse_bool(*v, "sweep.half_mesh");
  rd.text("sweep", "expect", c.expect);
  if (const auto* v = rd.get("sweep", "expect_limit")) c.expect_limit = parse_double(*v, "sweep.expect_limit");
  rd.real("sweep", "limit_tol", c.limit_tol);

  rd.text("delta", "method", c.method);
  rd.integer("delta", "n_min", c.j_min);
  rd.integer("delta", "n_max", c.j_max);
  rd.integer("delta", "exchange_rounds", c.exchange_rounds);
  rd.integer("delta", "nodes", c.nodes);
  rd.integer("delta", "degree_for_tau", c.degree_for_tau);
  rd.text("delta", "expect", c.expect);
  rd.real("delta", "rel_tol", c.rel_tol);

  rd.real("verify", "tol", c.check_tol);
  rd.real("verify", "eps", c.eps);
  if (const auto* v = rd.get("verify", "eta")) c.eta = parse_double(*v, "verify.eta");
  rd.integer("verify", "triples", c.triples);
  if (const auto* v = rd.get("verify", "alphas")) c.alphas = parse_multiindex_list(*v);
  rd.integer("verify", "candidates_per_axis", c.candidates_per_axis);
  rd.real("verify", "candidates_margin", c.candidates_margin);
  rd.real("verify", "z_tol", c.z_tol);

  if (const auto* v = rd.get("lemma100", "interior")) c.interior = parse_doubles(*v, "lemma100.interior");
  rd.integer("lemma100", "degree", c.degree);
  rd.real("lemma100", "axis_tol", c.axis_tol);
  rd.real("lemma100", "bridge_tol", c.bridge_tol);
  if (const auto* v = rd.get("lemma100", "shear_c")) c.shear_c = parse_complex(*v, "lemma100.shear_c");
  if (const auto* v = rd.get("lemma100", "shear_d")) c.shear_d = parse_complexes(*v, "lemma100.shear_d");
  rd.real("lemma100", "shear_tol", c.shear_tol);

  rd.integer("extremal", "n", c.n);
  rd.text("extremal", "grid", c.grid);

  rd.reject_unused({"set"});

  if (c.j_min < 1) throw ConfigError("config: j_min must be >= 1");
  if (c.j_max < c.j_min) throw ConfigError("config: j_max must be >= j_min");
  if (c.window < 1) throw ConfigError("config: window must be >= 1");
  for (double t : {c.conv_tol, c.mesh_tol, c.limit_tol, c.rel_tol, c.z_tol, c.axis_tol, c.bridge_tol, c.shear_tol})
    if (!(t > 0.0)) throw ConfigError("config: tolerances must be > 0");
  if (c.check_tol < 0.0) throw ConfigError("config: verify.tol must be > 0");
  if (!(c.eps >= 0.0)) throw ConfigError("config: verify.eps must be >= 0");
  if (c.eta && !(*c.eta > 0.0)) throw ConfigError("config: verify.eta must be > 0");
  if (c.method != "fekete" && c.method != "zaharjuta") throw ConfigError("config: delta.method must be fekete or zaharjuta");
  if (!c.theta.empty()) {
    try {
      Direction check(c.theta);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: theta: ") + e.what());
    }
  }
  if (c.model.empty() && c.kind != "verify-tch2") throw ConfigError("config: [set] model is required");
  if (!c.model.empty()) make_model(c.model, c.model_params);
  make_weight(c.weight);
  return c;
}

inline ExperimentConfig load_config(const std::string& path) { return parse_config(load_ini(path)); }

/// Cloud for the configured set at spacing h, with the configured weight applied.
inline PointCloud build_cloud(const ExperimentConfig& c, double h) {
  const SetModel model = make_model(c.model, c.model_params);
  PointCloud k;
  try {
    k = generate(model, h);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (auto w = make_weight(c.weight)) k = with_weight(std::move(k), w);
  return k;
}

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ExperimentOutcome {
  std::string kind;
  std::string name;
  std::vector<Check> checks;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> solver_errors;
  ConvergenceReport report;
  Table table;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }
  /// 0 pass, 2 numerical check failed, 3 solver failure.
  int exit_code() const {
    if (!solver_errors.empty()) return 3;
    return passed() ? 0 : 2;
  }
};

namespace detail {

template <typename Writer>
void write_file(const std::filesystem::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(b), std::numeric_limits<double>::min());
  return std::abs(a - b) / scale;
}

inline std::string pass_text(bool ok) { return ok ? "1" : "0"; }

inline Direction config_direction(const ExperimentConfig& c, std::size_t d) {
  if (c.theta.empty()) {
    if (d == 1) return Direction{1.0};
    throw ConfigError("config: theta is required for this experiment");
  }
  if (c.theta.size() != d) throw ConfigError(fmt::format("config: theta has {} entries, the set has dimension {}", c.theta.size(), d));
  return Direction(c.theta);
}

inline std::vector<std::pair<int, MultiIndex>> direction_rows(const Direction& theta, int j_min, int j_max) {
  const auto seq = direction_sequence(theta, j_max);
  std::vector<std::pair<int, MultiIndex>> rows;
  for (int j = j_min; j <= j_max; ++j) rows.emplace_back(j, seq[static_cast<std::size_t>(j - 1)]);
  return rows;
}

inline double max_abs_z1(const PointCloud& k) {
  double m = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k.weights[i] > 0.0) m = std::max(m, std::abs(k.points(static_cast<Eigen::Index>(i), 0)));
  return m;
}

}  // namespace detail

/// Tau along a sequence of multi-indices, optionally repeated on a finer cloud.
inline ConvergenceReport run_tau_sweep(const PointCloud& k, const PointCloud* half, const std::vector<std::pair<int, MultiIndex>>& seq,
                                       int window, double conv_tol, double mesh_tol, const MinimaxOptions& opt = {}) {
  ConvergenceReport rep;
  rep.window = window;
  rep.conv_tol = conv_tol;
  rep.rows = parallel_map<SweepRow>(seq.size(), [&](std::size_t i) {
    SweepRow row;
    row.j = seq[i].first;
    row.alpha = seq[i].second;
    try {
      const auto res = chebyshev(k, row.alpha, opt);
      row.norm = res.norm;
      row.tau = res.tau;
      row.rel_gap = res.rel_gap;
      row.sides = res.sides;
      row.degenerate = res.degenerate;
      if (half) {
        row.tau_half_mesh = chebyshev(*half, row.alpha, opt).tau;
        row.mesh_flag = std::abs(row.tau - row.tau_half_mesh) > mesh_tol * std::max(row.tau, row.tau_half_mesh);
      }
    } catch (const SolverError& e) {
      row.failed = true;
      row.error = e.what();
    }
    return row;
  });
  finalize(rep);
  return rep;
}

namespace detail {

inline void collect_row_failures(const ConvergenceReport& rep, ExperimentOutcome& out) {
  for (const auto& r : rep.rows)
    if (r.failed) out.solver_errors.push_back(fmt::format("j={} alpha={}: {}", r.j, r.alpha.to_string(), r.error));
}

inline void emit_sweep(const ConvergenceReport& rep, const std::filesystem::path& dir, const std::string& name, ExperimentOutcome& out) {
  const auto csv = dir / (name + ".csv");
  write_file(csv, [&](std::ostream& os) { write_sweep_csv(os, rep); });
  out.files.push_back(csv);
  const auto solves = dir / (name + "_solves.csv");
  write_file(solves, [&](std::ostream& os) { write_solves_csv(os, rep); });
  out.files.push_back(solves);
  std::string svg;
  {
    std::ostringstream os;
    if (write_sweep_svg(os, rep, name)) svg = os.str();
  }
  if (!svg.empty()) {
    const auto path = dir / (name + ".svg");
    write_file(path, [&](std::ostream& os) { os << svg; });
    out.files.push_back(path);
  }
}

inline void emit_table(const Table& t, const std::filesystem::path& dir, const std::string& name, ExperimentOutcome& out) {
  const auto csv = dir / (name + ".csv");
  write_file(csv, [&](std::ostream& os) { write_table_csv(os, t); });
  out.files.push_back(csv);
}

inline void run_sweep_kind(const ExperimentConfig& c, ExperimentOutcome& out) {
  const PointCloud k = build_cloud(c, c.mesh);
  std::optional<PointCloud> half;
  if (c.half_mesh) half = build_cloud(c, c.mesh / 2);
  const auto seq = direction_rows(config_direction(c, k.dim()), c.j_min, c.j_max);
  out.report = run_tau_sweep(k, half ? &*half : nullptr, seq, c.window, c.conv_tol, c.mesh_tol, c.solver);
  collect_row_failures(out.report, out);
  const auto& rep = out.report;
  if (c.half_mesh) {
    int flagged = 0;
    for (const auto& r : rep.rows) flagged += r.mesh_flag ? 1 : 0;
    out.checks.push_back({"mesh-halving", flagged == 0, fmt::format("{} of {} rows change by more than {:g}", flagged, rep.rows.size(), c.mesh_tol)});
  }
  if (!c.expect.empty())
    out.checks.push_back({"verdict", rep.verdict == c.expect, fmt::format("verdict {} (expected {}), window gap {}", rep.verdict, c.expect, format_number(rep.gap))});
  if (c.expect_limit) {
    const double err = rel_err(rep.limsup, *c.expect_limit);
    out.checks.push_back({"limit", err <= c.limit_tol, fmt::format("window max {} vs {} (rel err {:.3g})", format_number(rep.limsup), *c.expect_limit, err)});
  }
}

inline void run_counterexample(const ExperimentConfig& c, ExperimentOutcome& out) {
  if (c.model != "zaharjuta") throw ConfigError("counterexample: [set] model must be zaharjuta");
  const PointCloud k = build_cloud(c, c.mesh);
  std::vector<std::pair<int, MultiIndex>> seq;
  for (int j = c.j_min; j <= c.j_max; ++j) seq.emplace_back(j, j % 2 == 0 ? MultiIndex{j, 0} : MultiIndex{j - 1, 1});
  std::optional<PointCloud> half;
  if (c.half_mesh) half = build_cloud(c, c.mesh / 2);
  out.report = run_tau_sweep(k, half ? &*half : nullptr, seq, c.window, c.conv_tol, c.mesh_tol, c.solver);
  collect_row_failures(out.report, out);
  const auto& rep = out.report;
  bool axis_ok = true, zero_ok = true;
  for (const auto& r : rep.rows) {
    if (r.failed) continue;
    if (r.alpha[1] == 0) axis_ok = axis_ok && std::abs(r.tau - 1.0) <= 1e-6;
    if (r.alpha[1] == 1) zero_ok = zero_ok && r.norm < 1e-10;
  }
  out.checks.push_back({"tau(n,0) = 1", axis_ok, "pure powers of z1"});
  out.checks.push_back({"tau(n,1) = 0", zero_ok, "z1^(n-1) z2 vanishes on the set"});
  out.checks.push_back({"not converged", rep.verdict == "not-converged" && rep.gap >= 0.9,
                        fmt::format("verdict {}, window gap {}", rep.verdict, format_number(rep.gap))});
}

inline void run_delta(const ExperimentConfig& c, ExperimentOutcome& out) {
  const PointCloud k = build_cloud(c, c.mesh);
  out.table.columns = {"n", "log_Vn", "l_n", "delta_estimate"};
  std::vector<std::string> failures;
  double last = std::numeric_limits<double>::quiet_NaN();
  for (int n = c.j_min; n <= c.j_max; ++n) {
    const auto l_n = enumerate_upto(n, k.dim()).l_n;
    if (c.method == "fekete") {
      const auto e = delta_fekete(k, n, c.exchange_rounds);
      out.table.rows.push_back({std::to_string(n), format_number(e.log_vn), std::to_string(l_n), format_number(e.delta)});
      last = e.delta;
    } else {
      const auto z = delta_zaharjuta(k, c.nodes, n, c.solver);
      if (!z.ok) failures.push_back(fmt::format("n={}: {}", n, z.failure));
      last = z.ok ? z.delta : std::numeric_limits<double>::quiet_NaN();
      out.table.rows.push_back({std::to_string(n), "nan", std::to_string(l_n), format_number(last)});
    }
  }
  std::string joined;
  for (const auto& f : failures) joined += (joined.empty() ? "" : "; ") + f;
  if (c.expect == "failure") {
    out.checks.push_back({"structured failure", failures.size() == static_cast<std::size_t>(c.j_max - c.j_min + 1), joined.empty() ? "no failure reported" : joined});
  } else {
    if (!failures.empty()) out.checks.push_back({"quadrature", false, joined});
    if (!c.expect.empty()) {
      const double target = parse_double(c.expect, "delta.expect");
      const double err = rel_err(last, target);
      out.checks.push_back({"delta", err <= c.rel_tol, fmt::format("estimate {} vs {} (rel err {:.3g}, tol {:g})", format_number(last), target, err, c.rel_tol)});
    }
  }
}

inline void run_verify_step1(const ExperimentConfig& c, ExperimentOutcome& out) {
  const double tol = c.check_tol > 0.0 ? c.check_tol : 2e-2;
  const PointCloud k = build_cloud(c, c.mesh);
  RobinModel robin;
  try {
    robin = robin_model(make_model(c.model, c.model_params));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const PointCloud k_rho = k_rho_cloud(robin, c.mesh);
  const auto seq = direction_rows(config_direction(c, k.dim()), c.j_min, c.j_max);
  out.table.columns = {"j", "alpha", "lhs", "rhs", "rel_err", "pass"};
  struct Pair {
    double lhs = 0, rhs = 0;
    std::string error;
  };
  const auto vals = parallel_map<Pair>(seq.size(), [&](std::size_t i) {
    Pair p;
    try {
      p.lhs = tau(k, seq[i].second, c.solver);
      p.rhs = tau(k_rho, seq[i].second, c.solver);
    } catch (const SolverError& e) {
      p.error = e.what();
    }
    return p;
  });
  bool all = true;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& [j, alpha] = seq[i];
    if (!vals[i].error.empty()) {
      out.solver_errors.push_back(fmt::format("j={}: {}", j, vals[i].error));
      out.table.rows.push_back({std::to_string(j), alpha.to_string(), "nan", "nan", "nan", "0"});
      all = false;
      continue;
    }
    const bool degenerate = vals[i].lhs == 0.0 || vals[i].rhs == 0.0;
    const double err = rel_err(vals[i].lhs, vals[i].rhs);
    const bool ok = !degenerate && err <= tol;
    all = all && ok;
    out.table.rows.push_back({std::to_string(j), alpha.to_string(), format_number(vals[i].lhs), format_number(vals[i].rhs), degenerate ? "nan" : format_number(err), detail::pass_text(ok)});
  }
  out.checks.push_back({"tau(K) = tau(K_rho)", all, fmt::format("{} rows, tol {:g}", seq.size(), tol)});
}

inline void run_verify_step2(const ExperimentConfig& c, ExperimentOutcome& out) {
  const double tol = c.check_tol > 0.0 ? c.check_tol : 5e-2;
  const PointCloud kw = build_cloud(c, c.mesh);
  const PointCloud cand = default_candidates(kw, c.candidates_per_axis, c.candidates_margin);
  const auto seq = direction_rows(config_direction(c, kw.dim()), c.j_min, c.j_max);
  out.table.columns = {"j", "alpha", "M", "z_points", "lhs", "rhs", "rel_err", "pass"};
  bool all = true;
  for (const auto& [j, alpha] : seq) {
    try {
      const ZSet z = z_set(kw, alpha.degree(), cand, c.z_tol, c.solver);
      const double lhs = tau(z.Z, alpha, c.solver);
      const double rhs = std::exp(z.M) * tau(kw, alpha, c.solver);
      const bool degenerate = lhs == 0.0 || rhs == 0.0;
      const double err = rel_err(lhs, rhs);
      const bool ok = !degenerate && err <= tol;
      all = all && ok;
      out.table.rows.push_back({std::to_string(j), alpha.to_string(), format_number(z.M), std::to_string(z.Z.size()), format_number(lhs), format_number(rhs),
                                degenerate ? "nan" : format_number(err), detail::pass_text(ok)});
    } catch (const SolverError& e) {
      out.solver_errors.push_back(fmt::format("j={}: {}", j, e.what()));
      out.table.rows.push_back({std::to_string(j), alpha.to_string(), "nan", "0", "nan", "nan", "nan", "0"});
      all = false;
    }
  }
  out.checks.push_back({"tau(Z) = e^M tau^w(K)", all, fmt::format("{} rows, tol {:g}", seq.size(), tol)});
}

inline double default_eta(const PointCloud& k, double eps) {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < k.points.rows(); ++i) {
    const double a = std::abs(k.points(i, 0));
    if (a > 0.0) m = std::min(m, a);
  }
  if (!std::isfinite(m)) throw ConfigError("slice: no point with z1 != 0");
  return std::exp(-eps) * m / 2.0;
}

inline void run_verify_step3(const ExperimentConfig& c, ExperimentOutcome& out) {
  const double tol = c.check_tol > 0.0 ? c.check_tol : 1e-10;
  const PointCloud k = build_cloud(c, c.mesh);
  if (k.dim() < 2) throw ConfigError("verify-step3-factorization needs dimension >= 2");
  const double eta = c.eta ? *c.eta : default_eta(k, c.eps);
  auto alphas = c.alphas;
  if (alphas.empty()) alphas = {MultiIndex{3, 2}, MultiIndex{5, 1}, MultiIndex{2, 6}};
  out.table.columns = {"alpha", "points", "max_rel_err", "norm_S", "norm_L_weighted", "pass"};
  bool all = true;
  for (const auto& alpha : alphas) {
    if (alpha.dim() != k.dim()) throw ConfigError("verify: alpha " + alpha.to_string() + " has the wrong dimension");
    const int tail = alpha.degree() - alpha[0];
    if (tail == 0) throw ConfigError("verify: alpha " + alpha.to_string() + " has alpha' = 0");
    const double tail_mass = static_cast<double>(tail) / alpha.degree();
    const auto sp = slice_and_project(k, eta, tail_mass);
    try {
      const auto res = chebyshev(sp.S, alpha, c.solver);
      const Polynomial r = dehomogenize(res.polynomial);
      const double scale = res.norm > 0.0 ? res.norm : 1.0;
      double worst = 0.0, norm_l = 0.0;
      for (Eigen::Index i = 0; i < sp.S.points.rows(); ++i) {
        const double lhs = std::abs(res.polynomial(sp.S.points.row(i)));
        const double rv = std::abs(r(sp.L.points.row(i)));
        const double rhs = std::pow(std::abs(sp.S.points(i, 0)), alpha.degree()) * rv;
        worst = std::max(worst, std::abs(lhs - rhs) / scale);
        norm_l = std::max(norm_l, std::pow(sp.L.weights[static_cast<std::size_t>(i)], tail) * rv);
      }
      const bool ok = worst <= tol && rel_err(norm_l, scale) <= std::max(tol, 10 * c.solver.tol);
      all = all && ok;
      out.table.rows.push_back({alpha.to_string(), std::to_string(sp.S.size()), format_number(worst), format_number(res.norm), format_number(norm_l), detail::pass_text(ok)});
    } catch (const SolverError& e) {
      out.solver_errors.push_back(fmt::format("alpha={}: {}", alpha.to_string(), e.what()));
      all = false;
    }
  }
  out.checks.push_back({"|t(z)| = |z1|^|alpha| |r(phi(z))|", all, fmt::format("eta {:g}, tol {:g} relative to the sup norm", eta, tol)});
}

inline void run_verify_tch(const ExperimentConfig& c, ExperimentOutcome& out) {
  const double slack = c.check_tol > 0.0 ? c.check_tol : 1e-9;
  const PointCloud k = build_cloud(c, c.mesh);
  if (k.dim() < 2) throw ConfigError("verify-tch needs dimension >= 2");
  const double eta = c.eta ? *c.eta : default_eta(k, c.eps);
  const PointCloud k_eps = scale(k, c.eps);
  const PointCloud s = slice_and_project(k, eta, 1.0).S;
  std::vector<MultiIndex> alphas;
  for (const auto& a : enumerate_upto(c.j_max, k.dim()).indices)
    if (a.degree() >= c.j_min) alphas.push_back(a);
  out.table.columns = {"alpha", "tau_K_eps", "tau_S", "tau_K", "pass"};
  struct Triple {
    double e = 0, s = 0, k = 0;
    std::string error;
  };
  const auto vals = parallel_map<Triple>(alphas.size(), [&](std::size_t i) {
    Triple t;
    try {
      t.e = tau(k_eps, alphas[i], c.solver);
      t.s = tau(s, alphas[i], c.solver);
      t.k = tau(k, alphas[i], c.solver);
    } catch (const SolverError& e) {
      t.error = e.what();
    }
    return t;
  });
  bool all = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!vals[i].error.empty()) {
      out.solver_errors.push_back(fmt::format("alpha={}: {}", alphas[i].to_string(), vals[i].error));
      all = false;
      continue;
    }
    const bool ok = vals[i].e <= vals[i].s * (1 + slack) && vals[i].s <= vals[i].k * (1 + slack);
    all = all && ok;
    out.table.rows.push_back({alphas[i].to_string(), format_number(vals[i].e), format_number(vals[i].s), format_number(vals[i].k), detail::pass_text(ok)});
  }
  out.checks.push_back({"tau(K_eps) <= tau(S) <= tau(K)", all, fmt::format("{} indices, eps {:g}, eta {:g}", alphas.size(), c.eps, eta)});
}

inline void run_verify_tch2(const ExperimentConfig& c, ExperimentOutcome& out) {
  const double tol = c.check_tol > 0.0 ? c.check_tol : 1e-8;
  std::mt19937_64 rng(c.seed);
  auto uni = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  struct Trial {
    SetModel model;
    double h = 0, eps = 0;
    MultiIndex alpha;
  };
  std::vector<Trial> trials;
  for (int t = 0; t < c.triples; ++t) {
    Trial tr;
    const int kind = pick(0, 3);
    if (kind == 0) {
      tr.model = Torus{{uni(0.5, 2.0), uni(0.5, 2.0)}};
      tr.h = 2 * std::numbers::pi / 32;
    } else if (kind == 1) {
      tr.model = ProductDiscs{{cplx(uni(-0.5, 0.5), uni(-0.5, 0.5)), cplx(uni(-0.5, 0.5), uni(-0.5, 0.5))}, {uni(0.5, 2.0), uni(0.5, 2.0)}};
      tr.h = 2 * std::numbers::pi / 24;
    } else if (kind == 2) {
      tr.model = Ellipsoid{uni(1.0, 3.0), uni(0.5, 2.0)};
      tr.h = 2 * std::numbers::pi / 24;
    } else {
      const double a = uni(-2.0, 0.0);
      tr.model = Interval{a, a + uni(0.5, 3.0)};
      tr.h = std::numbers::pi / 255;
    }
    tr.eps = uni(0.01, 1.0);
    const std::size_t d = kind == 3 ? 1 : 2;
    const int deg = pick(1, kind == 1 ? 8 : 12);
    if (d == 1) {
      tr.alpha = MultiIndex{deg};
    } else {
      const int first = pick(0, deg);
      tr.alpha = MultiIndex{first, deg - first};
    }
    trials.push_back(std::move(tr));
  }
  out.table.columns = {"trial", "model", "eps", "alpha", "tau_K", "tau_scaled", "rel_err", "pass"};
  struct Pair {
    double k = 0, s = 0;
    std::string error;
  };
  const auto vals = parallel_map<Pair>(trials.size(), [&](std::size_t i) {
    Pair p;
    try {
      const PointCloud k = generate(trials[i].model, trials[i].h);
      p.k = tau(k, trials[i].alpha, c.solver);
      p.s = tau(scale(k, trials[i].eps), trials[i].alpha, c.solver);
    } catch (const SolverError& e) {
      p.error = e.what();
    }
    return p;
  });
  bool all = true;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (!vals[i].error.empty()) {
      out.solver_errors.push_back(fmt::format("trial {}: {}", i, vals[i].error));
      all = false;
      continue;
    }
    const double err = std::abs(vals[i].s - std::exp(-trials[i].eps) * vals[i].k) / vals[i].k;
    const bool ok = err <= tol;
    all = all && ok;
    out.table.rows.push_back({std::to_string(i), detail::describe(trials[i].model), format_number(trials[i].eps), trials[i].alpha.to_string(),
                              format_number(vals[i].k), format_number(vals[i].s), format_number(err), detail::pass_text(ok)});
  }
  out.checks.push_back({"tau(K_eps) = e^-eps tau(K)", all, fmt::format("{} random triples, tol {:g}", trials.size(), tol)});
}

inline void run_lemma100_axis(const ExperimentConfig& c, ExperimentOutcome& out) {
  const PointCloud k = build_cloud(c, c.mesh);
  if (!k.circled) throw ConfigError("lemma100-axis: the set must be circled");
  const double ref = max_abs_z1(k);
  out.table.columns = {"n", "alpha", "tau", "max_abs_z1", "pass"};
  std::vector<MultiIndex> alphas;
  for (int n = c.j_min; n <= c.j_max; ++n) {
    std::vector<int> e(k.dim(), 0);
    e[0] = n;
    alphas.emplace_back(e);
  }
  const auto taus = parallel_map<double>(alphas.size(), [&](std::size_t i) { return tau(k, alphas[i], c.solver); });
  bool all = true;
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const bool ok = std::abs(taus[i] - ref) <= c.axis_tol;
    all = all && ok;
    out.table.rows.push_back({std::to_string(alphas[i].degree()), alphas[i].to_string(), format_number(taus[i]), format_number(ref), detail::pass_text(ok)});
  }
  out.checks.push_back({"tau(n,0) = max|z1|", all, fmt::format("n = {}..{}, tol {:g}", c.j_min, c.j_max, c.axis_tol)});
}

inline void run_lemma100_ellipsoid(const ExperimentConfig& c, ExperimentOutcome& out) {
  const PointCloud k = build_cloud(c, c.mesh);
  if (k.dim() != 2 || !k.circled) throw ConfigError("lemma100-ellipsoid: needs a circled set in dimension 2");
  const double ref = max_abs_z1(k);
  auto interior = c.interior;
  std::sort(interior.begin(), interior.end());
  std::vector<MultiIndex> inner;
  for (double t : interior) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("lemma100: interior theta_1 values must lie in (0,1)");
    inner.push_back(direction_sequence(Direction{t, 1.0 - t}, c.degree).back());
  }
  const MultiIndex axis{c.degree, 0};
  std::vector<MultiIndex> boundary;
  for (int j = std::max(2, c.j_min); j <= c.j_max; ++j) boundary.push_back(MultiIndex{j - 1, 1});

  std::vector<MultiIndex> jobs = inner;
  jobs.push_back(axis);
  jobs.insert(jobs.end(), boundary.begin(), boundary.end());
  const auto taus = parallel_map<double>(jobs.size(), [&](std::size_t i) { return tau(k, jobs[i], c.solver); });

  out.table.columns = {"item", "alpha", "tau", "reference", "pass"};
  bool increasing = true;
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (i > 0) increasing = increasing && taus[i] > taus[i - 1];
    out.table.rows.push_back({fmt::format("interior theta1={:g}", interior[i]), inner[i].to_string(), format_number(taus[i]), format_number(ref), ""});
  }
  const double tau_axis = taus[inner.size()];
  const bool axis_ok = std::abs(tau_axis - ref) <= c.axis_tol;
  out.table.rows.push_back({"axis", axis.to_string(), format_number(tau_axis), format_number(ref), detail::pass_text(axis_ok)});
  const bool near = !inner.empty() && taus[inner.size() - 1] > 0.9 * ref;
  out.checks.push_back({"interior increasing", increasing, "tau at increasing theta1 is strictly increasing"});
  out.checks.push_back({"approaches axis value", near, fmt::format("tau at theta1={:g} is {} vs 0.9*{}", interior.empty() ? 0.0 : interior.back(),
                                                                    inner.empty() ? "nan" : format_number(taus[inner.size() - 1]), format_number(ref))});
  out.checks.push_back({"axis value", axis_ok, fmt::format("tau{} = {} vs max|z1| = {}", axis.to_string(), format_number(tau_axis), format_number(ref))});

  if (!boundary.empty()) {
    const std::size_t first = inner.size() + 1;
    const std::size_t W = static_cast<std::size_t>(c.window);
    const std::size_t from = boundary.size() > W ? boundary.size() - W : 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t b = 0; b < boundary.size(); ++b) {
      out.table.rows.push_back({"boundary", boundary[b].to_string(), format_number(taus[first + b]), "", ""});
      if (b >= from) {
        lo = std::min(lo, taus[first + b]);
        hi = std::max(hi, taus[first + b]);
      }
    }
    const double min_inner = inner.empty() ? -std::numeric_limits<double>::infinity() : *std::min_element(taus.begin(), taus.begin() + static_cast<std::ptrdiff_t>(inner.size()));
    out.checks.push_back({"liminf bridge", lo >= min_inner - c.bridge_tol, fmt::format("window min {} vs interior min {}", format_number(lo), format_number(min_inner))});
    out.checks.push_back({"limsup bridge", hi <= tau_axis + c.bridge_tol, fmt::format("window max {} vs axis {}", format_number(hi), format_number(tau_axis))});
  }

  // Shear moves the z1-maximizer off the axis; constants must not change.
  Eigen::VectorXcd dprime(static_cast<Eigen::Index>(c.shear_d.size()));
  for (std::size_t i = 0; i < c.shear_d.size(); ++i) dprime(static_cast<Eigen::Index>(i)) = c.shear_d[i];
  if (dprime.size() != 1) throw ConfigError("lemma100: shear_d must have d-1 = 1 entries");
  PointCloud variant;
  try {
    variant = shear(k, c.shear_c, dprime);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  std::vector<MultiIndex> shear_jobs = inner;
  shear_jobs.push_back(axis);
  const auto sv = parallel_map<double>(shear_jobs.size(), [&](std::size_t i) { return tau(variant, shear_jobs[i], c.solver); });
  bool same = true;
  for (std::size_t i = 0; i < shear_jobs.size(); ++i) {
    const double err = rel_err(sv[i], taus[i]);
    const bool ok = err <= c.shear_tol;
    same = same && ok;
    out.table.rows.push_back({"shear", shear_jobs[i].to_string(), format_number(sv[i]), format_number(taus[i]), detail::pass_text(ok)});
  }
  out.checks.push_back({"shear invariance", same, fmt::format("{} indices, tol {:g}", shear_jobs.size(), c.shear_tol)});
}

inline void run_extremal(const ExperimentConfig& c, ExperimentOutcome& out) {
  const PointCloud k = build_cloud(c, c.mesh);
  const Eigen::MatrixXcd grid = parse_grid(c.grid, k.dim());
  if (c.n < 1) throw ConfigError("extremal: n must be >= 1");
  const auto g = extremal_numeric(k, c.n, grid, c.solver);
  for (std::size_t i = 0; i < k.dim(); ++i) {
    out.table.columns.push_back(fmt::format("re{}", i + 1));
    out.table.columns.push_back(fmt::format("im{}", i + 1));
  }
  out.table.columns.push_back("V_n");
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    std::vector<std::string> row;
    for (Eigen::Index i = 0; i < grid.cols(); ++i) {
      row.push_back(format_number(grid(r, i).real()));
      row.push_back(format_number(grid(r, i).imag()));
    }
    row.push_back(format_number(g.values[static_cast<std::size_t>(r)]));
    out.table.rows.push_back(std::move(row));
  }
}

}  // namespace detail

/// Runs one configured experiment and writes its artifacts into `out_dir`.
inline ExperimentOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  ExperimentOutcome out;
  out.kind = c.kind;
  out.name = c.name;
  const bool sweep_like = c.kind == "tau-sweep" || c.kind == "counterexample";
  if (c.kind == "tau-sweep")
    detail::run_sweep_kind(c, out);
  else if (c.kind == "counterexample")
    detail::run_counterexample(c, out);
  else if (c.kind == "delta")
    detail::run_delta(c, out);
  else if (c.kind == "verify-step1")
    detail::run_verify_step1(c, out);
  else if (c.kind == "verify-step2")
    detail::run_verify_step2(c, out);
  else if (c.kind == "verify-step3-factorization")
    detail::run_verify_step3(c, out);
  else if (c.kind == "verify-tch")
    detail::run_verify_tch(c, out);
  else if (c.kind == "verify-tch2")
    detail::run_verify_tch2(c, out);
  else if (c.kind == "lemma100-axis")
    detail::run_lemma100_axis(c, out);
  else if (c.kind == "lemma100-ellipsoid")
    detail::run_lemma100_ellipsoid(c, out);
  else if (c.kind == "extremal")
    detail::run_extremal(c, out);
  else
    throw ConfigError("unknown experiment kind '" + c.kind + "'");
  if (sweep_like)
    detail::emit_sweep(out.report, out_dir, c.name, out);
  else
    detail::emit_table(out.table, out_dir, c.name, out);
  return out;
}

}  // namespace chebdir
