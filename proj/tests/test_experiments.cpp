#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chebdir/experiments.hpp"

using namespace chebdir;
namespace fs = std::filesystem;

namespace {

ExperimentConfig cfg(const std::string& text) {
  std::istringstream is(text);
  return parse_config(read_ini(is));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("chebdir_test_" + name);
  fs::remove_all(dir);
  return dir;
}

const char* kSweep = R"(
[experiment]
kind = tau-sweep
name = small

[set]
model = torus
radii = 1:2
resolution = 16

[sweep]
theta = 1:0
j_min = 1
j_max = 10
expect = converged
expect_limit = 1
)";

}  // namespace

TEST(ConfigParse, Defaults) {
  const auto c = cfg(kSweep);
  EXPECT_EQ(c.kind, "tau-sweep");
  EXPECT_EQ(c.model, "torus");
  EXPECT_EQ(c.model_params.at("radii"), "1:2");
  EXPECT_NEAR(c.mesh, 2 * std::numbers::pi / 16, 1e-15);
  EXPECT_EQ(c.window, 8);
  EXPECT_EQ(c.j_max, 10);
}

TEST(ConfigParse, Errors) {
  EXPECT_THROW(cfg("[experiment]\nkind = nope\n[set]\nmodel=torus\nradii=1\n"), ConfigError);
  EXPECT_THROW(cfg("[experiment]\nkind = tau-sweep\n"), ConfigError);
  EXPECT_THROW(cfg(std::string(kSweep) + "typo = 1\n"), ConfigError);
  EXPECT_THROW(cfg(std::string(kSweep) + "[bogus]\nx=1\n"), ConfigError);
  EXPECT_THROW(cfg(std::string(kSweep) + "[solver]\ntol = 0\n"), ConfigError);
  EXPECT_THROW(cfg("[experiment]\nkind=tau-sweep\n[set]\nmodel=torus\nradii=1:2\n[sweep]\nj_min=0\n"), ConfigError);
  EXPECT_THROW(cfg("[experiment]\nkind=tau-sweep\n[set]\nmodel=torus\nradii=1:2\n[sweep]\ntheta=0.7:0.7\n"), ConfigError);
  EXPECT_THROW(cfg("[experiment]\nkind=tau-sweep\n[set]\nmodel=torus\nradii=1:2\nmesh=0.1\nresolution=8\n"), ConfigError);
  EXPECT_THROW(cfg("[experiment]\nkind=tau-sweep\n[set]\nmodel=torus\nradii=1:2\nweight=bad\n"), ConfigError);
}

TEST(Run, SweepWritesArtifactsAndPasses) {
  const auto dir = scratch_dir("sweep");
  const auto out = run_experiment(cfg(kSweep), dir);
  EXPECT_EQ(out.exit_code(), 0);
  EXPECT_EQ(out.report.rows.size(), 10u);
  EXPECT_TRUE(fs::exists(dir / "small.csv"));
  EXPECT_TRUE(fs::exists(dir / "small_solves.csv"));
  EXPECT_TRUE(fs::exists(dir / "small.svg"));
  const auto text = slurp(dir / "small.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "j;alpha;tau;rel_gap;tau_half_mesh;window_max;window_min");
  EXPECT_EQ(slurp(dir / "small_solves.csv").substr(0, 31), "alpha;norm;tau;rel_gap;m_final\n");
}

TEST(Run, SweepIsDeterministic) {
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  run_experiment(cfg(kSweep), a);
  run_experiment(cfg(kSweep), b);
  for (const char* f : {"small.csv", "small_solves.csv", "small.svg"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Run, FailedExpectationGivesExitTwo) {
  auto c = cfg(kSweep);
  c.expect_limit = 3.0;
  const auto out = run_experiment(c, scratch_dir("fail"));
  EXPECT_EQ(out.exit_code(), 2);
}

TEST(Run, SolverFailureGivesExitThree) {
  auto c = cfg(kSweep);
  c.model = "product_discs";
  c.model_params = {{"radii", "1"}, {"centers", "0.3"}};
  c.theta.clear();
  c.half_mesh = false;
  c.expect.clear();
  c.expect_limit.reset();
  c.j_min = 6;
  c.j_max = 7;
  c.solver.initial_sides = 4;
  c.solver.max_refinements = 0;
  c.solver.tol = 1e-12;
  const auto out = run_experiment(c, scratch_dir("solver"));
  EXPECT_EQ(out.exit_code(), 3);
  EXPECT_EQ(out.solver_errors.size(), 2u);
}

TEST(Run, CounterexampleOscillates) {
  const auto c = cfg("[experiment]\nkind=counterexample\n[set]\nmodel=zaharjuta\nresolution=16\n[sweep]\nj_max=12\n");
  const auto out = run_experiment(c, scratch_dir("ce"));
  EXPECT_EQ(out.exit_code(), 0);
  EXPECT_EQ(out.report.verdict, "not-converged");
  EXPECT_GE(out.report.gap, 0.9);
}

TEST(Run, DeltaTable) {
  const auto dir = scratch_dir("delta");
  const auto c = cfg("[experiment]\nkind=delta\nname=d\n[set]\nmodel=torus\nradii=1\nresolution=32\n[delta]\nn_min=3\nn_max=5\n");
  const auto out = run_experiment(c, dir);
  EXPECT_EQ(out.table.rows.size(), 3u);
  const auto text = slurp(dir / "d.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "n;log_Vn;l_n;delta_estimate");
}

TEST(Run, ExtremalCsv) {
  const auto dir = scratch_dir("ext");
  const auto c = cfg("[experiment]\nkind=extremal\nname=e\n[set]\nmodel=torus\nradii=1:2\nresolution=16\n[extremal]\nn=2\ngrid=points:2;1|1;4\n");
  run_experiment(c, dir);
  const auto text = slurp(dir / "e.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "re1;im1;re2;im2;V_n");
}

#ifdef CHEBDIR_CLI
namespace {
int cli(const std::string& args) {
  const int rc = std::system((std::string(CHEBDIR_CLI) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
}  // namespace

TEST(Cli, ExitCodes) {
  const auto dir = scratch_dir("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "bad.ini") << "[experiment]\nkind = tau-sweep\n[set]\nmodel = sphere\n";
    std::ofstream(dir / "good.ini") << kSweep;
  }
  EXPECT_EQ(cli("sweep --config " + (dir / "bad.ini").string() + " --out-dir " + dir.string()), 4);
  EXPECT_EQ(cli("sweep --config " + (dir / "good.ini").string() + " --out-dir " + dir.string()), 0);
  EXPECT_EQ(cli("sweep --config " + (dir / "good.ini").string() + " --out-dir " + dir.string() + " --params radii=2:1"), 2);
  EXPECT_EQ(cli("verify --config " + (dir / "good.ini").string() + " --out-dir " + dir.string()), 4);
  EXPECT_EQ(cli("gen --model torus --params radii=1:2 --mesh 0.8 --out " + (dir / "k.txt").string()), 0);
  EXPECT_EQ(load_cloud((dir / "k.txt").string()).size(), 64u);
  EXPECT_EQ(cli("delta --model torus --params radii=1 --n 3 --out-dir " + dir.string()), 0);
  EXPECT_EQ(cli("frobnicate"), 4);
}
#endif
