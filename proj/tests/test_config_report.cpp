#include <gtest/gtest.h>

#include <sstream>

#include "chebdir/config.hpp"
#include "chebdir/report.hpp"

using namespace chebdir;

namespace {

ConfigSections ini(const std::string& text) {
  std::istringstream is(text);
  return read_ini(is);
}

SweepRow row(int j, double tau, bool degenerate = false) {
  SweepRow r;
  r.j = j;
  r.alpha = MultiIndex{j, 0};
  r.tau = tau;
  r.norm = std::pow(tau, j);
  r.rel_gap = 0.0;
  r.degenerate = degenerate;
  return r;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Ini, SectionsAndComments) {
  const auto s = ini("; note\n[set]\nmodel = torus\nradii = 1:2\n\n[sweep]\nj_max=24\n");
  EXPECT_EQ(s.at("set").at("model"), "torus");
  EXPECT_EQ(s.at("set").at("radii"), "1:2");
  EXPECT_EQ(s.at("sweep").at("j_max"), "24");
  EXPECT_THROW(ini("model = torus\n"), ConfigError);
  EXPECT_THROW(ini("[set\nmodel=torus\n"), ConfigError);
}

TEST(Parse, Scalars) {
  EXPECT_DOUBLE_EQ(parse_double(" 2.5e-3 ", "x"), 2.5e-3);
  EXPECT_THROW(parse_double("2.5x", "x"), ConfigError);
  EXPECT_THROW(parse_double("", "x"), ConfigError);
  EXPECT_EQ(parse_int("42", "n"), 42);
  EXPECT_THROW(parse_int("4.2", "n"), ConfigError);
  EXPECT_TRUE(parse_bool("yes", "b"));
  EXPECT_FALSE(parse_bool("0", "b"));
  EXPECT_THROW(parse_bool("maybe", "b"), ConfigError);
}

TEST(Parse, Complex) {
  EXPECT_EQ(parse_complex("0.3"), cplx(0.3, 0.0));
  EXPECT_EQ(parse_complex("-0.2i"), cplx(0.0, -0.2));
  EXPECT_EQ(parse_complex("1+2i"), cplx(1.0, 2.0));
  EXPECT_EQ(parse_complex("1-i"), cplx(1.0, -1.0));
  EXPECT_EQ(parse_complex("i"), cplx(0.0, 1.0));
  EXPECT_EQ(parse_complex("1e-3-2e-2i"), cplx(1e-3, -2e-2));
  EXPECT_EQ(parse_complex("1+2j"), cplx(1.0, 2.0));
  EXPECT_THROW(parse_complex("1+2k"), ConfigError);
  EXPECT_EQ(parse_complexes("0.3:0.2i", "c").size(), 2u);
}

TEST(Parse, MultiIndicesAndParams) {
  EXPECT_EQ(parse_multiindex("(3,2)"), (MultiIndex{3, 2}));
  EXPECT_EQ(parse_multiindex("5:1"), (MultiIndex{5, 1}));
  EXPECT_THROW(parse_multiindex("(3,-2)"), ConfigError);
  const auto list = parse_multiindex_list("(3,2);(5,1);(2,6)");
  ASSERT_EQ(list.size(), 3u);
  EXPECT_EQ(list[2], (MultiIndex{2, 6}));
  const auto p = parse_params("radii=1:2, centers=0.3:0.2");
  EXPECT_EQ(p.at("radii"), "1:2");
  EXPECT_EQ(p.at("centers"), "0.3:0.2");
  EXPECT_THROW(parse_params("radii"), ConfigError);
}

TEST(Models, BuildAndReject) {
  EXPECT_TRUE(std::holds_alternative<Torus>(make_model("torus", {{"radii", "1:2"}})));
  const auto d = make_model("product_discs", {{"radii", "1:2"}, {"centers", "0.3:0.2"}});
  ASSERT_TRUE(std::holds_alternative<ProductDiscs>(d));
  EXPECT_EQ(std::get<ProductDiscs>(d).centers[0], cplx(0.3));
  EXPECT_TRUE(std::holds_alternative<Interval>(make_model("interval", {})));
  EXPECT_THROW(make_model("torus", {}), ConfigError);
  EXPECT_THROW(make_model("torus", {{"radii", "1"}, {"radius", "2"}}), ConfigError);
  EXPECT_THROW(make_model("sphere", {}), ConfigError);
}

TEST(Weights, Kinds) {
  EXPECT_FALSE(make_weight("none"));
  Eigen::RowVectorXcd z(1);
  z << cplx(1.0, 1.0);
  EXPECT_DOUBLE_EQ(make_weight("const:0.5")(z), 0.5);
  EXPECT_NEAR(make_weight("gauss:1")(z), std::exp(-2.0), 1e-15);
  EXPECT_THROW(make_weight("const:-1"), ConfigError);
  EXPECT_THROW(make_weight("cauchy:1"), ConfigError);
}

TEST(Grids, BoxAndPoints) {
  const auto g1 = parse_grid("box:-1:1:3", 1);
  EXPECT_EQ(g1.rows(), 9);
  const auto g2 = parse_grid("box:0:1:2", 2);
  EXPECT_EQ(g2.rows(), 4);
  EXPECT_EQ(g2.cols(), 2);
  const auto p = parse_grid("points:2;1|0.5;6i", 2);
  EXPECT_EQ(p(1, 1), cplx(0.0, 6.0));
  EXPECT_THROW(parse_grid("points:2", 2), ConfigError);
  EXPECT_THROW(parse_grid("disc:1", 1), ConfigError);
}

TEST(Report, WindowStatisticsAndVerdicts) {
  ConvergenceReport rep;
  rep.window = 3;
  rep.conv_tol = 1e-2;
  for (int j = 1; j <= 6; ++j) rep.rows.push_back(row(j, j % 2 ? 0.5 : 1.0));
  finalize(rep);
  EXPECT_EQ(rep.rows[3].window_max, 1.0);
  EXPECT_EQ(rep.rows[3].window_min, 0.5);
  EXPECT_EQ(rep.rows[0].window_max, 0.5);
  EXPECT_DOUBLE_EQ(rep.gap, 0.5);
  EXPECT_EQ(rep.verdict, "not-converged");

  ConvergenceReport flat;
  for (int j = 1; j <= 10; ++j) flat.rows.push_back(row(j, 2.0 + (j > 2 ? 0.0 : 1.0)));
  finalize(flat);
  EXPECT_EQ(flat.verdict, "converged");
  EXPECT_EQ(flat.gap, 0.0);

  ConvergenceReport zero;
  for (int j = 1; j <= 4; ++j) zero.rows.push_back(row(j, 0.0, true));
  finalize(zero);
  EXPECT_EQ(zero.verdict, "degenerate");
}

TEST(Report, FailedRowsAreSkipped) {
  ConvergenceReport rep;
  rep.rows = {row(1, 1.0), row(2, 1.0)};
  rep.rows[1].failed = true;
  rep.rows[1].tau = std::numeric_limits<double>::quiet_NaN();
  finalize(rep);
  EXPECT_EQ(rep.rows[1].window_max, 1.0);
  std::ostringstream os;
  write_sweep_csv(os, rep);
  EXPECT_NE(os.str().find("2;(2,0);nan;"), std::string::npos);
}

TEST(Report, EmptyAndSingleRow) {
  ConvergenceReport rep;
  finalize(rep);
  std::ostringstream csv, svg;
  write_sweep_csv(csv, rep);
  EXPECT_EQ(csv.str(), "j;alpha;tau;rel_gap;tau_half_mesh;window_max;window_min\n");
  EXPECT_FALSE(write_sweep_svg(svg, rep));
  EXPECT_TRUE(svg.str().empty());

  rep.rows.push_back(row(1, 1.0));
  finalize(rep);
  std::ostringstream one;
  write_sweep_csv(one, rep);
  EXPECT_EQ(count(one.str(), "\n"), 2u);
}

TEST(Report, SvgHasOnePolylineAndTwoBands) {
  ConvergenceReport rep;
  for (int j = 1; j <= 24; ++j) rep.rows.push_back(row(j, 1.0 + 0.1 / j));
  finalize(rep);
  std::ostringstream svg;
  ASSERT_TRUE(write_sweep_svg(svg, rep));
  EXPECT_EQ(count(svg.str(), "<polyline"), 1u);
  EXPECT_EQ(count(svg.str(), "class=\"window-max\""), 1u);
  EXPECT_EQ(count(svg.str(), "class=\"window-min\""), 1u);
}

TEST(Report, NumberFormat) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(std::sqrt(2.0)), "1.4142135623731");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
}
