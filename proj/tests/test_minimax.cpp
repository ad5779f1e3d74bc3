#include <gtest/gtest.h>

#include <numbers>

#include "chebdir/minimax.hpp"

using namespace chebdir;

namespace {

constexpr double kPi = std::numbers::pi;

PointCloud interval_cloud(double a, double b, int steps = 255) { return generate(Interval{a, b}, kPi / steps); }

}  // namespace

TEST(ModulusLp, RealMidpoint) {
  Eigen::VectorXcd a(3);
  a << 0.0, 1.0, 3.0;
  Eigen::MatrixXcd B = Eigen::MatrixXcd::Constant(3, 1, -1.0);
  const auto r = detail::minimize_max_modulus(a, B);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.norm, 1.5, 1e-8);
  EXPECT_NEAR(r.coeffs(0).real(), 1.5, 1e-6);
  EXPECT_LE(r.lower_bound, r.norm);
}

TEST(ModulusLp, ZeroRowsActAsFloor) {
  Eigen::VectorXcd a(3);
  a << 2.0, 1.0, cplx(0, 5.0);
  Eigen::MatrixXcd B(3, 1);
  B << 1.0, 1.0, 0.0;
  const auto r = detail::minimize_max_modulus(a, B);
  EXPECT_NEAR(r.norm, 5.0, 1e-12);
  EXPECT_TRUE(r.converged);
}

TEST(ModulusLp, RejectsBadShapes) {
  Eigen::VectorXcd a(2);
  a << 1.0, 2.0;
  EXPECT_THROW(detail::minimize_max_modulus(a, Eigen::MatrixXcd(3, 1)), std::invalid_argument);
  detail::ModulusLpOptions opt;
  opt.initial_sides = 2;
  EXPECT_THROW(detail::minimize_max_modulus(a, Eigen::MatrixXcd::Ones(2, 1), opt), std::invalid_argument);
}

TEST(Polynomial, EvaluateLeadingDehomogenize) {
  const Polynomial p({MultiIndex{1, 0}, MultiIndex{2, 0}, MultiIndex{1, 1}}, {cplx(3.0), cplx(1.0), cplx(2.0)});
  Eigen::RowVectorXcd z(2);
  z << cplx(2.0), cplx(0.0, 1.0);
  EXPECT_NEAR(std::abs(p(z) - (6.0 + 4.0 + cplx(0, 4.0))), 0.0, 1e-14);
  EXPECT_EQ(p.degree(), 2);
  const auto lead = leading_form(p);
  EXPECT_EQ(lead.basis().size(), 2u);
  const auto r = dehomogenize(lead);
  Eigen::RowVectorXcd t(1);
  t << z(1) / z(0);
  EXPECT_NEAR(std::abs(lead(z) - z(0) * z(0) * r(t)), 0.0, 1e-14);
  EXPECT_THROW(dehomogenize(p), std::invalid_argument);
  EXPECT_THROW(Polynomial({MultiIndex{0, 1}, MultiIndex{1, 0}}, {1.0, 1.0}), std::invalid_argument);
}

TEST(Chebyshev, IntervalMatchesMonicChebyshev) {
  const auto k = interval_cloud(-1.0, 1.0, 511);
  for (int n = 1; n <= 12; ++n) {
    const auto r = chebyshev(k, MultiIndex{n});
    EXPECT_NEAR(r.tau, std::pow(2.0, (1.0 - n) / n), 1e-4) << "n=" << n;
    EXPECT_LE(r.rel_gap, 1e-9);
    EXPECT_LE(r.dual_lower_bound, r.norm);
  }
}

TEST(Chebyshev, IntervalCoefficientsAreT4) {
  // 512 steps put every extremum of T_4 on the grid, so T_4 / 8 is also the discrete optimum.
  const auto r = chebyshev(interval_cloud(-1.0, 1.0, 512), MultiIndex{4});
  // Imaginary perturbations raise |p| only to second order, so they are loosely determined.
  const double expect[] = {0.125, 0.0, -1.0, 0.0, 1.0};
  for (int e = 0; e <= 4; ++e) {
    const cplx c = r.polynomial.coefficient(MultiIndex{e});
    EXPECT_NEAR(c.real(), expect[e], 1e-7) << e;
    EXPECT_NEAR(c.imag(), 0.0, 1e-4) << e;
  }
}

TEST(Chebyshev, CircleIsOne) {
  const auto k = generate(Torus{{1.0}}, 2 * kPi / 64);
  for (int n : {1, 5, 17, 30}) EXPECT_NEAR(tau(k, MultiIndex{n}), 1.0, 1e-9);
}

TEST(Chebyshev, TorusProductFormula) {
  const auto k = generate(Torus{{1.0, 2.0}}, 2 * kPi / 16);
  for (const auto& a : enumerate_upto(8, 2).indices) {
    if (a.degree() == 0) continue;
    const double expect = std::pow(2.0, static_cast<double>(a[1]) / a.degree());
    EXPECT_NEAR(tau(k, a), expect, 1e-9) << a;
  }
}

TEST(Chebyshev, TranslationInvariance) {
  const auto base = generate(ProductDiscs{{0.0, 0.0}, {1.0, 0.5}}, 2 * kPi / 12);
  const auto moved = generate(ProductDiscs{{cplx(0.3, -0.4), cplx(-1.0, 0.2)}, {1.0, 0.5}}, 2 * kPi / 12);
  auto plain = base;
  plain.circled = false;
  for (const auto& a : {MultiIndex{2, 1}, MultiIndex{0, 3}, MultiIndex{3, 0}})
    EXPECT_NEAR(tau(plain, a), tau(moved, a), 1e-8) << a;
}

TEST(Chebyshev, ScalingEquivariance) {
  const auto k = interval_cloud(-1.9, -0.8);
  for (int n : {4, 9, 12}) {
    const double t = tau(k, MultiIndex{n});
    EXPECT_NEAR(tau(scale(k, 0.3), MultiIndex{n}), std::exp(-0.3) * t, 1e-9 * t);
  }
}

TEST(Chebyshev, ConstantWeightScales) {
  auto k = generate(Torus{{1.0}}, 2 * kPi / 32);
  k.weights.assign(k.size(), 0.5);
  const auto r = chebyshev(k, MultiIndex{6});
  EXPECT_NEAR(r.tau, 0.5, 1e-9);
}

TEST(Chebyshev, PluripolarDegenerates) {
  const auto k = generate(ZaharjutaPluripolar{}, 2 * kPi / 32);
  const auto zero = chebyshev(k, MultiIndex{4, 1});
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.norm, 0.0);
  const auto one = chebyshev(k, MultiIndex{5, 0});
  EXPECT_FALSE(one.degenerate);
  EXPECT_NEAR(one.tau, 1.0, 1e-9);
}

TEST(Chebyshev, RejectsBadInput) {
  const auto k = generate(Torus{{1.0, 2.0}}, 2 * kPi / 8);
  EXPECT_THROW(chebyshev(k, MultiIndex{1}), std::invalid_argument);
  EXPECT_THROW(chebyshev(k, MultiIndex{0, 0}), std::invalid_argument);
  MinimaxOptions opt;
  opt.tol = 0.0;
  EXPECT_THROW(chebyshev(k, MultiIndex{1, 1}, opt), std::invalid_argument);
}

TEST(Chebyshev, TooFewRefinementsIsSolverError) {
  const auto k = generate(ProductDiscs{{cplx(0.3)}, {1.0}}, 2 * kPi / 64);
  MinimaxOptions opt;
  opt.initial_sides = 4;
  opt.max_refinements = 0;
  opt.tol = 1e-12;
  EXPECT_THROW(chebyshev(k, MultiIndex{5}, opt), SolverError);
}

TEST(TchReduce, MonomialOnCircle) {
  const auto k = generate(Torus{{1.0}}, 2 * kPi / 32);
  const Polynomial q({MultiIndex{3}}, {cplx(2.0)});
  EXPECT_NEAR(tch_reduce(k, q, false).norm, 2.0, 1e-8);
  EXPECT_THROW(tch_reduce(k, Polynomial({MultiIndex{1}, MultiIndex{2}}, {1.0, 1.0}), false), std::invalid_argument);
}
