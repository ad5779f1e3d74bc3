#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <fmt/format.h>

#include "chebdir/detail/modulus_lp.hpp"
#include "chebdir/errors.hpp"
#include "chebdir/fekete.hpp"
#include "chebdir/index_order.hpp"
#include "chebdir/minimax.hpp"
#include "chebdir/parallel.hpp"
#include "chebdir/sets.hpp"

namespace chebdir {

/// Closed-form Robin function max_i (log|z_i| - log r_i) of a polydisc-type set.
struct RobinModel {
  std::string kind;
  std::vector<double> radii;
};

inline RobinModel robin_model(const SetModel& model) {
  if (const auto* p = std::get_if<ProductDiscs>(&model)) return {"product_discs", p->radii};
  if (const auto* t = std::get_if<Torus>(&model)) return {"torus", t->radii};
  throw std::invalid_argument("robin_model: " + detail::describe(model) + " has no closed-form Robin function");
}

inline double robin_eval(const RobinModel& model, const Eigen::RowVectorXcd& z) {
  if (static_cast<std::size_t>(z.size()) != model.radii.size()) throw std::invalid_argument("robin_eval: dimension mismatch");
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double m = std::abs(z(i));
    if (m > 0.0) best = std::max(best, std::log(m) - std::log(model.radii[static_cast<std::size_t>(i)]));
  }
  if (!std::isfinite(best)) throw std::invalid_argument("robin_eval: z must be nonzero");
  return best;
}

/// Shilov boundary of {robin <= 0}: the centered torus with the model's radii.
inline PointCloud k_rho_cloud(const RobinModel& model, double h, const GenerateOptions& opt = {}) {
  PointCloud k = generate(Torus{model.radii}, h, opt);
  k.generator = "K_rho(" + model.kind + ")";
  return k;
}

struct ExtremalGrid {
  Eigen::MatrixXcd points;
  std::vector<double> values;  // V^{(n)}; +inf where every normalized polynomial vanishes on K
  int n = 0;
  bool weighted = false;
};

/// V^{(n)}(zeta) = sup { (1/n) log|p(zeta)| : deg p <= n, max_i w_i^n |p(z_i)| <= 1 }.
/// With p(zeta) = 1 fixed, this is -(1/n) log of a min-max-modulus problem.
inline ExtremalGrid extremal_numeric(const PointCloud& k, int n, const Eigen::MatrixXcd& eval_points, const MinimaxOptions& opt = {}) {
  k.validate();
  if (n < 1) throw std::invalid_argument("extremal_numeric: n must be >= 1");
  if (static_cast<std::size_t>(eval_points.cols()) != k.dim()) throw std::invalid_argument("extremal_numeric: eval point dimension mismatch");
  auto basis = enumerate_upto(n, k.dim()).indices;
  basis.erase(basis.begin());

  std::vector<Eigen::Index> rows;
  std::vector<double> wpow;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double wp = detail::weight_power(k.weights[i], n);
    if (wp > 0.0) {
      rows.push_back(static_cast<Eigen::Index>(i));
      wpow.push_back(wp);
    }
  }
  if (rows.empty()) throw std::invalid_argument("extremal_numeric: all weights vanish");
  const auto N = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd pts(N, static_cast<Eigen::Index>(k.dim()));
  Eigen::VectorXd wp(N);
  for (Eigen::Index r = 0; r < N; ++r) {
    pts.row(r) = k.points.row(rows[static_cast<std::size_t>(r)]);
    wp(r) = wpow[static_cast<std::size_t>(r)];
  }
  const auto frame = detail::normalizing_frame(pts, true);
  const Eigen::MatrixXcd mono = detail::monomial_matrix(detail::in_frame(pts, frame), basis);
  const Eigen::MatrixXcd at_zeta = detail::monomial_matrix(detail::in_frame(eval_points, frame), basis);

  detail::ModulusLpOptions lp_opt;
  lp_opt.tol = opt.tol;
  lp_opt.initial_sides = opt.initial_sides;
  lp_opt.max_refinements = opt.max_refinements;

  ExtremalGrid out;
  out.points = eval_points;
  out.n = n;
  out.weighted = k.weighted();
  out.values = parallel_map<double>(static_cast<std::size_t>(eval_points.rows()), [&](std::size_t e) {
    const auto row = static_cast<Eigen::Index>(e);
    const Eigen::VectorXcd a = wp.cast<cplx>();
    Eigen::MatrixXcd B = mono;
    B.rowwise() -= at_zeta.row(row);
    B = wp.asDiagonal() * B;
    const auto lp = detail::minimize_max_modulus(a, B, lp_opt);
    if (lp.norm < kZeroNormThreshold) return std::numeric_limits<double>::infinity();
    if (!lp.converged)
      throw SolverError(fmt::format("extremal_numeric: gap {:.3g} above tol at evaluation point {}", lp.rel_gap, e));
    return -std::log(lp.norm) / n;
  });
  return out;
}

struct ZSet {
  PointCloud Z;
  double M = 0.0;
  std::vector<double> values_on_k;
  std::vector<double> values_on_candidates;
};

/// Square grid around the bounding box of K, `per_axis` samples per real axis,
/// half-width `margin` times the largest half-extent of any coordinate.
inline PointCloud default_candidates(const PointCloud& k, int per_axis = 41, double margin = 1.5) {
  if (per_axis < 2) throw std::invalid_argument("default_candidates: per_axis must be >= 2");
  const auto d = static_cast<Eigen::Index>(k.dim());
  std::vector<std::vector<cplx>> factors;
  double spacing = 0.0;
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = k.points.col(c);
    const double re_lo = col.real().minCoeff(), re_hi = col.real().maxCoeff();
    const double im_lo = col.imag().minCoeff(), im_hi = col.imag().maxCoeff();
    const cplx center{(re_lo + re_hi) / 2, (im_lo + im_hi) / 2};
    double half = margin * std::max({(re_hi - re_lo) / 2, (im_hi - im_lo) / 2});
    if (half <= 0.0) half = margin;
    spacing = std::max(spacing, 2 * half / (per_axis - 1));
    std::vector<cplx> f;
    for (int i = 0; i < per_axis; ++i)
      for (int j = 0; j < per_axis; ++j)
        f.push_back(center + cplx(-half + 2 * half * i / (per_axis - 1), -half + 2 * half * j / (per_axis - 1)));
    factors.push_back(std::move(f));
  }
  return make_cloud(detail::product_grid(factors), spacing, false, "candidates(" + k.generator + ")");
}

/// M = max of V^{(n)} over the cloud of K; Z = K's points plus the candidates with V^{(n)} <= M + tol.
inline ZSet z_set(const PointCloud& k, int n, const PointCloud& candidates, double tol = 1e-6, const MinimaxOptions& opt = {}) {
  if (candidates.dim() != k.dim()) throw std::invalid_argument("z_set: candidate dimension mismatch");
  ZSet out;
  out.values_on_k = extremal_numeric(k, n, k.points, opt).values;
  out.M = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k.size(); ++i)
    if (k.weights[i] > 0.0) out.M = std::max(out.M, out.values_on_k[i]);
  out.values_on_candidates = extremal_numeric(k, n, candidates.points, opt).values;

  std::vector<Eigen::Index> keep;
  for (std::size_t i = 0; i < candidates.size(); ++i)
    if (out.values_on_candidates[i] <= out.M + tol) keep.push_back(static_cast<Eigen::Index>(i));
  Eigen::MatrixXcd pts(static_cast<Eigen::Index>(k.size() + keep.size()), static_cast<Eigen::Index>(k.dim()));
  pts.topRows(static_cast<Eigen::Index>(k.size())) = k.points;
  for (std::size_t i = 0; i < keep.size(); ++i) pts.row(static_cast<Eigen::Index>(k.size() + i)) = candidates.points.row(keep[i]);
  out.Z = make_cloud(std::move(pts), candidates.mesh, false, "Z(" + k.generator + ")");
  return out;
}

}  // namespace chebdir
