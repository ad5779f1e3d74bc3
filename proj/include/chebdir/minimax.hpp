#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <map>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chebdir/detail/modulus_lp.hpp"
#include "chebdir/errors.hpp"
#include "chebdir/index_order.hpp"
#include "chebdir/sets.hpp"

namespace chebdir {

/// Complex polynomial over an explicit, strictly increasing monomial basis.
class Polynomial {
public:
  Polynomial() = default;
  Polynomial(std::vector<MultiIndex> basis, std::vector<cplx> coeffs) : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
    if (basis_.size() != coeffs_.size()) throw std::invalid_argument("Polynomial: basis/coefficient length mismatch");
    if (basis_.empty()) return;
    for (std::size_t i = 1; i < basis_.size(); ++i)
      if (!precedes(basis_[i - 1], basis_[i])) throw std::invalid_argument("Polynomial: basis must be strictly increasing");
  }

  std::size_t dim() const { return basis_.empty() ? 0 : basis_.front().dim(); }
  const std::vector<MultiIndex>& basis() const noexcept { return basis_; }
  const std::vector<cplx>& coeffs() const noexcept { return coeffs_; }
  bool is_zero() const {
    for (const auto& c : coeffs_)
      if (c != 0.0) return false;
    return true;
  }

  int degree() const {
    int deg = -1;
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (coeffs_[i] != 0.0) deg = std::max(deg, basis_[i].degree());
    return deg;
  }

  cplx coefficient(const MultiIndex& beta) const {
    for (std::size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i] == beta) return coeffs_[i];
    return 0.0;
  }

  template <typename Row>
  cplx operator()(const Row& z) const {
    cplx sum = 0.0;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (coeffs_[i] == 0.0) continue;
      cplx term = coeffs_[i];
      for (std::size_t k = 0; k < basis_[i].dim(); ++k)
        if (basis_[i][k] > 0) term *= std::pow(z(static_cast<Eigen::Index>(k)), basis_[i][k]);
      sum += term;
    }
    return sum;
  }

  Polynomial operator*(cplx s) const {
    Polynomial p = *this;
    for (auto& c : p.coeffs_) c *= s;
    return p;
  }

  std::string to_string() const {
    std::string s;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      if (coeffs_[i] == 0.0) continue;
      s += fmt::format("{}({:.6g}{:+.6g}i)z^{}", s.empty() ? "" : " + ", coeffs_[i].real(), coeffs_[i].imag(), basis_[i].to_string());
    }
    return s.empty() ? "0" : s;
  }

private:
  std::vector<MultiIndex> basis_;
  std::vector<cplx> coeffs_;
};

/// Top-degree part of p.
inline Polynomial leading_form(const Polynomial& p) {
  const int deg = p.degree();
  if (deg < 0) throw std::invalid_argument("leading_form: zero polynomial");
  std::vector<MultiIndex> basis;
  std::vector<cplx> coeffs;
  for (std::size_t i = 0; i < p.basis().size(); ++i)
    if (p.basis()[i].degree() == deg) {
      basis.push_back(p.basis()[i]);
      coeffs.push_back(p.coeffs()[i]);
    }
  return {std::move(basis), std::move(coeffs)};
}

/// Homogeneous p(z1, ..., zd) rewritten as r(t) with p(z) = z1^deg r(z2/z1, ..., zd/z1).
inline Polynomial dehomogenize(const Polynomial& p) {
  if (p.dim() < 2) throw std::invalid_argument("dehomogenize: needs dim >= 2");
  const int deg = p.degree();
  std::vector<std::pair<MultiIndex, cplx>> terms;
  for (std::size_t i = 0; i < p.basis().size(); ++i) {
    if (p.coeffs()[i] == 0.0) continue;
    if (p.basis()[i].degree() != deg) throw std::invalid_argument("dehomogenize: polynomial is not homogeneous");
    terms.emplace_back(p.basis()[i].tail(), p.coeffs()[i]);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& x, const auto& y) { return precedes(x.first, y.first); });
  std::vector<MultiIndex> basis;
  std::vector<cplx> coeffs;
  for (auto& [b, c] : terms) {
    basis.push_back(b);
    coeffs.push_back(c);
  }
  return {std::move(basis), std::move(coeffs)};
}

struct ChebyshevResult {
  double norm = 0.0;
  double tau = 0.0;
  Polynomial polynomial;
  double dual_lower_bound = 0.0;
  double rel_gap = 0.0;
  int sides = 0;
  // Set when the minimal weighted norm is numerically zero (pluripolar or
  // weight degeneracies); norm and tau are then reported as exact zeros.
  bool degenerate = false;
  std::vector<double> round_bounds;
};

struct MinimaxOptions {
  double tol = 1e-9;
  int initial_sides = 32;
  int max_refinements = 24;
};

inline constexpr double kZeroNormThreshold = 1e-12;

namespace detail {

inline cplx monomial(const Eigen::MatrixXcd& pts, Eigen::Index row, const MultiIndex& beta) {
  cplx v = 1.0;
  for (std::size_t k = 0; k < beta.dim(); ++k)
    if (beta[k] > 0) v *= std::pow(pts(row, static_cast<Eigen::Index>(k)), beta[k]);
  return v;
}

inline double weight_power(double w, int n) { return n == 0 ? 1.0 : std::pow(w, n); }

inline bool touches_zero_coord(const PointCloud& k, const MultiIndex& beta) {
  for (std::size_t c = 0; c < beta.dim(); ++c)
    if (beta[c] > 0 && k.coordinate_vanishes(c)) return true;
  return false;
}

// Per-coordinate affine frame w = (z - center) / scale with |w_k| <= 1 on the points.
struct Frame {
  Eigen::RowVectorXcd center;
  Eigen::RowVectorXd scale;
};

inline Frame normalizing_frame(const Eigen::MatrixXcd& pts, bool translate) {
  const auto d = pts.cols();
  Frame f{Eigen::RowVectorXcd::Zero(d), Eigen::RowVectorXd::Ones(d)};
  if (pts.rows() == 0) return f;
  for (Eigen::Index c = 0; c < d; ++c) {
    const auto col = pts.col(c);
    if (translate)
      f.center(c) = cplx((col.real().minCoeff() + col.real().maxCoeff()) / 2, (col.imag().minCoeff() + col.imag().maxCoeff()) / 2);
    const double s = (col.array() - f.center(c)).abs().maxCoeff();
    if (s > 0.0) f.scale(c) = s;
  }
  return f;
}

inline Eigen::MatrixXcd in_frame(const Eigen::MatrixXcd& pts, const Frame& f) {
  Eigen::MatrixXcd w = pts;
  for (Eigen::Index c = 0; c < w.cols(); ++c) w.col(c) = (w.col(c).array() - f.center(c)) / f.scale(c);
  return w;
}

// Coefficients of w^beta expanded in z, added into `acc` with factor `coef`.
inline void expand_frame_monomial(const MultiIndex& beta, cplx coef, const Frame& f, std::map<MultiIndex, cplx, MonomialOrderLess>& acc) {
  const std::size_t d = beta.dim();
  std::vector<std::vector<cplx>> factor(d);
  for (std::size_t k = 0; k < d; ++k) {
    const int b = beta[k];
    const cplx shift = -f.center(static_cast<Eigen::Index>(k));
    const double inv = 1.0 / f.scale(static_cast<Eigen::Index>(k));
    factor[k].assign(static_cast<std::size_t>(b) + 1, 0.0);
    double binom = 1.0;
    for (int g = 0; g <= b; ++g) {
      factor[k][static_cast<std::size_t>(g)] = binom * (b - g > 0 ? std::pow(shift, b - g) : cplx(1.0)) * std::pow(inv, b);
      binom = binom * (b - g) / (g + 1);
    }
  }
  std::vector<int> gamma(d, 0);
  for (;;) {
    cplx c = coef;
    for (std::size_t k = 0; k < d; ++k) c *= factor[k][static_cast<std::size_t>(gamma[k])];
    if (c != 0.0) acc[MultiIndex(gamma)] += c;
    std::size_t k = 0;
    while (k < d && gamma[k] == beta[k]) gamma[k++] = 0;
    if (k == d) break;
    ++gamma[k];
  }
}

// Solves min max_i |w_i^n (Q(z_i) + h(z_i))| over h in span(lower), where Q = sum target_coeffs z^target_basis
// is homogeneous of top degree. The LP runs in a normalized frame; span(lower) must be closed under the
// frame change (translation only when `translate`).
inline ChebyshevResult solve_weighted(const PointCloud& k, const std::vector<MultiIndex>& target_basis, const std::vector<cplx>& target_coeffs,
                                      const std::vector<MultiIndex>& lower, bool translate, int weight_exp, int root_degree,
                                      const MinimaxOptions& opt) {
  k.validate();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("minimax: tol must be > 0");
  std::vector<Eigen::Index> rows;
  std::vector<double> wpow;
  for (std::size_t i = 0; i < k.size(); ++i) {
    const double wp = weight_power(k.weights[i], weight_exp);
    if (wp > 0.0) {
      rows.push_back(static_cast<Eigen::Index>(i));
      wpow.push_back(wp);
    }
  }
  const Frame frame = normalizing_frame(k.points, translate);
  const Eigen::MatrixXcd wpts = in_frame(k.points, frame);
  std::vector<cplx> frame_coeffs(target_coeffs);
  for (std::size_t t = 0; t < target_basis.size(); ++t)
    for (std::size_t c = 0; c < target_basis[t].dim(); ++c)
      frame_coeffs[t] *= std::pow(frame.scale(static_cast<Eigen::Index>(c)), target_basis[t][c]);

  const auto N = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXcd a(N);
  Eigen::MatrixXcd B(N, static_cast<Eigen::Index>(lower.size()));
  for (Eigen::Index r = 0; r < N; ++r) {
    const auto row = rows[static_cast<std::size_t>(r)];
    const double wp = wpow[static_cast<std::size_t>(r)];
    cplx q = 0.0;
    for (std::size_t t = 0; t < target_basis.size(); ++t)
      if (!touches_zero_coord(k, target_basis[t])) q += frame_coeffs[t] * monomial(wpts, row, target_basis[t]);
    a(r) = wp * q;
    for (std::size_t j = 0; j < lower.size(); ++j)
      B(r, static_cast<Eigen::Index>(j)) = touches_zero_coord(k, lower[j]) ? cplx(0.0) : wp * monomial(wpts, row, lower[j]);
  }

  ModulusLpOptions lp_opt;
  lp_opt.tol = opt.tol;
  lp_opt.initial_sides = opt.initial_sides;
  lp_opt.max_refinements = opt.max_refinements;
  const ModulusLpResult lp = minimize_max_modulus(a, B, lp_opt);

  ChebyshevResult res;
  res.sides = lp.sides;
  res.round_bounds = lp.round_bounds;
  std::map<MultiIndex, cplx, MonomialOrderLess> acc;
  for (const auto& beta : lower) acc[beta] = 0.0;
  for (std::size_t j = 0; j < lower.size(); ++j) expand_frame_monomial(lower[j], lp.coeffs(static_cast<Eigen::Index>(j)), frame, acc);
  if (translate) {
    for (std::size_t t = 0; t < target_basis.size(); ++t) expand_frame_monomial(target_basis[t], frame_coeffs[t], frame, acc);
    for (std::size_t t = 0; t < target_basis.size(); ++t) acc[target_basis[t]] = target_coeffs[t];
  } else {
    for (std::size_t t = 0; t < target_basis.size(); ++t) acc[target_basis[t]] = target_coeffs[t];
  }
  std::vector<MultiIndex> basis;
  std::vector<cplx> coeffs;
  for (auto& [beta, c] : acc) {
    basis.push_back(beta);
    coeffs.push_back(c);
  }
  res.polynomial = Polynomial(std::move(basis), std::move(coeffs));
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  if (lp.norm <= kZeroNormThreshold * scale || scale == 0.0) {
    res.degenerate = true;
    res.norm = res.tau = res.dual_lower_bound = res.rel_gap = 0.0;
    return res;
  }
  if (!lp.converged)
    throw SolverError(fmt::format("minimax: gap {:.3g} above tol {:.3g} after {} polygon sides", lp.rel_gap, opt.tol, lp.sides));
  res.norm = lp.norm;
  res.dual_lower_bound = lp.lower_bound;
  res.rel_gap = lp.rel_gap;
  res.tau = std::pow(res.norm, 1.0 / root_degree);
  return res;
}

}  // namespace detail

/// Weighted Chebyshev problem inf { max_i w_i^{|alpha|} |p(z_i)| : p = z^alpha + sum_{beta < alpha} c_beta z^beta }.
inline ChebyshevResult solve_minimax(const PointCloud& k, const MultiIndex& alpha, bool homogeneous_only, const MinimaxOptions& opt = {}) {
  if (alpha.dim() != k.dim()) throw std::invalid_argument("solve_minimax: alpha dimension differs from the cloud's");
  if (alpha.degree() == 0) throw std::invalid_argument("solve_minimax: |alpha| = 0 is not allowed");
  const auto lower = basis_below(alpha, homogeneous_only);
  return detail::solve_weighted(k, {alpha}, {cplx(1.0)}, lower, !homogeneous_only, alpha.degree(), alpha.degree(), opt);
}

/// Chebyshev constant of the cloud; circled clouds use the homogeneous monic class.
inline ChebyshevResult chebyshev(const PointCloud& k, const MultiIndex& alpha, const MinimaxOptions& opt = {}) {
  return solve_minimax(k, alpha, k.circled, opt);
}

inline double tau(const PointCloud& k, const MultiIndex& alpha, const MinimaxOptions& opt = {}) { return chebyshev(k, alpha, opt).tau; }

/// min || w^n (Q + h) ||_K over h of degree <= n-1, for homogeneous Q of degree n.
inline ChebyshevResult tch_reduce(const PointCloud& k, const Polynomial& Q, bool weighted, const MinimaxOptions& opt = {}) {
  const int n = Q.degree();
  if (n < 1) throw std::invalid_argument("tch_reduce: Q must have degree >= 1");
  if (Q.dim() != k.dim()) throw std::invalid_argument("tch_reduce: dimension mismatch");
  std::vector<MultiIndex> top_basis;
  std::vector<cplx> top_coeffs;
  for (std::size_t i = 0; i < Q.basis().size(); ++i) {
    if (Q.coeffs()[i] == 0.0) continue;
    if (Q.basis()[i].degree() != n) throw std::invalid_argument("tch_reduce: Q must be homogeneous");
    top_basis.push_back(Q.basis()[i]);
    top_coeffs.push_back(Q.coeffs()[i]);
  }
  const auto lower = enumerate_upto(n - 1, k.dim()).indices;
  PointCloud kw = k;
  if (!weighted) kw.weights.assign(k.size(), 1.0);
  return detail::solve_weighted(kw, top_basis, top_coeffs, lower, true, n, n, opt);
}

}  // namespace chebdir
