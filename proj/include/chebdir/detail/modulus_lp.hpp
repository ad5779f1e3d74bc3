#pragma once

// Minimize max_i |a_i + (B c)_i| over complex c.
//
// Each modulus constraint |v| <= t is relaxed to the circumscribed regular
// m-gon { Re(e^{-i phi_k} v) <= t, phi_k = 2 pi k / m }. The resulting LP
//
//   min t   s.t.  Re(e^{-i phi} (a_i + B_i c)) <= t   for all (i, k)
//
// is solved through its dual
//
//   max sum_k lambda_k Re(e^{-i phi_k} a_{i_k})
//   s.t. sum_k lambda_k e^{-i phi_k} B_{i_k} = 0,  sum_k lambda_k = 1,  lambda >= 0
//
// by a revised primal simplex with column generation: the simplex multipliers
// are the primal coefficients, and pricing picks for each point the polygon
// side closest to arg v_i. Any dual-feasible lambda gives a certified lower
// bound on the true (circular) problem, the achieved max |v_i| is an upper
// bound, and the polygon error is at most 1 - cos(pi/m). The side count is
// doubled whenever the LP is optimal but the gap is still above tolerance.
//
// Before the LP, B is column-scaled and reduced to an orthonormal basis of its
// range (rank-revealing QR) and a is replaced by its least-squares residual.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <vector>

#include <fmt/format.h>

#include "chebdir/errors.hpp"

namespace chebdir::detail {

struct ModulusLpOptions {
  double tol = 1e-9;
  int initial_sides = 32;
  int max_refinements = 24;
  std::size_t max_iterations = 0;  // 0 selects a size-dependent cap
  double rank_tol = 1e-13;
  int refactor_every = 200;
};

struct ModulusLpResult {
  Eigen::VectorXcd coeffs;
  double norm = 0.0;
  double lower_bound = 0.0;
  double rel_gap = 0.0;
  int sides = 0;
  bool converged = false;
  std::size_t iterations = 0;
  std::size_t rank = 0;
  // Lower bound at the end of each polygon round.
  std::vector<double> round_bounds;
};

class ColumnGenerationLp {
public:
  // q: N x r with orthonormal columns; target: length N, max modulus 1.
  ColumnGenerationLp(const Eigen::MatrixXcd& q, const Eigen::VectorXcd& target, const ModulusLpOptions& opt)
      : q_(q), a_(target), opt_(opt), r_(q.cols()), n_(2 * q.cols() + 1), sides_(opt.initial_sides) {}

  struct Outcome {
    Eigen::VectorXcd y;
    double upper = 0.0;
    double lower = 0.0;
    int sides = 0;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> round_bounds;
  };

  Outcome run() {
    init_phase1();
    const std::size_t cap = opt_.max_iterations ? opt_.max_iterations : 400 * static_cast<std::size_t>(n_) + 20000;
    const auto N = a_.size();
    Eigen::VectorXcd v(N);
    Outcome out;
    out.upper = std::numeric_limits<double>::infinity();
    out.y = Eigen::VectorXcd::Zero(r_);
    double lower = 0.0;
    int refinements = 0;
    int degenerate_run = 0;
    bool bland = false;
    std::size_t last_gain = 0;
    double best_obj = -std::numeric_limits<double>::infinity();

    for (std::size_t iter = 0;; ++iter) {
      if (iter >= cap) {
        out.iterations = iter;
        break;
      }
      if (iter > 0 && iter % static_cast<std::size_t>(opt_.refactor_every) == 0) refactor();
      if (!phase2_ && artificial_mass() <= kFeasTol) {
        start_phase2();
        last_gain = iter;
      }

      const Eigen::VectorXd pi = binv_.transpose() * cost_;
      Eigen::VectorXcd ytil(r_);
      for (Eigen::Index j = 0; j < r_; ++j) ytil(j) = {pi(j), pi(r_ + j)};
      const double t = pi(n_ - 1);

      v.noalias() = -(q_ * ytil);
      if (phase2_) {
        v += a_;
        const double upper = v.cwiseAbs().maxCoeff();
        if (upper < out.upper) {
          out.upper = upper;
          out.y = -ytil;
        }
        const double obj = cost_.dot(xb_);
        if (obj > best_obj + 1e-14 * std::abs(best_obj)) {
          best_obj = obj;
          last_gain = iter;
        }
        lower = std::max(lower, obj);
        if (out.upper - lower <= opt_.tol * out.upper) {
          out.converged = true;
          out.iterations = iter;
          break;
        }
      }
      const Candidate enter = bland ? price_bland(v, t) : price_dantzig(v, t);

      // Phase 2 without objective progress for this long is rounding noise, not pivoting.
      const bool stalled = phase2_ && iter - last_gain > std::max<std::size_t>(200, 40 * static_cast<std::size_t>(n_));
      if (enter.rc <= kOptTol || stalled) {
        if (!phase2_) throw SolverError("modulus LP: phase 1 stalled before reaching feasibility");
        out.round_bounds.push_back(lower);
        if (refinements >= opt_.max_refinements) {
          out.iterations = iter;
          break;
        }
        ++refinements;
        sides_ *= 2;
        bland = false;
        degenerate_run = 0;
        last_gain = iter;
        continue;
      }

      const Eigen::VectorXd col = column(enter.point, enter.angle);
      const Eigen::VectorXd d = binv_ * col;
      const auto leave = ratio_test(d, bland);
      if (leave < 0) throw SolverError("modulus LP: dual unbounded (primal infeasible), numerical breakdown");
      const double step = xb_(leave) / d(leave);
      if (step <= 1e-14) {
        if (++degenerate_run > 2 * n_) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      pivot(leave, d, step);
      basis_[static_cast<std::size_t>(leave)] = Basic{false, enter.point, enter.angle};
      cost_(leave) = phase2_ ? cut_cost(enter.point, enter.angle) : 0.0;
    }
    out.lower = std::min(lower, out.upper);
    out.sides = sides_;
    if (out.round_bounds.empty() || out.round_bounds.back() != lower) out.round_bounds.push_back(lower);
    return out;
  }

private:
  static constexpr double kOptTol = 1e-11;
  static constexpr double kFeasTol = 1e-12;
  static constexpr double kPivTol = 1e-11;

  struct Basic {
    bool artificial = true;
    Eigen::Index index = 0;  // row for artificials, point for cuts
    double angle = 0.0;
  };
  struct Candidate {
    double rc = -std::numeric_limits<double>::infinity();
    Eigen::Index point = -1;
    double angle = 0.0;
  };

  double side_angle(long long k) const { return 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(sides_); }

  long long nearest_side(std::complex<double> z) const {
    const double turns = std::arg(z) / (2.0 * std::numbers::pi) * static_cast<double>(sides_);
    long long k = std::llround(turns) % sides_;
    return k < 0 ? k + sides_ : k;
  }

  Eigen::VectorXd column(Eigen::Index point, double angle) const {
    const std::complex<double> e = std::polar(1.0, -angle);
    Eigen::VectorXd c(n_);
    for (Eigen::Index j = 0; j < r_; ++j) {
      const std::complex<double> g = e * q_(point, j);
      c(j) = g.real();
      c(r_ + j) = -g.imag();
    }
    c(n_ - 1) = 1.0;
    return c;
  }

  double cut_cost(Eigen::Index point, double angle) const { return (std::polar(1.0, -angle) * a_(point)).real(); }

  void init_phase1() {
    basis_.assign(static_cast<std::size_t>(n_), Basic{});
    for (Eigen::Index j = 0; j < n_; ++j) basis_[static_cast<std::size_t>(j)].index = j;
    binv_ = Eigen::MatrixXd::Identity(n_, n_);
    xb_ = Eigen::VectorXd::Zero(n_);
    xb_(n_ - 1) = 1.0;
    cost_ = Eigen::VectorXd::Constant(n_, -1.0);
    phase2_ = false;
  }

  double artificial_mass() const {
    double s = 0.0;
    for (Eigen::Index j = 0; j < n_; ++j)
      if (basis_[static_cast<std::size_t>(j)].artificial) s += std::max(0.0, xb_(j));
    return s;
  }

  void start_phase2() {
    phase2_ = true;
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Basic& b = basis_[static_cast<std::size_t>(j)];
      cost_(j) = b.artificial ? 0.0 : cut_cost(b.index, b.angle);
      if (b.artificial) xb_(j) = 0.0;
    }
  }

  Candidate price_dantzig(const Eigen::VectorXcd& v, double t) const {
    Candidate best;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double mod = std::abs(v(i));
      if (mod - t <= best.rc) continue;
      const double phi = side_angle(nearest_side(v(i)));
      const double rc = (std::polar(1.0, -phi) * v(i)).real() - t;
      if (rc > best.rc) best = {rc, i, phi};
    }
    return best;
  }

  // Lowest (point, side) index with positive reduced cost.
  Candidate price_bland(const Eigen::VectorXcd& v, double t) const {
    const double two_pi = 2.0 * std::numbers::pi;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const double mod = std::abs(v(i));
      if (mod <= t + kOptTol) continue;
      const double c = (t + kOptTol) / mod;
      long long k = 0;
      if (c > -1.0) {
        const double half = std::acos(c);
        const double center = std::arg(v(i));
        const auto lo = static_cast<long long>(std::ceil((center - half) / two_pi * sides_));
        const auto hi = static_cast<long long>(std::floor((center + half) / two_pi * sides_));
        if (hi < lo) continue;
        const long long first_multiple = static_cast<long long>(std::ceil(static_cast<double>(lo) / sides_)) * sides_;
        k = (first_multiple <= hi) ? 0 : ((lo % sides_) + sides_) % sides_;
      }
      double phi = side_angle(k);
      double rc = (std::polar(1.0, -phi) * v(i)).real() - t;
      if (rc <= kOptTol) {
        phi = side_angle(nearest_side(v(i)));
        rc = (std::polar(1.0, -phi) * v(i)).real() - t;
        if (rc <= kOptTol) continue;
      }
      return {rc, i, phi};
    }
    return {};
  }

  long long bland_index(Eigen::Index row) const {
    const Basic& b = basis_[static_cast<std::size_t>(row)];
    if (b.artificial) return b.index;
    const auto k = static_cast<long long>(std::llround(b.angle / (2.0 * std::numbers::pi) * sides_)) % sides_;
    return n_ + static_cast<long long>(b.index) * sides_ + k;
  }

  Eigen::Index ratio_test(const Eigen::VectorXd& d, bool bland) const {
    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Basic& b = basis_[static_cast<std::size_t>(j)];
      double ratio;
      if (phase2_ && b.artificial) {
        if (std::abs(d(j)) <= kPivTol) continue;
        ratio = 0.0;
      } else {
        if (d(j) <= kPivTol) continue;
        ratio = std::max(0.0, xb_(j)) / d(j);
      }
      const double slack = 1e-12 * std::max(1.0, best_ratio == std::numeric_limits<double>::infinity() ? 1.0 : best_ratio);
      if (leave < 0 || ratio < best_ratio - slack) {
        leave = j;
        best_ratio = ratio;
      } else if (ratio <= best_ratio + slack) {
        const bool better = bland ? bland_index(j) < bland_index(leave) : std::abs(d(j)) > std::abs(d(leave));
        if (better) {
          leave = j;
          best_ratio = std::min(best_ratio, ratio);
        }
      }
    }
    return leave;
  }

  void pivot(Eigen::Index p, const Eigen::VectorXd& d, double step) {
    const double dp = d(p);
    const Eigen::RowVectorXd prow = binv_.row(p) / dp;
    binv_.noalias() -= d * prow;
    binv_.row(p) = prow;
    xb_ -= step * d;
    xb_(p) = step;
    for (Eigen::Index j = 0; j < n_; ++j)
      if (xb_(j) < 0.0 && xb_(j) > -1e-13) xb_(j) = 0.0;
  }

  void refactor() {
    Eigen::MatrixXd bmat(n_, n_);
    for (Eigen::Index j = 0; j < n_; ++j) {
      const Basic& b = basis_[static_cast<std::size_t>(j)];
      if (b.artificial) {
        bmat.col(j).setZero();
        bmat(b.index, j) = 1.0;
      } else {
        bmat.col(j) = column(b.index, b.angle);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(bmat);
    binv_ = lu.inverse();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_);
    rhs(n_ - 1) = 1.0;
    xb_ = binv_ * rhs;
    for (Eigen::Index j = 0; j < n_; ++j) {
      if (xb_(j) < 0.0 && xb_(j) > -1e-10) xb_(j) = 0.0;
      if (phase2_ && basis_[static_cast<std::size_t>(j)].artificial) xb_(j) = 0.0;
    }
  }

  const Eigen::MatrixXcd& q_;
  const Eigen::VectorXcd& a_;
  ModulusLpOptions opt_;
  Eigen::Index r_;
  Eigen::Index n_;
  long long sides_;
  std::vector<Basic> basis_;
  Eigen::MatrixXd binv_;
  Eigen::VectorXd xb_;
  Eigen::VectorXd cost_;
  bool phase2_ = false;
};

inline ModulusLpResult solve_modulus_lp(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& B, const ModulusLpOptions& opt) {
  const Eigen::Index N = a.size();
  const Eigen::Index k = B.cols();

  ModulusLpResult res;
  res.coeffs = Eigen::VectorXcd::Zero(k);
  res.sides = opt.initial_sides;

  std::vector<Eigen::Index> live;
  std::vector<double> col_norm;
  for (Eigen::Index j = 0; j < k; ++j) {
    const double nrm = B.col(j).norm();
    if (nrm > 0.0 && std::isfinite(nrm)) {
      live.push_back(j);
      col_norm.push_back(nrm);
    }
  }
  if (live.empty()) {
    res.norm = res.lower_bound = a.cwiseAbs().maxCoeff();
    res.converged = true;
    res.round_bounds.push_back(res.lower_bound);
    return res;
  }

  Eigen::MatrixXcd bs(N, static_cast<Eigen::Index>(live.size()));
  for (std::size_t j = 0; j < live.size(); ++j) bs.col(static_cast<Eigen::Index>(j)) = B.col(live[j]) / col_norm[j];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(bs.rows(), bs.cols());
  qr.setThreshold(opt.rank_tol);
  qr.compute(bs);
  const Eigen::Index r = qr.rank();
  res.rank = static_cast<std::size_t>(r);
  const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(N, r);

  // Least-squares residual, re-orthogonalized once.
  Eigen::VectorXcd coef = q.adjoint() * a;
  Eigen::VectorXcd resid = a - q * coef;
  const Eigen::VectorXcd corr = q.adjoint() * resid;
  resid -= q * corr;
  coef += corr;

  const double scale = resid.cwiseAbs().maxCoeff();
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(r);
  if (scale > 0.0) {
    const Eigen::VectorXcd target = resid / scale;
    ColumnGenerationLp lp(q, target, opt);
    auto out = lp.run();
    y = out.y * scale;
    res.norm = out.upper * scale;
    res.lower_bound = out.lower * scale;
    res.sides = out.sides;
    res.converged = out.converged;
    res.iterations = out.iterations;
    for (double b : out.round_bounds) res.round_bounds.push_back(b * scale);
  } else {
    res.converged = true;
    res.round_bounds.push_back(0.0);
  }

  // Back to the caller's coefficients: B_sel c_sel = Q R11 c_sel = Q (y - coef).
  const Eigen::VectorXcd rhs = y - coef;
  const Eigen::VectorXcd c_sel = qr.matrixR().topLeftCorner(r, r).template triangularView<Eigen::Upper>().solve(rhs);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = 0; j < r; ++j) {
    const auto src = static_cast<std::size_t>(perm(j));
    res.coeffs(live[src]) = c_sel(j) / col_norm[src];
  }
  res.rel_gap = res.norm > 0.0 ? (res.norm - res.lower_bound) / res.norm : 0.0;
  return res;
}

/// Minimizes max_i |a_i + (B c)_i| over c in C^k.
inline ModulusLpResult minimize_max_modulus(const Eigen::VectorXcd& a, const Eigen::MatrixXcd& B, const ModulusLpOptions& opt = {}) {
  if (a.size() == 0) throw std::invalid_argument("minimize_max_modulus: no points");
  if (B.rows() != a.size()) throw std::invalid_argument("minimize_max_modulus: row mismatch");
  if (!(opt.tol > 0.0)) throw std::invalid_argument("minimize_max_modulus: tol must be > 0");
  if (opt.initial_sides < 3) throw std::invalid_argument("minimize_max_modulus: need at least 3 polygon sides");

  // Rows with B_i = 0 are constants |a_i| and only set a floor on the optimum.
  std::vector<Eigen::Index> rows;
  double floor = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (B.cols() == 0 || B.row(i).cwiseAbs().maxCoeff() == 0.0)
      floor = std::max(floor, std::abs(a(i)));
    else
      rows.push_back(i);
  }
  if (static_cast<Eigen::Index>(rows.size()) == a.size()) return solve_modulus_lp(a, B, opt);

  ModulusLpResult res;
  if (rows.empty()) {
    res.coeffs = Eigen::VectorXcd::Zero(B.cols());
    res.norm = res.lower_bound = floor;
    res.sides = opt.initial_sides;
    res.converged = true;
    res.round_bounds.push_back(floor);
    return res;
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXcd a_r(n);
  Eigen::MatrixXcd b_r(n, B.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    a_r(i) = a(rows[static_cast<std::size_t>(i)]);
    b_r.row(i) = B.row(rows[static_cast<std::size_t>(i)]);
  }
  res = solve_modulus_lp(a_r, b_r, opt);
  res.norm = std::max(res.norm, floor);
  res.lower_bound = std::max(res.lower_bound, floor);
  for (double& b : res.round_bounds) b = std::max(b, floor);
  res.rel_gap = res.norm > 0.0 ? (res.norm - res.lower_bound) / res.norm : 0.0;
  res.converged = res.converged || res.norm - res.lower_bound <= opt.tol * res.norm;
  return res;
}

}  // namespace chebdir::detail
